#pragma once

// Panel serialization. CSV has one row per (task, period):
//   task_id,k,price,demand,exposure,true_theta0,true_theta1,z_0..z_{d-1}
// with k 1-based and empty cells for absent optionals. JSON lines hold one
// task per line. Both print doubles with 17 significant digits.

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtdemand/csv.hpp"
#include "mtdemand/demand.hpp"

namespace mtdemand {

inline void write_panels_csv(std::ostream& out, const std::vector<TaskPanel>& panels) {
  std::size_t dim = 0;
  for (const auto& p : panels) dim = std::max(dim, p.context.size());
  out << "task_id,k,price,demand,exposure,true_theta0,true_theta1";
  for (std::size_t j = 0; j < dim; ++j) out << ",z_" << j;
  out << '\n';
  for (const auto& p : panels) {
    validate_panel(p);
    if (p.context.size() != dim)
      throw Error(ErrorKind::DimensionMismatch, "panels have different context sizes");
    for (std::size_t k = 0; k < p.size(); ++k) {
      out << p.task_id << ',' << (k + 1) << ',' << csv::format_double(p.prices[k]) << ','
          << csv::format_double(p.demands[k]) << ',';
      if (p.exposures) out << (*p.exposures)[k];
      out << ',';
      if (p.true_params) out << csv::format_double(p.true_params->theta0);
      out << ',';
      if (p.true_params) out << csv::format_double(p.true_params->theta1);
      for (double z : p.context) out << ',' << csv::format_double(z);
      out << '\n';
    }
  }
}

inline std::vector<TaskPanel> read_panels_csv(std::istream& in) {
  std::string line;
  if (!csv::read_record(in, line)) throw Error(ErrorKind::EmptyInput, "panel CSV has no header");
  const auto header = csv::split_record(line);
  if (!header) throw Error(ErrorKind::MalformedRow, "bad panel header");
  const std::size_t c_id = csv::column_index(*header, "task_id");
  const std::size_t c_k = csv::column_index(*header, "k");
  const std::size_t c_price = csv::column_index(*header, "price");
  const std::size_t c_demand = csv::column_index(*header, "demand");
  const std::size_t c_exp = csv::column_index(*header, "exposure");
  const std::size_t c_t0 = csv::column_index(*header, "true_theta0");
  const std::size_t c_t1 = csv::column_index(*header, "true_theta1");
  std::vector<std::size_t> c_z;
  for (std::size_t j = 0;; ++j) {
    const std::string name = "z_" + std::to_string(j);
    bool found = false;
    for (std::size_t i = 0; i < header->size(); ++i)
      if ((*header)[i] == name) {
        c_z.push_back(i);
        found = true;
      }
    if (!found) break;
  }

  std::vector<TaskPanel> panels;
  std::map<std::int64_t, std::size_t> slot;
  std::size_t row = 1;
  while (csv::read_record(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    const auto bad = [&](const std::string& why) {
      return Error(ErrorKind::MalformedRow, "panel row " + std::to_string(row) + ": " + why);
    };
    if (!f || f->size() != header->size()) throw bad("wrong field count");
    const auto id = csv::parse_int((*f)[c_id]);
    const auto k = csv::parse_int((*f)[c_k]);
    const auto price = csv::parse_double((*f)[c_price]);
    const auto demand = csv::parse_double((*f)[c_demand]);
    if (!id || !k || !price || !demand) throw bad("unparsable core field");
    auto [it, inserted] = slot.try_emplace(*id, panels.size());
    if (inserted) {
      TaskPanel p;
      p.task_id = *id;
      for (std::size_t c : c_z) {
        const auto z = csv::parse_double((*f)[c]);
        if (!z) throw bad("unparsable context");
        p.context.push_back(*z);
      }
      if (!(*f)[c_t0].empty()) {
        const auto t0 = csv::parse_double((*f)[c_t0]);
        const auto t1 = csv::parse_double((*f)[c_t1]);
        if (!t0 || !t1) throw bad("unparsable true params");
        p.true_params = DemandParams{*t0, *t1};
      }
      panels.push_back(std::move(p));
    }
    TaskPanel& p = panels[it->second];
    if (static_cast<std::size_t>(*k) != p.prices.size() + 1) throw bad("k out of sequence");
    p.prices.push_back(*price);
    p.demands.push_back(*demand);
    if (!(*f)[c_exp].empty()) {
      const auto e = csv::parse_int((*f)[c_exp]);
      if (!e) throw bad("unparsable exposure");
      if (!p.exposures) p.exposures.emplace();
      p.exposures->push_back(static_cast<int>(*e));
    }
  }
  for (const auto& p : panels) validate_panel(p);
  return panels;
}

inline nlohmann::json panel_to_json(const TaskPanel& p) {
  nlohmann::json j;
  j["task_id"] = p.task_id;
  j["context"] = p.context;
  j["prices"] = p.prices;
  j["demands"] = p.demands;
  j["exposures"] = p.exposures ? nlohmann::json(*p.exposures) : nlohmann::json(nullptr);
  if (p.true_params)
    j["true_params"] = {{"theta0", p.true_params->theta0}, {"theta1", p.true_params->theta1}};
  else
    j["true_params"] = nullptr;
  return j;
}

inline TaskPanel panel_from_json(const nlohmann::json& j) {
  TaskPanel p;
  p.task_id = j.at("task_id").get<std::int64_t>();
  p.context = j.at("context").get<std::vector<double>>();
  p.prices = j.at("prices").get<std::vector<double>>();
  p.demands = j.at("demands").get<std::vector<double>>();
  if (j.contains("exposures") && !j["exposures"].is_null())
    p.exposures = j["exposures"].get<std::vector<int>>();
  if (j.contains("true_params") && !j["true_params"].is_null())
    p.true_params = DemandParams{j["true_params"].at("theta0").get<double>(),
                                 j["true_params"].at("theta1").get<double>()};
  validate_panel(p);
  return p;
}

inline void write_panels_jsonl(std::ostream& out, const std::vector<TaskPanel>& panels) {
  for (const auto& p : panels) out << panel_to_json(p).dump() << '\n';
}

inline std::vector<TaskPanel> read_panels_jsonl(std::istream& in) {
  std::vector<TaskPanel> panels;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      panels.push_back(panel_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::MalformedRow, "jsonl line " + std::to_string(row) + ": " + e.what());
    }
  }
  return panels;
}

}  // namespace mtdemand
