#pragma once

// Information designs: which prices and demands a meta-learner may condition
// on, which observation(s) supervise it, and the fixed-length input layout.
//
// All indices are 0-based. For a panel with K observations the final index is
// K-1 and k_star is the last index whose price differs from the final price.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"
#include "mtdemand/rng.hpp"

namespace mtdemand {

enum class Design { DCMOML, DCUOML, DCML, META };

inline std::string_view to_string(Design d) {
  switch (d) {
    case Design::DCMOML: return "DCMOML";
    case Design::DCUOML: return "DCUOML";
    case Design::DCML: return "DCML";
    case Design::META: return "META";
  }
  return "?";
}

inline Design parse_design(std::string_view s) {
  if (s == "DCMOML") return Design::DCMOML;
  if (s == "DCUOML") return Design::DCUOML;
  if (s == "DCML") return Design::DCML;
  if (s == "META") return Design::META;
  throw Error(ErrorKind::InvalidConfig, "unknown design '" + std::string(s) + "'");
}

/// Averaged: both candidate query points with weight 1/2 each.
/// Sampled: only the drawn query point, weight 1.
enum class LossMode { Averaged, Sampled };

inline bool randomizes_query(Design d) { return d == Design::DCMOML || d == Design::DCUOML; }

struct QueryAssignment {
  std::size_t k_star = 0;
  std::size_t k_query = 0;
  std::size_t k_masked_other = 0;

  friend bool operator==(const QueryAssignment&, const QueryAssignment&) = default;
};

/// Largest j with prices[j] != prices[K-1], compared exactly.
inline std::size_t find_penultimate_index(const std::vector<double>& prices) {
  if (prices.size() < 2) throw Error(ErrorKind::AllPricesEqual, "fewer than two prices");
  const double last = prices.back();
  for (std::size_t j = prices.size() - 1; j-- > 0;)
    if (prices[j] != last) return j;
  throw Error(ErrorKind::AllPricesEqual, "every price equals the final price");
}

inline QueryAssignment assign_query(const std::vector<double>& prices, Rng& rng) {
  QueryAssignment a;
  a.k_star = find_penultimate_index(prices);
  const std::size_t last = prices.size() - 1;
  if (rng.coin()) {
    a.k_query = a.k_star;
    a.k_masked_other = last;
  } else {
    a.k_query = last;
    a.k_masked_other = a.k_star;
  }
  return a;
}

/// Per-task stream: the draw for task i does not depend on other tasks.
inline QueryAssignment assign_query(const TaskPanel& panel, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, StreamDomain::Query, static_cast<std::uint64_t>(panel.task_id));
  return assign_query(panel.prices, rng);
}

/// Fixed assignment for designs whose query is always the final index.
inline QueryAssignment final_index_assignment(const TaskPanel& panel) {
  const std::size_t last = panel.size() - 1;
  return QueryAssignment{last == 0 ? 0 : last - 1, last, last == 0 ? 0 : last - 1};
}

struct MaskedInfoSet {
  Design design = Design::DCMOML;
  std::vector<double> context;
  /// Prices the learner sees: all K for DCMOML/DCUOML/DCML, the K-1 support
  /// prices for META.
  std::vector<double> prices;
  /// Exposures aligned with `prices` (empty when the panel has none).
  std::vector<double> exposures;
  /// (index, demand) pairs in index order.
  std::vector<std::pair<std::size_t, double>> visible_demands;
  /// DCUOML only: the non-query demand of the masked pair, without its index.
  std::optional<double> unassigned_demand;
  /// DCML only: the price whose demand is predicted.
  std::optional<double> query_price;
  std::size_t k_obs = 0;
};

inline MaskedInfoSet build_info_set(const TaskPanel& panel, Design design,
                                    const QueryAssignment& assignment) {
  validate_panel(panel);
  const std::size_t K = panel.size();
  const std::size_t last = K - 1;
  MaskedInfoSet info;
  info.design = design;
  info.context = panel.context;
  info.k_obs = K;
  auto add_price = [&](std::size_t k) {
    info.prices.push_back(panel.prices[k]);
    if (panel.exposures) info.exposures.push_back(static_cast<double>((*panel.exposures)[k]));
  };
  switch (design) {
    case Design::DCMOML:
    case Design::DCUOML: {
      const std::size_t k_star = find_penultimate_index(panel.prices);
      for (std::size_t k = 0; k < K; ++k) add_price(k);
      for (std::size_t k = 0; k < K; ++k)
        if (k != k_star && k != last) info.visible_demands.emplace_back(k, panel.demands[k]);
      if (design == Design::DCUOML) {
        if (assignment.k_star != k_star)
          throw Error(ErrorKind::InvalidConfig, "assignment does not match this panel");
        info.unassigned_demand = panel.demands[assignment.k_masked_other];
      }
      break;
    }
    case Design::DCML:
    case Design::META: {
      const std::size_t n_prices = design == Design::DCML ? K : K - 1;
      for (std::size_t k = 0; k < n_prices; ++k) add_price(k);
      for (std::size_t k = 0; k < last; ++k) info.visible_demands.emplace_back(k, panel.demands[k]);
      if (design == Design::DCML) info.query_price = panel.prices[last];
      break;
    }
  }
  return info;
}

struct SupervisionTarget {
  std::size_t index = 0;
  double price = 0.0;
  double demand = 0.0;
  double weight = 1.0;
};

/// Query points and their loss weights. Exposure weights multiply in and are
/// normalized to sum to one within the task.
inline std::vector<SupervisionTarget> supervision_targets(const TaskPanel& panel, Design design,
                                                          const QueryAssignment& assignment,
                                                          LossMode mode = LossMode::Averaged) {
  validate_panel(panel);
  std::vector<SupervisionTarget> out;
  auto push = [&](std::size_t k, double w) {
    out.push_back(SupervisionTarget{k, panel.prices[k], panel.demands[k], w});
  };
  const std::size_t last = panel.size() - 1;
  if (design == Design::DCMOML && mode == LossMode::Averaged) {
    const std::size_t k_star = find_penultimate_index(panel.prices);
    push(k_star, 0.5);
    push(last, 0.5);
  } else if (randomizes_query(design)) {
    push(assignment.k_query, 1.0);
  } else {
    push(last, 1.0);
  }
  if (panel.exposures) {
    double total = 0.0;
    for (auto& t : out) {
      t.weight *= static_cast<double>((*panel.exposures)[t.index]);
      total += t.weight;
    }
    for (auto& t : out) t.weight /= total;
  }
  return out;
}

/// Fixed-length flattening of an information set:
///   context | prices | exposures (optional) | demand slots | unassigned demand
/// DCMOML/DCUOML use one (value, presence flag) slot per index 0..K-2, since
/// which of those is hidden depends on k_star; META/DCML see every support
/// demand so their slots carry values only.
struct InputLayout {
  Design design = Design::DCMOML;
  std::size_t context_dim = 0;
  std::size_t k_obs = 2;
  bool exposure_inputs = false;

  std::size_t n_prices() const { return design == Design::META ? k_obs - 1 : k_obs; }

  std::size_t dimension() const {
    std::size_t d = context_dim + n_prices();
    if (exposure_inputs) d += n_prices();
    if (randomizes_query(design))
      d += 2 * (k_obs - 1);
    else
      d += k_obs - 1;
    if (design == Design::DCUOML) d += 1;
    return d;
  }

  friend bool operator==(const InputLayout&, const InputLayout&) = default;
};

inline std::vector<double> flatten(const MaskedInfoSet& info, const InputLayout& layout) {
  if (info.design != layout.design)
    throw Error(ErrorKind::DimensionMismatch, "info set design differs from layout design");
  if (info.context.size() != layout.context_dim || info.k_obs != layout.k_obs ||
      info.prices.size() != layout.n_prices())
    throw Error(ErrorKind::DimensionMismatch, "info set shape differs from layout");
  if (layout.exposure_inputs && info.exposures.size() != info.prices.size())
    throw Error(ErrorKind::DimensionMismatch, "layout expects exposures");
  std::vector<double> x;
  x.reserve(layout.dimension());
  x.insert(x.end(), info.context.begin(), info.context.end());
  x.insert(x.end(), info.prices.begin(), info.prices.end());
  if (layout.exposure_inputs) x.insert(x.end(), info.exposures.begin(), info.exposures.end());
  const std::size_t slots = layout.k_obs - 1;
  if (randomizes_query(layout.design)) {
    std::vector<double> value(slots, 0.0), flag(slots, 0.0);
    for (const auto& [k, d] : info.visible_demands) {
      if (k >= slots) throw Error(ErrorKind::DimensionMismatch, "demand index out of range");
      value[k] = d;
      flag[k] = 1.0;
    }
    for (std::size_t k = 0; k < slots; ++k) {
      x.push_back(value[k]);
      x.push_back(flag[k]);
    }
    if (layout.design == Design::DCUOML) {
      if (!info.unassigned_demand)
        throw Error(ErrorKind::DimensionMismatch, "DCUOML info set lacks the unassigned demand");
      x.push_back(*info.unassigned_demand);
    }
  } else {
    if (info.visible_demands.size() != slots)
      throw Error(ErrorKind::DimensionMismatch, "support demand count differs from layout");
    for (const auto& [k, d] : info.visible_demands) x.push_back(d);
  }
  return x;
}

}  // namespace mtdemand
