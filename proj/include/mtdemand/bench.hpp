#pragma once

// Synthetic benchmark harness: (method x sigma_c x seed) cells run on a
// thread pool, each owning its own generator and training streams, reduced
// in fixed cell order so serial and parallel runs agree byte for byte.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mtdemand/csv.hpp"
#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"
#include "mtdemand/estimators.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/meta.hpp"
#include "mtdemand/rng.hpp"
#include "mtdemand/stats.hpp"

namespace mtdemand {

enum class Method {
  DCMOML,
  DCUOML,
  DCML,
  META,
  META_NA,
  EB_GLS,
  SHARED,
  TASK_OLS,
  DCMOML_LINEAR,
  META_LINEAR,
  DCML_LINEAR
};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::DCMOML: return "DCMOML";
    case Method::DCUOML: return "DCUOML";
    case Method::DCML: return "DCML";
    case Method::META: return "META";
    case Method::META_NA: return "META-NA";
    case Method::EB_GLS: return "EB-GLS";
    case Method::SHARED: return "SHARED";
    case Method::TASK_OLS: return "TASK-OLS";
    case Method::DCMOML_LINEAR: return "DCMOML-LINEAR";
    case Method::META_LINEAR: return "META-LINEAR";
    case Method::DCML_LINEAR: return "DCML-LINEAR";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::DCMOML, Method::DCUOML, Method::DCML, Method::META, Method::META_NA,
                   Method::EB_GLS, Method::SHARED, Method::TASK_OLS, Method::DCMOML_LINEAR,
                   Method::META_LINEAR, Method::DCML_LINEAR})
    if (to_string(m) == s) return m;
  throw Error(ErrorKind::InvalidConfig, "unknown method '" + std::string(s) + "'");
}

struct HistogramConfig {
  std::size_t bins = 40;
  std::optional<std::pair<double, double>> theta0_range;
  std::optional<std::pair<double, double>> theta1_range;
};

struct ExperimentConfig {
  GenConfig gen = GenConfig::appendix_b(0.0, 5000, 0);
  std::vector<Method> methods{Method::DCMOML, Method::META, Method::DCML, Method::EB_GLS,
                              Method::SHARED, Method::TASK_OLS};
  std::vector<double> sigma_c{0.0, 0.1, 0.2};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  TrainConfig train;
  EbOptions eb;
  HistogramConfig histogram;
  std::size_t jobs = 1;
  std::string out_dir;

  void validate() const {
    if (methods.empty()) throw Error(ErrorKind::InvalidConfig, "methods must be non-empty");
    if (seeds.empty()) throw Error(ErrorKind::InvalidConfig, "seeds must be non-empty");
    if (sigma_c.empty()) throw Error(ErrorKind::InvalidConfig, "sigma_c grid must be non-empty");
    for (double s : sigma_c)
      if (!(s >= 0)) throw Error(ErrorKind::InvalidConfig, "sigma_c values must be >= 0");
    if (histogram.bins < 1) throw Error(ErrorKind::InvalidConfig, "histogram bins must be >= 1");
    gen.validate();
    train.validate();
  }
};

struct TaskPrediction {
  std::int64_t task_id = 0;
  DemandParams estimate;
  DemandParams truth;
};

struct CellResult {
  Method method = Method::DCMOML;
  double sigma_c = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double slope_mse = 0.0;
  double intercept_mse = 0.0;
  std::size_t n_evaluated = 0;
  std::size_t n_skipped = 0;
  double seconds = 0.0;
  std::vector<TaskPrediction> predictions;  // kept for the first seed only
};

struct MethodSummary {
  Method method = Method::DCMOML;
  double sigma_c = 0.0;
  double slope_mse = 0.0;
  double slope_hw = 0.0;
  double intercept_mse = 0.0;
  double intercept_hw = 0.0;
  std::size_t n_seeds = 0;
  double seconds = 0.0;

  friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct BenchReport {
  std::vector<CellResult> cells;
  std::vector<MethodSummary> summaries;

  const MethodSummary* find(Method m, double sigma_c) const {
    for (const auto& s : summaries)
      if (s.method == m && s.sigma_c == sigma_c) return &s;
    return nullptr;
  }
};

/// Estimates for every panel (nullopt where a method cannot produce one).
inline std::vector<std::optional<DemandParams>> estimate(Method method,
                                                         const std::vector<TaskPanel>& panels,
                                                         const TrainConfig& train,
                                                         const EbOptions& eb) {
  auto mlp = [&](Design d) {
    TrainConfig tc = train;
    tc.design = d;
    const TrainResult fit = mtdemand::train(panels, tc);
    return predict_panels(fit.model, panels, d, tc.seed);
  };
  auto all = [&](auto&& f) {
    std::vector<std::optional<DemandParams>> out;
    for (const auto& p : panels) {
      try {
        out.push_back(f(p));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularDesign && e.kind() != ErrorKind::AllPricesEqual) throw;
        out.push_back(std::nullopt);
      }
    }
    return out;
  };
  switch (method) {
    case Method::DCMOML: return mlp(Design::DCMOML);
    case Method::DCUOML: return mlp(Design::DCUOML);
    case Method::DCML: return mlp(Design::DCML);
    case Method::META:
    case Method::META_NA: return mlp(Design::META);
    case Method::EB_GLS: {
      const EbPrior prior = eb_fit_prior(panels, eb);
      return all([&](const TaskPanel& p) { return eb_posterior(p, prior, eb.weighting); });
    }
    case Method::SHARED: {
      const DemandParams s = shared_ols(panels, Weighting::Exposure);
      return all([&](const TaskPanel&) { return s; });
    }
    case Method::TASK_OLS:
      return all([&](const TaskPanel& p) { return task_ols(p, Weighting::Exposure).params; });
    case Method::DCMOML_LINEAR: {
      const SymmetricLinearModel m = symmetric_linear_fit(panels);
      return all([&](const TaskPanel& p) { return m.predict(p.prices[0], p.prices[1]); });
    }
    case Method::META_LINEAR:
    case Method::DCML_LINEAR: {
      const Design d = method == Method::META_LINEAR ? Design::META : Design::DCML;
      const AffineMetaModel m =
          affine_meta_fit(build_training_set(panels, d, LossMode::Averaged, train.seed));
      return predict_panels(m, panels, d, train.seed);
    }
  }
  return {};
}

inline CellResult run_cell(const ExperimentConfig& cfg, Method method, std::size_t method_index,
                           std::size_t sigma_index, std::uint64_t seed, bool keep_predictions) {
  CellResult r;
  r.method = method;
  r.sigma_c = cfg.sigma_c[sigma_index];
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    GenConfig g = cfg.gen;
    g.confound_sigma = r.sigma_c;
    g.seed = seed;
    const auto panels = generate(g);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(seed, StreamDomain::Init, method_index * 1024 + sigma_index);
    const auto est = estimate(method, panels, tc, cfg.eb);
    double s0 = 0, s1 = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (!est[i] || !panels[i].true_params) {
        ++r.n_skipped;
        continue;
      }
      const DemandParams& t = *panels[i].true_params;
      s0 += (est[i]->theta0 - t.theta0) * (est[i]->theta0 - t.theta0);
      s1 += (est[i]->theta1 - t.theta1) * (est[i]->theta1 - t.theta1);
      ++r.n_evaluated;
      if (keep_predictions) r.predictions.push_back({panels[i].task_id, *est[i], t});
    }
    if (r.n_evaluated == 0) throw Error(ErrorKind::EmptyTrainSet, "no task could be evaluated");
    r.intercept_mse = s0 / static_cast<double>(r.n_evaluated);
    r.slope_mse = s1 / static_cast<double>(r.n_evaluated);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Summaries use only successful cells; the half-width is 1.96 SE across seeds.
inline std::vector<MethodSummary> summarize(const ExperimentConfig& cfg,
                                            const std::vector<CellResult>& cells) {
  std::vector<MethodSummary> out;
  for (Method m : cfg.methods)
    for (double s : cfg.sigma_c) {
      std::vector<double> slope, intercept;
      MethodSummary ms;
      ms.method = m;
      ms.sigma_c = s;
      for (const auto& c : cells)
        if (c.method == m && c.sigma_c == s) {
          ms.seconds += c.seconds;
          if (!c.ok) continue;
          slope.push_back(c.slope_mse);
          intercept.push_back(c.intercept_mse);
        }
      const MeanSe a = mean_se(slope), b = mean_se(intercept);
      ms.slope_mse = a.mean;
      ms.slope_hw = a.half_width();
      ms.intercept_mse = b.mean;
      ms.intercept_hw = b.half_width();
      ms.n_seeds = slope.size();
      out.push_back(ms);
    }
  return out;
}

inline BenchReport run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Spec {
    Method method;
    std::size_t method_index, sigma_index;
    std::uint64_t seed;
    bool keep;
  };
  std::vector<Spec> specs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m)
    for (std::size_t s = 0; s < cfg.sigma_c.size(); ++s)
      for (std::size_t k = 0; k < cfg.seeds.size(); ++k)
        specs.push_back({cfg.methods[m], m, s, cfg.seeds[k], k == 0});

  BenchReport rep;
  rep.cells.resize(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      const Spec& s = specs[i];
      rep.cells[i] = run_cell(cfg, s.method, s.method_index, s.sigma_index, s.seed, s.keep);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, specs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  rep.summaries = summarize(cfg, rep.cells);
  return rep;
}

// ---------------------------------------------------------------------------
// Outputs.

inline constexpr std::string_view kResultsHeader =
    "method,sigma_c,slope_mse,slope_hw,intercept_mse,intercept_hw,n_seeds";

inline void write_results_csv(std::ostream& out, const std::vector<MethodSummary>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << csv::format_double(r.sigma_c) << ','
        << csv::format_double(r.slope_mse) << ',' << csv::format_double(r.slope_hw) << ','
        << csv::format_double(r.intercept_mse) << ',' << csv::format_double(r.intercept_hw) << ','
        << r.n_seeds << '\n';
}

inline std::vector<MethodSummary> read_results_csv(std::istream& in) {
  std::string line;
  if (!csv::read_record(in, line)) throw Error(ErrorKind::EmptyInput, "results file is empty");
  if (line != kResultsHeader) throw Error(ErrorKind::MalformedRow, "unexpected results header");
  std::vector<MethodSummary> out;
  while (csv::read_record(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    if (!f || f->size() != 7) throw Error(ErrorKind::MalformedRow, "results row: " + line);
    MethodSummary m;
    m.method = parse_method((*f)[0]);
    const auto v1 = csv::parse_double((*f)[1]), v2 = csv::parse_double((*f)[2]),
               v3 = csv::parse_double((*f)[3]), v4 = csv::parse_double((*f)[4]),
               v5 = csv::parse_double((*f)[5]);
    const auto n = csv::parse_int((*f)[6]);
    if (!v1 || !v2 || !v3 || !v4 || !v5 || !n)
      throw Error(ErrorKind::MalformedRow, "results row: " + line);
    m.sigma_c = *v1;
    m.slope_mse = *v2;
    m.slope_hw = *v3;
    m.intercept_mse = *v4;
    m.intercept_hw = *v5;
    m.n_seeds = static_cast<std::size_t>(*n);
    out.push_back(m);
  }
  return out;
}

inline void write_timing_csv(std::ostream& out, const std::vector<MethodSummary>& rows) {
  out << "method,sigma_c,seconds\n";
  for (const auto& r : rows)
    out << to_string(r.method) << ',' << csv::format_double(r.sigma_c) << ','
        << csv::format_double(r.seconds) << '\n';
}

inline void write_predictions_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "method,sigma_c,seed,task_id,theta0_hat,theta1_hat,theta0_true,theta1_true\n";
  for (const auto& c : cells)
    for (const auto& p : c.predictions)
      out << to_string(c.method) << ',' << csv::format_double(c.sigma_c) << ',' << c.seed << ','
          << p.task_id << ',' << csv::format_double(p.estimate.theta0) << ','
          << csv::format_double(p.estimate.theta1) << ',' << csv::format_double(p.truth.theta0)
          << ',' << csv::format_double(p.truth.theta1) << '\n';
}

struct HistogramBin {
  double lo = 0.0;  // -inf for the underflow bin
  double hi = 0.0;  // +inf for the overflow bin
  std::size_t count = 0;
};

/// `bins` equal-width bins on [lo, hi) plus underflow and overflow bins, so
/// the counts always sum to the number of finite inputs. NaNs go to overflow.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi,
                                           std::size_t bins) {
  if (!(hi > lo) || bins < 1) throw Error(ErrorKind::InvalidConfig, "bad histogram range");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<HistogramBin> h(bins + 2);
  h.front() = {-inf, lo, 0};
  h.back() = {hi, inf, 0};
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b)
    h[b + 1] = {lo + w * static_cast<double>(b), b + 1 == bins ? hi : lo + w * static_cast<double>(b + 1), 0};
  for (double v : values) {
    if (v < lo) {
      ++h.front().count;
    } else if (!(v < hi)) {
      ++h.back().count;
    } else {
      auto b = static_cast<std::size_t>((v - lo) / w);
      b = std::min(b, bins - 1);
      ++h[b + 1].count;
    }
  }
  return h;
}

namespace detail {

inline std::pair<double, double> auto_range(const std::vector<double>& truth) {
  const auto [mn, mx] = std::minmax_element(truth.begin(), truth.end());
  double lo = *mn, hi = *mx;
  const double span = hi - lo;
  if (span <= 0) return {lo - 1.0, hi + 1.0};
  return {lo - span, hi + span};
}

}  // namespace detail

/// Histograms of estimated and true parameters for each method's first seed.
inline void write_histograms_csv(std::ostream& out, const ExperimentConfig& cfg,
                                 const std::vector<CellResult>& cells) {
  out << "method,sigma_c,param,series,bin_lo,bin_hi,count\n";
  for (const auto& c : cells) {
    if (c.predictions.empty()) continue;
    for (int param = 0; param < 2; ++param) {
      std::vector<double> est, truth;
      for (const auto& p : c.predictions) {
        est.push_back(param == 0 ? p.estimate.theta0 : p.estimate.theta1);
        truth.push_back(param == 0 ? p.truth.theta0 : p.truth.theta1);
      }
      const auto& fixed = param == 0 ? cfg.histogram.theta0_range : cfg.histogram.theta1_range;
      const auto [lo, hi] = fixed ? *fixed : detail::auto_range(truth);
      for (const auto& [series, values] :
           {std::pair<const char*, const std::vector<double>*>{"estimate", &est}, {"truth", &truth}})
        for (const auto& b : histogram(*values, lo, hi, cfg.histogram.bins))
          out << to_string(c.method) << ',' << csv::format_double(c.sigma_c) << ','
              << (param == 0 ? "theta0" : "theta1") << ',' << series << ','
              << csv::format_double(b.lo) << ',' << csv::format_double(b.hi) << ',' << b.count
              << '\n';
    }
  }
}

inline void write_failures_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "method,sigma_c,seed,error\n";
  for (const auto& c : cells)
    if (!c.ok)
      out << to_string(c.method) << ',' << csv::format_double(c.sigma_c) << ',' << c.seed << ','
          << csv::quote(c.error) << '\n';
}

inline void emit_outputs(const BenchReport& rep, const ExperimentConfig& cfg,
                         const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, rep.summaries);
  }
  {
    auto f = open("timing.csv");
    write_timing_csv(f, rep.summaries);
  }
  {
    auto f = open("predictions.csv");
    write_predictions_csv(f, rep.cells);
  }
  {
    auto f = open("histograms.csv");
    write_histograms_csv(f, cfg, rep.cells);
  }
  {
    auto f = open("failures.csv");
    write_failures_csv(f, rep.cells);
  }
}

// ---------------------------------------------------------------------------
// Declarative config: one `key = value` per line, '#' starts a comment.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  const auto d = csv::parse_double(v);
  if (!d) throw Error(ErrorKind::InvalidConfig, key + ": expected a number, got '" + v + "'");
  return *d;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  const auto d = csv::parse_int(v);
  if (!d || *d < 0)
    throw Error(ErrorKind::InvalidConfig, key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::uint64_t>(*d);
}

/// "0..9" expands to 0,1,...,9; otherwise a comma list.
inline std::vector<std::uint64_t> parse_seeds(const std::string& v) {
  std::vector<std::uint64_t> out;
  const auto dots = v.find("..");
  if (dots != std::string::npos) {
    const auto a = to_uint("seeds", trim(v.substr(0, dots)));
    const auto b = to_uint("seeds", trim(v.substr(dots + 2)));
    if (b < a) throw Error(ErrorKind::InvalidConfig, "seeds: empty range");
    for (auto s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  for (const auto& s : split_list(v)) out.push_back(to_uint("seeds", s));
  return out;
}

}  // namespace detail

/// Applies one setting; throws InvalidConfig for unknown keys or bad values.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "world") {
    const World w = parse_world(value);
    const GenConfig old = cfg.gen;
    cfg.gen = w == World::Example1 ? GenConfig::example1(old.n_tasks, old.seed)
              : w == World::TwoPointProbe ? GenConfig::two_point_probe(old.k_obs, old.n_tasks, old.seed)
                                          : GenConfig::appendix_b(0.0, old.n_tasks, old.seed);
  } else if (key == "n_tasks") {
    cfg.gen.n_tasks = to_uint(key, value);
  } else if (key == "k_obs") {
    cfg.gen.k_obs = to_uint(key, value);
  } else if (key == "theta0_mean") {
    cfg.gen.theta0_mean = to_double(key, value);
  } else if (key == "theta1_mean") {
    cfg.gen.theta1_mean = to_double(key, value);
  } else if (key == "param_cv") {
    cfg.gen.param_cv = to_double(key, value);
  } else if (key == "demand_noise_cv") {
    cfg.gen.demand_noise_cv = to_double(key, value);
  } else if (key == "experiment_cv") {
    cfg.gen.experiment_cv = to_double(key, value);
  } else if (key == "price_noise_sd") {
    cfg.gen.price_noise_sd = to_double(key, value);
  } else if (key == "demand_noise_sd") {
    cfg.gen.demand_noise_sd = to_double(key, value);
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const auto& m : split_list(value)) cfg.methods.push_back(parse_method(m));
  } else if (key == "sigma_c") {
    cfg.sigma_c.clear();
    for (const auto& s : split_list(value)) cfg.sigma_c.push_back(to_double(key, s));
  } else if (key == "seeds") {
    cfg.seeds = parse_seeds(value);
  } else if (key == "jobs") {
    cfg.jobs = to_uint(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "train.preset") {
    const TrainConfig keep = cfg.train;
    if (value == "default") cfg.train = TrainConfig{};
    else if (value == "wide") cfg.train = TrainConfig::wide_synthetic();
    else if (value == "retail") cfg.train = TrainConfig::retail();
    else throw Error(ErrorKind::InvalidConfig, "train.preset: unknown preset '" + value + "'");
    cfg.train.seed = keep.seed;
  } else if (key == "train.learning_rate") {
    cfg.train.learning_rate = to_double(key, value);
  } else if (key == "train.batch_size") {
    cfg.train.batch_size = to_uint(key, value);
  } else if (key == "train.max_epochs") {
    cfg.train.max_epochs = to_uint(key, value);
  } else if (key == "train.patience") {
    cfg.train.patience = to_uint(key, value);
  } else if (key == "train.validation_fraction") {
    cfg.train.validation_fraction = to_double(key, value);
  } else if (key == "train.hidden_width") {
    cfg.train.hidden_width = to_uint(key, value);
  } else if (key == "train.depth") {
    cfg.train.depth = to_uint(key, value);
  } else if (key == "train.loss_mode") {
    if (value == "averaged") cfg.train.loss_mode = LossMode::Averaged;
    else if (value == "sampled") cfg.train.loss_mode = LossMode::Sampled;
    else throw Error(ErrorKind::InvalidConfig, "train.loss_mode: expected averaged or sampled");
  } else if (key == "eb.diagonal") {
    if (value != "true" && value != "false")
      throw Error(ErrorKind::InvalidConfig, "eb.diagonal: expected true or false");
    cfg.eb.diagonal = value == "true";
  } else if (key == "eb.method") {
    if (value == "em") cfg.eb.method = EbMethod::EM;
    else if (value == "moments") cfg.eb.method = EbMethod::Moments;
    else throw Error(ErrorKind::InvalidConfig, "eb.method: expected em or moments");
  } else if (key == "histogram.bins") {
    cfg.histogram.bins = to_uint(key, value);
  } else if (key == "histogram.theta0_range" || key == "histogram.theta1_range") {
    const auto parts = split_list(value);
    if (parts.size() != 2) throw Error(ErrorKind::InvalidConfig, key + ": expected lo,hi");
    const std::pair<double, double> r{to_double(key, parts[0]), to_double(key, parts[1])};
    (key == "histogram.theta0_range" ? cfg.histogram.theta0_range : cfg.histogram.theta1_range) = r;
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
  }
}

inline ExperimentConfig parse_experiment_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    const std::string body = detail::trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidConfig, "config line " + std::to_string(row) + ": expected key = value");
    apply_setting(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace mtdemand
