#pragma once

// Structural linear demand model and the synthetic worlds used throughout:
//   Example1        near-optimal pricing with intercept heterogeneity only
//   AppendixB       manager with a noisy optimal-price signal (confounding knob)
//   TwoPointProbe   adaptive finite-difference pricing ending in a probe pair

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtdemand/error.hpp"
#include "mtdemand/rng.hpp"

namespace mtdemand {

/// Intercept and slope of one task's linear demand curve.
struct DemandParams {
  double theta0 = 0.0;
  double theta1 = 0.0;

  friend bool operator==(const DemandParams&, const DemandParams&) = default;
};

struct TaskPanel {
  std::int64_t task_id = 0;
  std::vector<double> context;
  std::vector<double> prices;
  std::vector<double> demands;
  std::optional<std::vector<int>> exposures;
  std::optional<DemandParams> true_params;

  std::size_t size() const { return prices.size(); }

  friend bool operator==(const TaskPanel&, const TaskPanel&) = default;
};

/// Throws InvalidConfig unless prices/demands/exposures are consistent.
inline void validate_panel(const TaskPanel& panel) {
  if (panel.prices.size() < 2)
    throw Error(ErrorKind::InvalidConfig, "panel needs at least two observations");
  if (panel.demands.size() != panel.prices.size())
    throw Error(ErrorKind::InvalidConfig, "prices and demands differ in length");
  if (panel.exposures) {
    if (panel.exposures->size() != panel.prices.size())
      throw Error(ErrorKind::InvalidConfig, "exposures differ in length");
    for (int e : *panel.exposures)
      if (e < 1) throw Error(ErrorKind::InvalidConfig, "exposure below 1");
  }
}

enum class World { Example1, AppendixB, TwoPointProbe };

inline std::string_view to_string(World w) {
  switch (w) {
    case World::Example1: return "example1";
    case World::AppendixB: return "appendix-b";
    case World::TwoPointProbe: return "two-point-probe";
  }
  return "?";
}

inline World parse_world(std::string_view s) {
  if (s == "example1") return World::Example1;
  if (s == "appendix-b" || s == "appendix_b" || s == "appendixb") return World::AppendixB;
  if (s == "two-point-probe" || s == "two_point_probe") return World::TwoPointProbe;
  throw Error(ErrorKind::InvalidConfig, "unknown world '" + std::string(s) + "'");
}

struct GenConfig {
  std::size_t n_tasks = 1000;
  std::size_t k_obs = 2;
  double theta0_mean = 1.0;
  double theta1_mean = -1.0;
  double param_cv = 0.1;
  double demand_noise_cv = 0.1;
  double confound_sigma = 0.0;
  double experiment_cv = 0.1;
  // Example1 uses absolute noise scales instead of CVs.
  double price_noise_sd = 0.25;
  double demand_noise_sd = 1.0;
  // TwoPointProbe policy constants.
  double probe_delta = 0.05;
  double probe_step = 0.1;
  World world = World::AppendixB;
  std::uint64_t seed = 0;

  /// Fig. 1 world: theta0 ~ N(10, 1), theta1 = -1, pricing noise sd 0.25,
  /// demand noise sd 1.
  static GenConfig example1(std::size_t n_tasks = 2000, std::uint64_t seed = 0) {
    GenConfig c;
    c.world = World::Example1;
    c.n_tasks = n_tasks;
    c.k_obs = 2;
    c.theta0_mean = 10.0;
    c.theta1_mean = -1.0;
    c.param_cv = 0.1;
    c.seed = seed;
    return c;
  }

  static GenConfig appendix_b(double sigma_c, std::size_t n_tasks = 5000, std::uint64_t seed = 0) {
    GenConfig c;
    c.world = World::AppendixB;
    c.n_tasks = n_tasks;
    c.confound_sigma = sigma_c;
    c.seed = seed;
    return c;
  }

  static GenConfig two_point_probe(std::size_t k_obs = 6, std::size_t n_tasks = 5000,
                                   std::uint64_t seed = 0) {
    GenConfig c;
    c.world = World::TwoPointProbe;
    c.n_tasks = n_tasks;
    c.k_obs = k_obs;
    c.confound_sigma = 0.1;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (n_tasks < 1) throw Error(ErrorKind::InvalidConfig, "n_tasks must be >= 1");
    if (k_obs < 2) throw Error(ErrorKind::InvalidConfig, "k_obs must be >= 2");
    if (param_cv < 0 || demand_noise_cv < 0 || experiment_cv < 0)
      throw Error(ErrorKind::InvalidConfig, "coefficients of variation must be >= 0");
    if (confound_sigma < 0) throw Error(ErrorKind::InvalidConfig, "confound_sigma must be >= 0");
    if (price_noise_sd < 0 || demand_noise_sd < 0)
      throw Error(ErrorKind::InvalidConfig, "noise scales must be >= 0");
    if (probe_delta < 0 || probe_step < 0)
      throw Error(ErrorKind::InvalidConfig, "probe constants must be >= 0");
  }
};

/// Revenue-maximizing price -theta0 / (2 theta1).
inline double optimal_price(const DemandParams& params) {
  if (!(params.theta1 < 0.0))
    throw Error(ErrorKind::NonNegativeSlope, "revenue is unbounded for theta1 >= 0");
  return -params.theta0 / (2.0 * params.theta1);
}

inline double mean_demand(const DemandParams& params, double price) {
  return params.theta0 + params.theta1 * price;
}

namespace detail {

// theta0 ~ N(m0, (cv m0)^2), theta1 ~ N(m1, (cv m1)^2); theta1 is redrawn until
// negative so the optimal price exists (probability ~1e-23 at cv = 0.1).
inline DemandParams draw_params(const GenConfig& c, Rng& rng) {
  DemandParams p;
  p.theta0 = rng.normal(c.theta0_mean, c.param_cv * std::abs(c.theta0_mean));
  do {
    p.theta1 = rng.normal(c.theta1_mean, c.param_cv * std::abs(c.theta1_mean));
  } while (!(p.theta1 < 0.0));
  return p;
}

// Multiplicative noise: sd = cv * |mean demand|, exactly zero at zero mean.
inline double noisy_demand(const GenConfig& c, const DemandParams& p, double price, Rng& rng) {
  const double m = mean_demand(p, price);
  return m + c.demand_noise_cv * std::abs(m) * rng.normal();
}

inline TaskPanel make_panel(std::int64_t id, const DemandParams& p) {
  TaskPanel panel;
  panel.task_id = id;
  panel.true_params = p;
  return panel;
}

inline void require_world(const GenConfig& c, World w) {
  c.validate();
  if (c.world != w)
    throw Error(ErrorKind::InvalidConfig,
                "generator for " + std::string(to_string(w)) + " called with world " +
                    std::string(to_string(c.world)));
}

}  // namespace detail

inline TaskPanel generate_example1_task(const GenConfig& c, std::int64_t task_id) {
  Rng rng = Rng::stream(c.seed, StreamDomain::Generate, static_cast<std::uint64_t>(task_id));
  DemandParams p;
  p.theta0 = rng.normal(c.theta0_mean, c.param_cv * std::abs(c.theta0_mean));
  p.theta1 = c.theta1_mean;
  const double p_star = optimal_price(p);
  TaskPanel panel = detail::make_panel(task_id, p);
  for (std::size_t k = 0; k < c.k_obs; ++k) {
    const double price = p_star + c.price_noise_sd * rng.normal();
    panel.prices.push_back(price);
    panel.demands.push_back(mean_demand(p, price) + c.demand_noise_sd * rng.normal());
  }
  return panel;
}

inline TaskPanel generate_appendix_b_task(const GenConfig& c, std::int64_t task_id) {
  Rng rng = Rng::stream(c.seed, StreamDomain::Generate, static_cast<std::uint64_t>(task_id));
  const DemandParams p = detail::draw_params(c, rng);
  const double p_star = optimal_price(p);
  const double signal = p_star + c.confound_sigma * std::abs(p_star) * rng.normal();
  TaskPanel panel = detail::make_panel(task_id, p);
  for (std::size_t k = 0; k < c.k_obs; ++k) {
    const double price = signal + c.experiment_cv * std::abs(signal) * rng.normal();
    panel.prices.push_back(price);
    panel.demands.push_back(detail::noisy_demand(c, p, price, rng));
  }
  return panel;
}

/// Adaptive two-point experimentation. The incumbent starts at a noisy signal
/// of the optimal price and moves by a finite-difference revenue-gradient step
/// after each probe block. The final block (p_hat +- delta, order chosen by a
/// coin) depends only on earlier blocks and the latent parameters, never on
/// its own demand draws. With odd K the first period is a plain observation
/// at the initial incumbent.
inline TaskPanel generate_two_point_probe_task(const GenConfig& c, std::int64_t task_id) {
  Rng rng = Rng::stream(c.seed, StreamDomain::Generate, static_cast<std::uint64_t>(task_id));
  const DemandParams p = detail::draw_params(c, rng);
  const double p_star = optimal_price(p);
  double incumbent = p_star + c.confound_sigma * std::abs(p_star) * rng.normal();
  TaskPanel panel = detail::make_panel(task_id, p);
  auto observe = [&](double price) {
    const double d = detail::noisy_demand(c, p, price, rng);
    panel.prices.push_back(price);
    panel.demands.push_back(d);
    return d;
  };
  if (c.k_obs % 2 == 1) observe(incumbent);
  const std::size_t blocks = c.k_obs / 2;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double sign = rng.coin() ? 1.0 : -1.0;
    const double first = incumbent + sign * c.probe_delta;
    const double second = incumbent - sign * c.probe_delta;
    const double d_first = observe(first);
    const double d_second = observe(second);
    if (b + 1 < blocks && c.probe_delta > 0.0) {
      const double r_up = sign > 0 ? first * d_first : second * d_second;
      const double r_down = sign > 0 ? second * d_second : first * d_first;
      incumbent += c.probe_step * (r_up - r_down) / (2.0 * c.probe_delta);
    }
  }
  return panel;
}

inline std::vector<TaskPanel> generate_example1(const GenConfig& c) {
  detail::require_world(c, World::Example1);
  std::vector<TaskPanel> out;
  out.reserve(c.n_tasks);
  for (std::size_t i = 0; i < c.n_tasks; ++i)
    out.push_back(generate_example1_task(c, static_cast<std::int64_t>(i)));
  return out;
}

inline std::vector<TaskPanel> generate_appendix_b(const GenConfig& c) {
  detail::require_world(c, World::AppendixB);
  std::vector<TaskPanel> out;
  out.reserve(c.n_tasks);
  for (std::size_t i = 0; i < c.n_tasks; ++i)
    out.push_back(generate_appendix_b_task(c, static_cast<std::int64_t>(i)));
  return out;
}

inline std::vector<TaskPanel> generate_two_point_probe(const GenConfig& c) {
  detail::require_world(c, World::TwoPointProbe);
  std::vector<TaskPanel> out;
  out.reserve(c.n_tasks);
  for (std::size_t i = 0; i < c.n_tasks; ++i)
    out.push_back(generate_two_point_probe_task(c, static_cast<std::int64_t>(i)));
  return out;
}

inline std::vector<TaskPanel> generate(const GenConfig& c) {
  switch (c.world) {
    case World::Example1: return generate_example1(c);
    case World::AppendixB: return generate_appendix_b(c);
    case World::TwoPointProbe: return generate_two_point_probe(c);
  }
  return {};
}

}  // namespace mtdemand
