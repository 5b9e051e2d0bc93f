#pragma once

// Numerical checks of the identification machinery: the conditional second
// moment Q of the query regressor, its eigenvalue bound, the excess-risk
// identity L(g) - L(g*) = E[Delta' Q Delta], the Gaussian Bayes oracle for the
// Example1 world, and the orthogonal-shift degeneracy of the DCML objective.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/meta.hpp"
#include "mtdemand/rng.hpp"
#include "mtdemand/stats.hpp"

namespace mtdemand {

// ---------------------------------------------------------------------------
// Q matrix.

/// Q = w_a P_a P_a' + w_b P_b P_b' with P = (1, p)'. Held in mixture form so
/// that det = w_a w_b (p_a - p_b)^2 is exact even for tiny price gaps.
struct QMatrix {
  double p_a = 0.0;
  double p_b = 0.0;
  double w_a = 0.5;
  double w_b = 0.5;

  double p_bar() const { return 0.5 * (p_a + p_b); }
  double delta() const { return std::abs(p_a - p_b); }

  double q00() const { return w_a + w_b; }
  double q01() const { return w_a * p_a + w_b * p_b; }
  double q11() const { return w_a * p_a * p_a + w_b * p_b * p_b; }

  Eigen::Matrix2d entries() const {
    Eigen::Matrix2d q;
    q << q00(), q01(), q01(), q11();
    return q;
  }

  double det() const { return w_a * w_b * (p_a - p_b) * (p_a - p_b); }
  double trace() const { return q00() + q11(); }
};

inline QMatrix q_matrix(double p_a, double p_b) { return QMatrix{p_a, p_b, 0.5, 0.5}; }

/// Var(p_{k1} | prices) for a uniform draw of k1 from two prices.
inline double query_price_variance(double p_a, double p_b) {
  return 0.25 * (p_a - p_b) * (p_a - p_b);
}

struct EigenBound {
  double lambda_min = 0.0;
  double bound = 0.0;
};

inline EigenBound lambda_min_and_bound(const QMatrix& q) {
  const double half_tr = 0.5 * q.trace();
  const double det = q.det();
  const double lambda_max = half_tr + std::sqrt(std::max(0.0, half_tr * half_tr - det));
  EigenBound r;
  r.lambda_min = lambda_max > 0 ? det / lambda_max : 0.0;
  const double d2 = q.delta() * q.delta();
  const double denom = 4.0 * (1.0 + q.p_bar() * q.p_bar()) + d2;
  r.bound = d2 / denom;
  return r;
}

// ---------------------------------------------------------------------------
// Gaussian Bayes oracle.

/// Linear-Gaussian model of the Example1 world. Every variable is an affine
/// function of independent standard normals (theta0 draw, K pricing noises, K
/// demand noises); E[theta0 | observed] follows from Gaussian conditioning.
/// The slope is degenerate at theta1_mean.
class GaussianOracle {
 public:
  explicit GaussianOracle(const GenConfig& c) : k_(c.k_obs), theta1_(c.theta1_mean) {
    if (c.world != World::Example1)
      throw Error(ErrorKind::OracleUnavailable, "Gaussian oracle needs the Example1 world");
    if (!(c.theta1_mean < 0))
      throw Error(ErrorKind::NonNegativeSlope, "oracle needs a negative slope");
    const auto K = static_cast<Eigen::Index>(k_);
    const Eigen::Index latent = 1 + 2 * K;
    mean_.resize(1 + 2 * K);
    load_ = Eigen::MatrixXd::Zero(1 + 2 * K, latent);
    const double m0 = c.theta0_mean;
    const double s0 = c.param_cv * std::abs(m0);
    const double m1 = c.theta1_mean;
    const double r = -1.0 / (2.0 * m1);  // p* = r theta0
    mean_(0) = m0;
    load_(0, 0) = s0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::Index p = price_var(k), d = demand_var(k);
      mean_(p) = r * m0;
      load_(p, 0) = r * s0;
      load_(p, 1 + k) = c.price_noise_sd;
      mean_(d) = m0 + m1 * mean_(p);
      load_.row(d) = load_.row(0) + m1 * load_.row(p);
      load_(d, 1 + K + k) = c.demand_noise_sd;
    }
  }

  /// E[Theta | p_1..p_K]: the DCMOML target for K = 2.
  DemandParams given_prices(const std::vector<double>& prices) const {
    std::vector<std::pair<Eigen::Index, double>> obs;
    for (std::size_t k = 0; k < prices.size(); ++k)
      obs.emplace_back(price_var(static_cast<Eigen::Index>(k)), prices[k]);
    return condition(obs);
  }

  /// E[Theta | p_1..p_m, D_1..D_m]: the META target.
  DemandParams given_support(const std::vector<double>& prices,
                             const std::vector<double>& demands) const {
    std::vector<std::pair<Eigen::Index, double>> obs;
    for (std::size_t k = 0; k < prices.size(); ++k)
      obs.emplace_back(price_var(static_cast<Eigen::Index>(k)), prices[k]);
    for (std::size_t k = 0; k < demands.size(); ++k)
      obs.emplace_back(demand_var(static_cast<Eigen::Index>(k)), demands[k]);
    return condition(obs);
  }

  DemandParams predict(const MaskedInfoSet& info) const {
    if (info.design == Design::DCUOML)
      throw Error(ErrorKind::OracleUnavailable, "DCUOML conditioning is not Gaussian");
    if (info.k_obs != k_) throw Error(ErrorKind::DimensionMismatch, "oracle built for another K");
    std::vector<std::pair<Eigen::Index, double>> obs;
    for (std::size_t k = 0; k < info.prices.size(); ++k)
      obs.emplace_back(price_var(static_cast<Eigen::Index>(k)), info.prices[k]);
    for (const auto& [k, d] : info.visible_demands)
      obs.emplace_back(demand_var(static_cast<Eigen::Index>(k)), d);
    return condition(obs);
  }

 private:
  Eigen::Index price_var(Eigen::Index k) const { return 1 + k; }
  Eigen::Index demand_var(Eigen::Index k) const { return 1 + static_cast<Eigen::Index>(k_) + k; }

  DemandParams condition(const std::vector<std::pair<Eigen::Index, double>>& obs) const {
    if (obs.empty()) return {mean_(0), theta1_};
    const auto n = static_cast<Eigen::Index>(obs.size());
    Eigen::MatrixXd ls(n, load_.cols());
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ls.row(i) = load_.row(obs[static_cast<std::size_t>(i)].first);
      resid(i) = obs[static_cast<std::size_t>(i)].second - mean_(obs[static_cast<std::size_t>(i)].first);
    }
    const Eigen::MatrixXd s_oo = ls * ls.transpose();
    const Eigen::RowVectorXd s_to = load_.row(0) * ls.transpose();
    // Pseudo-inverse solve keeps the noiseless-pricing limit well defined.
    const Eigen::VectorXd w = s_oo.completeOrthogonalDecomposition().solve(resid);
    return {mean_(0) + s_to.dot(w), theta1_};
  }

  std::size_t k_;
  double theta1_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd load_;
};

/// Computable conditional-mean targets: the Gaussian oracle for Example1, and
/// the constant Theta when parameters do not vary across tasks.
inline ParamPredictor oracle_for(const GenConfig& c) {
  if (c.world == World::Example1) {
    GaussianOracle o(c);
    return [o](const MaskedInfoSet& info) { return o.predict(info); };
  }
  if (c.param_cv == 0.0) {
    const DemandParams theta{c.theta0_mean, c.theta1_mean};
    return [theta](const MaskedInfoSet&) { return theta; };
  }
  throw Error(ErrorKind::OracleUnavailable,
              "no closed-form conditional mean for world " + std::string(to_string(c.world)));
}

// ---------------------------------------------------------------------------
// Excess-risk identity.

namespace detail {

inline double sq_error(const TaskPanel& p, std::size_t k, const DemandParams& t) {
  const double r = p.demands[k] - t.theta0 - t.theta1 * p.prices[k];
  return r * r;
}

inline double quad_form(const QMatrix& q, const DemandParams& g, const DemandParams& gs) {
  const Eigen::Vector2d d(g.theta0 - gs.theta0, g.theta1 - gs.theta1);
  return d.dot(q.entries() * d);
}

}  // namespace detail

struct ExcessRiskResult {
  MeanSe lhs;
  MeanSe rhs;
  MeanSe difference;  // paired per-task lhs - rhs
  double combined_se = 0.0;

  bool within(double z) const { return std::abs(lhs.mean - rhs.mean) <= z * combined_se; }
};

/// Monte Carlo check on DCMOML information sets: lhs draws a fresh query
/// index per task, rhs evaluates Delta' Q Delta with Q from the two candidate
/// prices. combined_se is the standard error of the paired difference.
inline ExcessRiskResult excess_risk_check(const ParamPredictor& g, const ParamPredictor& g_star,
                                          const std::vector<TaskPanel>& panels,
                                          std::uint64_t seed, Design design = Design::DCMOML) {
  if (design != Design::DCMOML && design != Design::DCML)
    throw Error(ErrorKind::InvalidConfig, "excess-risk check supports DCMOML and DCML");
  std::vector<double> lhs, rhs, diff;
  lhs.reserve(panels.size());
  rhs.reserve(panels.size());
  for (const auto& p : panels) {
    Rng rng = Rng::stream(seed, StreamDomain::Evaluate, static_cast<std::uint64_t>(p.task_id));
    const QueryAssignment a =
        design == Design::DCMOML ? assign_query(p.prices, rng) : final_index_assignment(p);
    const MaskedInfoSet info = build_info_set(p, design, a);
    const DemandParams gh = g(info);
    const DemandParams gs = g_star(info);
    const double l = detail::sq_error(p, a.k_query, gh) - detail::sq_error(p, a.k_query, gs);
    const QMatrix q = design == Design::DCMOML
                          ? q_matrix(p.prices[a.k_star], p.prices.back())
                          : QMatrix{p.prices.back(), p.prices.back(), 0.5, 0.5};
    const double r = detail::quad_form(q, gh, gs);
    lhs.push_back(l);
    rhs.push_back(r);
    diff.push_back(l - r);
  }
  ExcessRiskResult out{mean_se(lhs), mean_se(rhs), mean_se(diff), 0.0};
  out.combined_se = out.difference.se;
  return out;
}

struct SampleIdentity {
  double lhs = 0.0;  // averaged-loss excess of g over g_star
  double rhs = 0.0;  // (1/N) sum Delta_i' Q_i Delta_i
  double max_task_gap = 0.0;
};

/// Averaged DCMOML loss difference vs the quadratic form, per sample. Exact
/// (up to rounding) on noiseless data.
inline SampleIdentity excess_risk_sample(const ParamPredictor& g, const ParamPredictor& g_star,
                                         const std::vector<TaskPanel>& panels) {
  SampleIdentity s;
  for (const auto& p : panels) {
    const QueryAssignment a = final_index_assignment(p);
    QueryAssignment full = a;
    full.k_star = find_penultimate_index(p.prices);
    const MaskedInfoSet info = build_info_set(p, Design::DCMOML, full);
    const DemandParams gh = g(info);
    const DemandParams gs = g_star(info);
    const std::size_t ks = full.k_star, kl = p.size() - 1;
    const double l = 0.5 * (detail::sq_error(p, ks, gh) + detail::sq_error(p, kl, gh)) -
                     0.5 * (detail::sq_error(p, ks, gs) + detail::sq_error(p, kl, gs));
    const double r = detail::quad_form(q_matrix(p.prices[ks], p.prices[kl]), gh, gs);
    s.lhs += l;
    s.rhs += r;
    s.max_task_gap = std::max(s.max_task_gap, std::abs(l - r));
  }
  s.lhs /= static_cast<double>(panels.size());
  s.rhs /= static_cast<double>(panels.size());
  return s;
}

// ---------------------------------------------------------------------------
// Orthogonal shift along (p_K, -1).

using ShiftFunction = std::function<double(const MaskedInfoSet&)>;

struct ShiftResult {
  double loss_original = 0.0;
  double loss_shifted = 0.0;

  double relative_gap() const {
    const double scale = std::max(std::abs(loss_original), std::numeric_limits<double>::min());
    return std::abs(loss_shifted - loss_original) / scale;
  }
};

inline DemandParams shift_along_final_price(const DemandParams& t, double phi, double p_final) {
  return {t.theta0 + phi * p_final, t.theta1 - phi};
}

/// DCML loss (D_K - P_K' theta)^2 before and after theta += phi(X) (p_K, -1).
/// P_K is orthogonal to the shift direction, so the losses agree exactly.
inline ShiftResult dcml_shift_demo(const ParamPredictor& g, const std::vector<TaskPanel>& panels,
                                   const ShiftFunction& phi) {
  ShiftResult r;
  for (const auto& p : panels) {
    const QueryAssignment a = final_index_assignment(p);
    const MaskedInfoSet info = build_info_set(p, Design::DCML, a);
    const DemandParams t = g(info);
    const std::size_t last = p.size() - 1;
    r.loss_original += detail::sq_error(p, last, t);
    r.loss_shifted += detail::sq_error(p, last, shift_along_final_price(t, phi(info), p.prices[last]));
  }
  r.loss_original /= static_cast<double>(panels.size());
  r.loss_shifted /= static_cast<double>(panels.size());
  return r;
}

/// The same shift under the averaged DCMOML loss. The query price is hidden,
/// so the shift also moves the prediction at p_{K*} and the loss grows by
/// (1/N) sum phi^2 (p_K - p_{K*})^2 / 2 plus a residual cross term.
inline ShiftResult dcmoml_shift_demo(const ParamPredictor& g, const std::vector<TaskPanel>& panels,
                                     const ShiftFunction& phi) {
  ShiftResult r;
  for (const auto& p : panels) {
    QueryAssignment a = final_index_assignment(p);
    a.k_star = find_penultimate_index(p.prices);
    const MaskedInfoSet info = build_info_set(p, Design::DCMOML, a);
    const DemandParams t = g(info);
    const std::size_t last = p.size() - 1;
    const DemandParams s = shift_along_final_price(t, phi(info), p.prices[last]);
    r.loss_original += 0.5 * (detail::sq_error(p, a.k_star, t) + detail::sq_error(p, last, t));
    r.loss_shifted += 0.5 * (detail::sq_error(p, a.k_star, s) + detail::sq_error(p, last, s));
  }
  r.loss_original /= static_cast<double>(panels.size());
  r.loss_shifted /= static_cast<double>(panels.size());
  return r;
}

struct NamedShift {
  std::string name;
  ShiftFunction phi;
};

/// Three distinct shift families, each a function of the first two prices.
inline std::vector<NamedShift> standard_shift_families() {
  return {
      {"constant", [](const MaskedInfoSet&) { return 1.0; }},
      {"p1_squared", [](const MaskedInfoSet& x) { return x.prices.at(0) * x.prices.at(0); }},
      {"one_plus_tanh_gap",
       [](const MaskedInfoSet& x) { return 1.0 + std::tanh(x.prices.at(0) - x.prices.at(1)); }},
  };
}

// ---------------------------------------------------------------------------
// Query randomization.

struct QueryLaw {
  MeanSe hit_k_star;      // indicator k_query == k_star
  MeanSe averaged_loss;   // per-task averaged loss
  MeanSe sampled_loss;    // per-task loss at the drawn index
  MeanSe difference;      // paired sampled - averaged
};

inline QueryLaw query_randomization_law(const ParamPredictor& g,
                                        const std::vector<TaskPanel>& panels,
                                        std::uint64_t seed) {
  std::vector<double> hit, avg, smp, diff;
  for (const auto& p : panels) {
    const QueryAssignment a = assign_query(p, seed);
    hit.push_back(a.k_query == a.k_star ? 1.0 : 0.0);
    const DemandParams t = g(build_info_set(p, Design::DCMOML, a));
    const double la = 0.5 * (detail::sq_error(p, a.k_star, t) + detail::sq_error(p, p.size() - 1, t));
    const double ls = detail::sq_error(p, a.k_query, t);
    avg.push_back(la);
    smp.push_back(ls);
    diff.push_back(ls - la);
  }
  return {mean_se(hit), mean_se(avg), mean_se(smp), mean_se(diff)};
}

// ---------------------------------------------------------------------------
// Assumption 1 on the two-point probe policy (necessary condition only).

struct NoiseBin {
  int final_sign = 0;     // sign of p_K - p_{K-1}
  int incumbent_bin = 0;  // quartile of the final-block midpoint
  std::size_t index = 0;  // 0-based observation index examined
  MeanSe noise;
};

struct Assumption1Result {
  std::vector<NoiseBin> bins;
  double max_abs_z = 0.0;
  bool pass = true;
};

/// Bins tasks by the final probe direction and the quartile of the final
/// incumbent and tests that the demand noise at the last two indices has mean
/// zero in every bin (|mean| < z SE).
inline Assumption1Result assumption1_check(const std::vector<TaskPanel>& panels, double z = 3.0) {
  if (panels.empty()) throw Error(ErrorKind::EmptyInput, "no panels");
  std::vector<double> mid;
  for (const auto& p : panels) {
    if (!p.true_params) throw Error(ErrorKind::OracleUnavailable, "panels lack true parameters");
    mid.push_back(0.5 * (p.prices[p.size() - 2] + p.prices.back()));
  }
  std::vector<double> sorted = mid;
  std::sort(sorted.begin(), sorted.end());
  const auto q = [&](double f) {
    return sorted[static_cast<std::size_t>(f * static_cast<double>(sorted.size() - 1))];
  };
  const double cuts[3] = {q(0.25), q(0.5), q(0.75)};
  Assumption1Result out;
  const std::size_t K = panels.front().size();
  for (std::size_t index : {K - 2, K - 1})
    for (int sign : {-1, 1})
      for (int bin = 0; bin < 4; ++bin) {
        std::vector<double> eps;
        for (std::size_t i = 0; i < panels.size(); ++i) {
          const auto& p = panels[i];
          const int s = p.prices.back() > p.prices[K - 2] ? 1 : -1;
          const int b = static_cast<int>(std::upper_bound(cuts, cuts + 3, mid[i]) - cuts);
          if (s != sign || b != bin) continue;
          eps.push_back(p.demands[index] - mean_demand(*p.true_params, p.prices[index]));
        }
        NoiseBin nb{sign, bin, index, mean_se(eps)};
        if (nb.noise.n >= 2 && nb.noise.se > 0) {
          const double zz = std::abs(nb.noise.mean) / nb.noise.se;
          out.max_abs_z = std::max(out.max_abs_z, zz);
          if (zz >= z) out.pass = false;
        }
        out.bins.push_back(nb);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Suite.

struct CheckResult {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

inline nlohmann::json to_json(const CheckResult& c) {
  return {{"check", c.check}, {"lhs", c.lhs},   {"rhs", c.rhs},
          {"tolerance", c.tolerance}, {"pass", c.pass}, {"note", c.note}};
}

struct TheoryReport {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.check == name) return &c;
    return nullptr;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["pass"] = all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(mtdemand::to_json(c));
    return j;
  }
};

struct TheorySuiteConfig {
  std::uint64_t seed = 20240601;
  std::size_t eigen_draws = 100000;
  std::size_t mc_tasks = 100000;
  std::size_t fit_tasks = 2000;
  std::size_t probe_tasks = 100000;
  /// Injection point for mutation tests.
  std::function<QMatrix(double, double)> q_builder = q_matrix;
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct EigenSweep {
  std::size_t violations = 0;
  std::size_t invariant_failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min (lambda_min - bound)
};

inline EigenSweep eigen_sweep(const TheorySuiteConfig& cfg) {
  Rng rng = Rng::stream(cfg.seed, StreamDomain::Evaluate, 1);
  EigenSweep s;
  for (std::size_t i = 0; i < cfg.eigen_draws; ++i) {
    const double pa = rng.uniform(-10.0, 10.0);
    const double pb = rng.uniform(-10.0, 10.0);
    if (pa == pb) continue;
    const QMatrix q = cfg.q_builder(pa, pb);
    const double d2 = (pa - pb) * (pa - pb);
    const double scale = q.q00() * q.q11() + q.q01() * q.q01();
    if (q.q00() != 1.0 || std::abs(q.det() - 0.25 * d2) > 16 * 2.2e-16 * std::max(scale, 1.0))
      ++s.invariant_failures;
    const EigenBound eb = lambda_min_and_bound(q);
    // Bound evaluated from the true prices, independent of the builder.
    const double bound = d2 / (4.0 * (1.0 + 0.25 * (pa + pb) * (pa + pb)) + d2);
    if (!(eb.lambda_min > bound)) ++s.violations;
    s.worst_margin = std::min(s.worst_margin, eb.lambda_min - bound);
  }
  return s;
}

}  // namespace detail

inline TheoryReport run_theory_suite(const TheorySuiteConfig& cfg = {}) {
  TheoryReport rep;
  auto add = [&](CheckResult c) { rep.checks.push_back(std::move(c)); };

  {
    const QMatrix q = cfg.q_builder(0.0, 2.0);
    const bool ok = q.q00() == 1.0 && q.q01() == 1.0 && q.q11() == 2.0 &&
                    std::abs(q.det() - 1.0) < 1e-15 && std::abs(q.trace() - 3.0) < 1e-15;
    add({"q_matrix_example", q.det(), 1.0, 1e-15, ok, "Q(0,2) = [[1,1],[1,2]], det 1, trace 3"});
  }
  {
    const EigenBound eb = lambda_min_and_bound(cfg.q_builder(0.0, 2.0));
    const double exact = (3.0 - std::sqrt(5.0)) / 2.0;
    add({"eigen_exact_0_2", eb.lambda_min, exact, 1e-12,
         std::abs(eb.lambda_min - exact) < 1e-12 && std::abs(eb.bound - 1.0 / 3.0) < 1e-15,
         "bound at (0,2) is 1/3"});
  }
  {
    const auto s = detail::eigen_sweep(cfg);
    add({"eigen_bound_random", static_cast<double>(s.violations + s.invariant_failures), 0.0, 0.0,
         s.violations == 0 && s.invariant_failures == 0,
         "violations of lambda_min > bound plus Q invariant failures over " +
             std::to_string(cfg.eigen_draws) + " draws; worst margin " +
             detail::sci(s.worst_margin)});
  }
  {
    // Two-point mixture variance: empirical variance of the drawn query price.
    const std::vector<double> prices{1.0, 2.0};
    Rng rng = Rng::stream(cfg.seed, StreamDomain::Evaluate, 2);
    std::vector<double> draws;
    for (std::size_t i = 0; i < cfg.mc_tasks; ++i) draws.push_back(prices[assign_query(prices, rng).k_query]);
    const MeanSe m = mean_se(draws);
    double ss = 0;
    for (double d : draws) ss += (d - m.mean) * (d - m.mean);
    const double var = ss / static_cast<double>(draws.size());
    const double tol = 3.0 * 0.25 * 2.0 / std::sqrt(static_cast<double>(draws.size()));
    add({"two_point_query_variance", var, query_price_variance(1.0, 2.0), tol,
         std::abs(var - 0.25) < tol, "Var(p_k1 | prices (1,2)) = 1/4"});
  }

  const GenConfig e1_train = GenConfig::example1(cfg.fit_tasks, cfg.seed);
  const auto train_panels = generate(e1_train);
  const SymmetricLinearModel sym = symmetric_linear_fit(train_panels);
  const ParamPredictor g_sym = [sym](const MaskedInfoSet& x) { return sym.predict(x); };
  const ParamPredictor oracle = oracle_for(e1_train);
  const auto mc_panels = generate(GenConfig::example1(cfg.mc_tasks, cfg.seed + 1));

  {
    GenConfig flat = GenConfig::appendix_b(0.1, 2000, cfg.seed + 2);
    flat.param_cv = 0.0;
    flat.demand_noise_cv = 0.0;
    const auto panels = generate(flat);
    const ParamPredictor g_star = oracle_for(flat);
    const ParamPredictor g = [](const MaskedInfoSet& x) {
      return DemandParams{1.0 + 0.3 + 0.1 * x.prices[0], -1.0 - 0.2 + 0.05 * x.prices[1]};
    };
    const SampleIdentity s = excess_risk_sample(g, g_star, panels);
    const ParamPredictor offset = [](const MaskedInfoSet&) { return DemandParams{1.25, -1.5}; };
    const SampleIdentity so = excess_risk_sample(offset, g_star, panels);
    const bool ok = std::abs(s.lhs - s.rhs) < 1e-10 && s.max_task_gap < 1e-10 &&
                    std::abs(so.lhs - so.rhs) < 1e-10;
    add({"excess_risk_noiseless_exact", s.lhs, s.rhs, 1e-10, ok,
         "sample-level identity on a noiseless constant-Theta world"});
  }
  {
    const ExcessRiskResult r = excess_risk_check(g_sym, oracle, mc_panels, cfg.seed + 3);
    add({"excess_risk_example1_mc", r.lhs.mean, r.rhs.mean, 3.0 * r.combined_se, r.within(3.0),
         "symmetric-linear fit vs Gaussian oracle over " + std::to_string(mc_panels.size()) +
             " tasks; tolerance is 3 SE of the paired difference"});
  }
  {
    const GaussianOracle o(e1_train);
    const DemandParams t = o.given_prices({5.0, 5.0});
    add({"oracle_prior_mean_input", t.theta0, 10.0, 1e-12, std::abs(t.theta0 - 10.0) < 1e-12,
         "E[theta0 | p = (5,5)] equals the prior mean"});
  }
  {
    TrainingSet set = build_training_set(train_panels, Design::DCML, LossMode::Averaged, cfg.seed);
    const AffineMetaModel dcml = affine_meta_fit(set);
    const ParamPredictor g_dcml = [dcml](const MaskedInfoSet& x) { return dcml.predict(x); };
    for (const auto& f : standard_shift_families()) {
      const ShiftResult s = dcml_shift_demo(g_dcml, train_panels, f.phi);
      add({"dcml_shift_" + f.name, s.loss_original, s.loss_shifted, 1e-12, s.relative_gap() < 1e-12,
           "DCML loss is invariant to theta += phi (p_K, -1)"});
      const ShiftResult m = dcmoml_shift_demo(g_sym, train_panels, f.phi);
      add({"dcmoml_shift_" + f.name, m.loss_original, m.loss_shifted, 0.0,
           m.loss_shifted > m.loss_original, "the same shift raises the averaged DCMOML loss"});
    }
  }
  {
    const QueryLaw law = query_randomization_law(g_sym, mc_panels, cfg.seed + 4);
    add({"query_probability", law.hit_k_star.mean, 0.5, 0.01,
         std::abs(law.hit_k_star.mean - 0.5) <= 0.01, "P(k1 = K*) over the query stream"});
    add({"sampled_vs_averaged_loss", law.sampled_loss.mean, law.averaged_loss.mean,
         3.0 * law.difference.se, std::abs(law.difference.mean) <= 3.0 * law.difference.se,
         "averaged loss equals the expectation of the sampled loss"});
  }
  {
    const auto probe = generate(GenConfig::two_point_probe(6, cfg.probe_tasks, cfg.seed + 5));
    const Assumption1Result a = assumption1_check(probe);
    add({"assumption1_probe_k6", a.max_abs_z, 3.0, 3.0, a.pass,
         "necessary-condition check only: noise mean at the last two indices is zero within each "
         "(final sign, incumbent quartile) bin"});
  }
  return rep;
}

}  // namespace mtdemand
