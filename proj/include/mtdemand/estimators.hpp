#pragma once

// Non-meta baselines: per-task OLS, pooled OLS and empirical-Bayes shrinkage
// with a heteroskedastic GLS likelihood.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtdemand/csv.hpp"
#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"

namespace mtdemand {

struct OlsFit {
  DemandParams params;
  double residual_ss = 0.0;
  int design_rank = 2;
};

enum class Weighting { Uniform, Exposure };

namespace detail {

inline double obs_weight(const TaskPanel& p, std::size_t k, Weighting w) {
  if (w == Weighting::Exposure && p.exposures) return static_cast<double>((*p.exposures)[k]);
  return 1.0;
}

// Weighted least squares on (1, p) in centered form, which stays accurate when
// the price spread is small relative to the price level.
template <class Rows>
OlsFit weighted_line_fit(const Rows& rows) {
  double sw = 0, sp = 0, sd = 0;
  bool distinct = false;
  double first_price = 0;
  bool have_first = false;
  for (const auto& [p, d, w] : rows) {
    sw += w;
    sp += w * p;
    sd += w * d;
    if (!have_first) {
      first_price = p;
      have_first = true;
    } else if (p != first_price) {
      distinct = true;
    }
  }
  if (!have_first || !distinct || !(sw > 0))
    throw Error(ErrorKind::SingularDesign, "fewer than two distinct prices");
  const double pbar = sp / sw, dbar = sd / sw;
  double sxx = 0, sxy = 0;
  for (const auto& [p, d, w] : rows) {
    sxx += w * (p - pbar) * (p - pbar);
    sxy += w * (p - pbar) * (d - dbar);
  }
  if (!(sxx > 0)) throw Error(ErrorKind::SingularDesign, "zero price variance");
  OlsFit fit;
  fit.params.theta1 = sxy / sxx;
  fit.params.theta0 = dbar - fit.params.theta1 * pbar;
  for (const auto& [p, d, w] : rows) {
    const double r = d - mean_demand(fit.params, p);
    fit.residual_ss += w * r * r;
  }
  return fit;
}

struct Obs {
  double price, demand, weight;
};

inline std::vector<Obs> observations(const TaskPanel& panel, Weighting w) {
  std::vector<Obs> rows;
  rows.reserve(panel.size());
  for (std::size_t k = 0; k < panel.size(); ++k)
    rows.push_back({panel.prices[k], panel.demands[k], obs_weight(panel, k, w)});
  return rows;
}

}  // namespace detail

/// Least-squares line through one task's observations. With Weighting::Exposure
/// each observation is weighted by its exposure length.
inline OlsFit task_ols(const TaskPanel& panel, Weighting weighting = Weighting::Uniform) {
  validate_panel(panel);
  return detail::weighted_line_fit(detail::observations(panel, weighting));
}

/// Pooled fit over every observation of every task.
inline DemandParams shared_ols(const std::vector<TaskPanel>& panels,
                               Weighting weighting = Weighting::Uniform) {
  std::vector<detail::Obs> rows;
  for (const auto& p : panels) {
    auto r = detail::observations(p, weighting);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (rows.size() < 2) throw Error(ErrorKind::SingularDesign, "fewer than two observations");
  return detail::weighted_line_fit(rows).params;
}

// ---------------------------------------------------------------------------
// Empirical Bayes.
//
// Random-effects model: D_i = X_i beta_i + e_i, e_i ~ N(0, sigma^2 W_i^-1),
// beta_i ~ N(mu, Sigma0), with W_i = exposure weights (identity without
// exposures). (mu, Sigma0, sigma^2) are fitted by EM on the marginal
// likelihood. A plain average of per-task OLS fits is not usable here: with
// K = 2 each slope is a ratio of Gaussians and has no finite mean.

struct EbPrior {
  DemandParams mean;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
  double noise_variance = 1.0;
  int iterations = 0;

  /// Flat prior: posterior reduces to the task's GLS fit.
  static EbPrior flat(double noise_variance) {
    EbPrior p;
    p.covariance.setConstant(std::numeric_limits<double>::infinity());
    p.noise_variance = noise_variance;
    return p;
  }
};

enum class EbMethod { EM, Moments };

struct EbOptions {
  EbMethod method = EbMethod::EM;
  bool diagonal = false;
  int max_iterations = 1000;
  double tolerance = 1e-10;
  Weighting weighting = Weighting::Exposure;
};

namespace detail {

inline constexpr double kPriorRidge = 1e-8;

inline Eigen::Matrix2d truncate_psd(const Eigen::Matrix2d& m) {
  const Eigen::Matrix2d sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::Matrix2d prior_precision(const Eigen::Matrix2d& cov) {
  if (!cov.allFinite()) return Eigen::Matrix2d::Zero();
  return (cov + kPriorRidge * Eigen::Matrix2d::Identity()).inverse();
}

struct TaskMoments {
  Eigen::Matrix2d xtwx;
  Eigen::Vector2d xtwd;
  double dtwd;
  double n_obs;
};

inline TaskMoments task_moments(const TaskPanel& p, Weighting w) {
  TaskMoments m{Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(), 0.0,
                static_cast<double>(p.size())};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double wk = obs_weight(p, k, w);
    const Eigen::Vector2d x(1.0, p.prices[k]);
    m.xtwx += wk * x * x.transpose();
    m.xtwd += wk * p.demands[k] * x;
    m.dtwd += wk * p.demands[k] * p.demands[k];
  }
  return m;
}

inline double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

inline double robust_scale(const std::vector<double>& v) {
  const double med = median(v);
  std::vector<double> dev;
  dev.reserve(v.size());
  for (double x : v) dev.push_back(std::abs(x - med));
  return 1.4826 * median(dev);
}

}  // namespace detail

/// Method of moments: mean of the per-task OLS fits, their sample covariance
/// minus the average sampling covariance (eigen-truncated), pooled residual
/// variance. Heavy-tailed at K = 2, which is why EM is the default.
inline EbPrior eb_fit_prior_moments(const std::vector<TaskPanel>& panels, const EbOptions& opt = {}) {
  std::vector<Eigen::Vector2d> fits;
  std::vector<Eigen::Matrix2d> xtwx;
  double rss = 0, dof = 0, pooled_rss = 0, total_obs = 0;
  Eigen::Matrix2d pool_xx = Eigen::Matrix2d::Zero();
  Eigen::Vector2d pool_xd = Eigen::Vector2d::Zero();
  double pool_dd = 0;
  for (const auto& p : panels) {
    try {
      const OlsFit f = task_ols(p, opt.weighting);
      const auto m = detail::task_moments(p, opt.weighting);
      fits.emplace_back(f.params.theta0, f.params.theta1);
      xtwx.push_back(m.xtwx);
      rss += f.residual_ss;
      dof += static_cast<double>(p.size()) - 2.0;
      pool_xx += m.xtwx;
      pool_xd += m.xtwd;
      pool_dd += m.dtwd;
      total_obs += m.n_obs;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularDesign) throw;
    }
  }
  if (fits.size() < 2)
    throw Error(ErrorKind::InsufficientTasks, "need at least two tasks with rank-2 designs");
  const double n = static_cast<double>(fits.size());
  EbPrior prior;
  if (dof > 0) {
    prior.noise_variance = rss / dof;
  } else {
    // exact per-task fits leave no residual; fall back to the pooled fit
    const Eigen::Vector2d b = pool_xx.ldlt().solve(pool_xd);
    pooled_rss = pool_dd - 2.0 * b.dot(pool_xd) + b.dot(pool_xx * b);
    prior.noise_variance = std::max(pooled_rss, 0.0) / total_obs;
  }
  if (!(prior.noise_variance > 0)) prior.noise_variance = 1e-12;
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  for (const auto& f : fits) mu += f;
  mu /= n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero(), sampling = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const Eigen::Vector2d d = fits[i] - mu;
    cov += d * d.transpose();
    sampling += prior.noise_variance * xtwx[i].inverse();
  }
  cov = cov / (n - 1.0) - sampling / n;
  if (opt.diagonal) cov(0, 1) = cov(1, 0) = 0.0;
  prior.mean = {mu(0), mu(1)};
  prior.covariance = detail::truncate_psd(cov);
  return prior;
}

inline EbPrior eb_fit_prior(const std::vector<TaskPanel>& panels, const EbOptions& opt = {}) {
  if (opt.method == EbMethod::Moments) return eb_fit_prior_moments(panels, opt);
  std::vector<const TaskPanel*> usable;
  std::vector<double> b0, b1;
  double rss = 0, dof = 0;
  for (const auto& p : panels) {
    try {
      const OlsFit f = task_ols(p, opt.weighting);
      usable.push_back(&p);
      b0.push_back(f.params.theta0);
      b1.push_back(f.params.theta1);
      rss += f.residual_ss;
      dof += static_cast<double>(p.size()) - 2.0;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularDesign) throw;
    }
  }
  if (usable.size() < 2)
    throw Error(ErrorKind::InsufficientTasks, "need at least two tasks with rank-2 designs");

  std::vector<detail::TaskMoments> mom;
  mom.reserve(usable.size());
  double total_obs = 0;
  for (const TaskPanel* p : usable) {
    mom.push_back(detail::task_moments(*p, opt.weighting));
    total_obs += mom.back().n_obs;
  }

  // Starting point: pooled fit for the mean, MAD scales of the per-task fits
  // for the covariance, residual variance from whichever fit has dof left.
  EbPrior prior;
  {
    Eigen::Matrix2d xtwx = Eigen::Matrix2d::Zero();
    Eigen::Vector2d xtwd = Eigen::Vector2d::Zero();
    double dtwd = 0;
    for (const auto& m : mom) {
      xtwx += m.xtwx;
      xtwd += m.xtwd;
      dtwd += m.dtwd;
    }
    const Eigen::Vector2d pooled = xtwx.ldlt().solve(xtwd);
    prior.mean = {pooled(0), pooled(1)};
    if (dof > 0) {
      prior.noise_variance = rss / dof;
    } else {
      const double pooled_rss = dtwd - 2.0 * pooled.dot(xtwd) + pooled.dot(xtwx * pooled);
      prior.noise_variance = std::max(pooled_rss, 0.0) / total_obs;
    }
    const double s0 = detail::robust_scale(b0), s1 = detail::robust_scale(b1);
    prior.covariance = Eigen::Vector2d(s0 * s0 + 1e-12, s1 * s1 + 1e-12).asDiagonal();
    if (!(prior.noise_variance > 0)) prior.noise_variance = 1e-12;
  }

  const double n = static_cast<double>(mom.size());
  std::vector<Eigen::Vector2d> post_mean(mom.size());
  std::vector<Eigen::Matrix2d> post_cov(mom.size());
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::Matrix2d prec = detail::prior_precision(prior.covariance);
    const Eigen::Vector2d mu(prior.mean.theta0, prior.mean.theta1);
    const double s2 = prior.noise_variance;
    Eigen::Vector2d sum_m = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < mom.size(); ++i) {
      post_cov[i] = (prec + mom[i].xtwx / s2).inverse();
      post_mean[i] = post_cov[i] * (prec * mu + mom[i].xtwd / s2);
      sum_m += post_mean[i];
    }
    const Eigen::Vector2d new_mu = sum_m / n;
    Eigen::Matrix2d new_cov = Eigen::Matrix2d::Zero();
    double resid = 0;
    for (std::size_t i = 0; i < mom.size(); ++i) {
      const Eigen::Vector2d d = post_mean[i] - new_mu;
      new_cov += d * d.transpose() + post_cov[i];
      const Eigen::Vector2d& m = post_mean[i];
      resid += mom[i].dtwd - 2.0 * m.dot(mom[i].xtwd) + m.dot(mom[i].xtwx * m) +
               (mom[i].xtwx * post_cov[i]).trace();
    }
    new_cov /= n;
    if (opt.diagonal) new_cov(0, 1) = new_cov(1, 0) = 0.0;
    new_cov = detail::truncate_psd(new_cov);
    const double new_s2 = std::max(resid / total_obs, 1e-300);

    const double change = (new_mu - mu).norm() / (1.0 + mu.norm()) +
                          (new_cov - prior.covariance).norm() / (1.0 + prior.covariance.norm()) +
                          std::abs(new_s2 - s2) / (s2 + 1e-300);
    prior.mean = {new_mu(0), new_mu(1)};
    prior.covariance = new_cov;
    prior.noise_variance = new_s2;
    prior.iterations = it + 1;
    if (change < opt.tolerance) break;
  }
  return prior;
}

/// Gaussian posterior mean
///   (S0^-1 + X'WX/s2)^-1 (S0^-1 mu + X'WD/s2).
/// S0^-1 is taken as zero for a non-finite covariance and ridge-regularized
/// (1e-8) otherwise.
inline DemandParams eb_posterior(const TaskPanel& panel, const EbPrior& prior,
                                 Weighting weighting = Weighting::Exposure) {
  validate_panel(panel);
  const auto m = detail::task_moments(panel, weighting);
  const Eigen::Matrix2d prec = detail::prior_precision(prior.covariance);
  const Eigen::Vector2d mu(prior.mean.theta0, prior.mean.theta1);
  const Eigen::Matrix2d a = prec + m.xtwx / prior.noise_variance;
  const Eigen::Vector2d b = prec * mu + m.xtwd / prior.noise_variance;
  const Eigen::Vector2d post = a.fullPivLu().solve(b);
  return {post(0), post(1)};
}

struct TaskEstimate {
  std::int64_t task_id = 0;
  std::string method;
  DemandParams params;
};

inline void write_estimates_csv(std::ostream& out, const std::vector<TaskEstimate>& est) {
  out << "task_id,method,theta0_hat,theta1_hat\n";
  for (const auto& e : est)
    out << e.task_id << ',' << csv::quote(e.method) << ',' << csv::format_double(e.params.theta0)
        << ',' << csv::format_double(e.params.theta1) << '\n';
}

}  // namespace mtdemand
