#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gpm/core_data.hpp"
#include "gpm/error.hpp"
#include "gpm/ols.hpp"
#include "gpm/parallel.hpp"

namespace gpm::econ {

struct RegressionSpec {
  std::string dependent;
  std::vector<std::string> regressors;
  bool entity_effects = true;
  bool time_effects = false;
};

inline void validate(const RegressionSpec& spec, const PanelDataset& panel) {
  if (spec.regressors.empty()) fail(ErrorKind::domain, "no regressors given");
  if (!panel.has(spec.dependent))
    fail(ErrorKind::schema, "unknown dependent variable '" + spec.dependent + "'");
  for (const auto& r : spec.regressors) {
    if (r == spec.dependent)
      fail(ErrorKind::domain, "dependent variable '" + r + "' is also a regressor");
    if (!panel.has(r)) fail(ErrorKind::schema, "unknown regressor '" + r + "'");
  }
}

/// Within transformation of an entity-major panel vector (n entities, T
/// periods). Entity effects subtract entity means; with both effects the
/// two-way form x - x_i. - x_.t + x_.. is exact for a balanced panel.
inline Eigen::VectorXd demean(const Eigen::VectorXd& v, std::size_t n,
                              std::size_t T, bool entity, bool time) {
  const auto N = static_cast<Eigen::Index>(n), TT = static_cast<Eigen::Index>(T);
  Eigen::Map<const Eigen::MatrixXd> m(v.data(), TT, N);  // column = entity
  Eigen::MatrixXd out = m;
  if (entity && time) {
    const Eigen::VectorXd time_mean = m.rowwise().mean();
    const Eigen::RowVectorXd ent_mean = m.colwise().mean();
    const double grand = m.mean();
    out.colwise() -= time_mean;
    out.rowwise() -= ent_mean;
    out.array() += grand;
  } else if (entity) {
    out.rowwise() -= m.colwise().mean();
  } else if (time) {
    out.colwise() -= m.rowwise().mean();
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), v.size());
}

inline double absorbed_dof(std::size_t n, std::size_t T, bool entity, bool time) {
  double d = 0;
  if (entity) d += static_cast<double>(n);
  if (time) d += static_cast<double>(T) - (entity ? 1.0 : 0.0);
  return d;
}

namespace detail {

inline Eigen::MatrixXd columns(const PanelDataset& panel,
                               const std::vector<std::string>& vars) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(panel.rows()),
                    static_cast<Eigen::Index>(vars.size()));
  for (std::size_t j = 0; j < vars.size(); ++j)
    X.col(static_cast<Eigen::Index>(j)) = panel.vector(vars[j]);
  return X;
}

inline double r2_from(const Eigen::VectorXd& y, double ssr, bool centered) {
  const double tss = centered ? (y.array() - y.mean()).matrix().squaredNorm()
                              : y.squaredNorm();
  return tss > 0 ? 1.0 - ssr / tss : 0.0;
}

// Fixed-effects OLS on raw (undemeaned) design. Columns wiped out by the
// within transformation are reported as absorbed.
struct WithinFit {
  OlsFit ols;
  double r2 = 0;
  Eigen::VectorXd y_within;
};

inline WithinFit within_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const std::vector<std::string>& names, std::size_t n,
                            std::size_t T, bool entity, bool time) {
  Eigen::MatrixXd Xw(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Xw.col(j) = demean(X.col(j), n, T, entity, time);
    const double raw = X.col(j).norm();
    if ((entity || time) && Xw.col(j).norm() <= kRankThreshold * std::max(raw, 1e-300))
      fail(ErrorKind::rank, "rank deficient design: regressor '" +
                                names[static_cast<std::size_t>(j)] +
                                "' is absorbed by the fixed effects");
  }
  WithinFit w;
  w.y_within = demean(y, n, T, entity, time);
  if (!entity && !time) {
    Eigen::MatrixXd Xc(X.rows(), X.cols() + 1);
    Xc << Eigen::VectorXd::Ones(X.rows()), X;
    auto nm = names;
    nm.insert(nm.begin(), "_cons");
    w.ols = ols(Xc, y, nm);
    w.r2 = r2_from(y, w.ols.ssr, true);
    return w;
  }
  w.ols = ols(Xw, w.y_within, names, absorbed_dof(n, T, entity, time));
  w.r2 = r2_from(w.y_within, w.ols.ssr, false);
  return w;
}

}  // namespace detail

/// Two-way (or one-way) fixed-effects within estimator.
inline CoefTable fit_fixed_effects(const PanelDataset& panel,
                                   const RegressionSpec& spec) {
  validate(spec, panel);
  const auto X = detail::columns(panel, spec.regressors);
  const auto y = panel.vector(spec.dependent);
  auto w = detail::within_ols(X, y, spec.regressors, panel.n_entities(),
                              panel.n_years(), spec.entity_effects,
                              spec.time_effects);
  CoefTable t;
  t.model = std::string("FE (") +
            (spec.entity_effects && spec.time_effects ? "entity+time"
             : spec.entity_effects                   ? "entity"
             : spec.time_effects                     ? "time"
                                                     : "pooled") +
            "), dependent: " + spec.dependent;
  auto names = spec.regressors;
  if (!spec.entity_effects && !spec.time_effects) names.insert(names.begin(), "_cons");
  t.rows = t_rows(w.ols, names);
  t.n_obs = panel.rows();
  t.df_resid = w.ols.df_resid;
  t.r2 = w.r2;
  t.r2_label = spec.entity_effects || spec.time_effects ? "within R2" : "R2";
  return t;
}

// ---------------------------------------------------------------------------
// Spatial Durbin model

struct SdmFit {
  double rho = 0;
  Eigen::VectorXd beta;   // direct regressors
  Eigen::VectorXd theta;  // spatially lagged regressors
  double sigma2 = 0;
  double log_likelihood = 0;
  double r2 = 0;  // squared corr(fitted, actual), within-transformed
  double rho_lower = -0.999;
  double rho_upper = 0.999;
  CoefTable table;
};

/// Concentrated log-likelihood of the within-transformed SDM as a function of
/// rho. Exposed separately so callers and tests can profile it.
///
/// Demeaning removes one period per entity (entity effects) and, because W is
/// row-standardized, the unit-eigenvalue direction in every period (time
/// effects). The likelihood is that of the transformed data: effective sample
/// size (n - [time]) * (T - [entity]) and Jacobian
/// (T - [entity]) * (sum_i ln|1 - rho lambda_i| - [time] ln(1 - rho)).
/// Using the untransformed nT and T * ln|I - rho W| instead biases rho
/// downward whenever time effects are present.
class SdmLikelihood {
 public:
  SdmLikelihood(const PanelDataset& panel, const RegressionSpec& spec,
                const SpatialWeights& W)
      : n_(panel.n_entities()),
        T_(panel.n_years()),
        entity_(spec.entity_effects),
        time_(spec.time_effects) {
    validate(spec, panel);
    if (effective_obs() <= 0)
      fail(ErrorKind::domain, "SDM needs at least 2 entities and 2 periods per absorbed effect");
    if (W.n() != n_)
      fail(ErrorKind::domain, "weight matrix is " + std::to_string(W.n()) +
                                  "x" + std::to_string(W.n()) + " but panel has " +
                                  std::to_string(n_) + " entities");
    if (!W.rows_sum_to_one(1e-12))
      fail(ErrorKind::domain, "spatial weights are not row-standardized");
    const bool ent = spec.entity_effects, tim = spec.time_effects;
    const auto k = static_cast<Eigen::Index>(spec.regressors.size());
    const auto N = static_cast<Eigen::Index>(panel.rows());

    auto lag = [&](const Eigen::VectorXd& v) {
      // v is entity-major: reshape to T x n, each row a period.
      Eigen::Map<const Eigen::MatrixXd> m(v.data(), static_cast<Eigen::Index>(T_),
                                          static_cast<Eigen::Index>(n_));
      Eigen::MatrixXd out = m * W.matrix.transpose();
      return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(out.data(), v.size()));
    };

    const Eigen::VectorXd y = panel.vector(spec.dependent);
    y_ = demean(y, n_, T_, ent, tim);
    wy_ = demean(lag(y), n_, T_, ent, tim);
    const bool intercept = !ent && !tim;
    Z_.resize(N, 2 * k + (intercept ? 1 : 0));
    Eigen::Index c = 0;
    if (intercept) {
      Z_.col(c++).setOnes();
      names_.push_back("_cons");
    }
    for (const auto& r : spec.regressors) {
      Z_.col(c++) = demean(panel.vector(r), n_, T_, ent, tim);
      names_.push_back(r);
    }
    for (const auto& r : spec.regressors) {
      Z_.col(c++) = demean(lag(panel.vector(r)), n_, T_, ent, tim);
      names_.push_back("W*" + r);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z_);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < Z_.cols()) {
      std::string cols;
      const auto& perm = qr.colsPermutation().indices();
      for (Eigen::Index j = qr.rank(); j < Z_.cols(); ++j)
        cols += (cols.empty() ? "" : ", ") + names_[static_cast<std::size_t>(perm(j))];
      fail(ErrorKind::rank, "rank deficient SDM design: collinear column(s) " + cols);
    }
    b0_ = qr.solve(y_);
    bL_ = qr.solve(wy_);
    e0_ = y_ - Z_ * b0_;
    eL_ = wy_ - Z_ * bL_;

    Eigen::EigenSolver<Eigen::MatrixXd> es(W.matrix, false);
    eig_ = es.eigenvalues();
    double lmin = 0, lmax = 0;
    for (const auto& l : eig_) {
      lmin = std::min(lmin, l.real());
      lmax = std::max(lmax, l.real());
    }
    if (lmax > 0) upper_ = std::min(upper_, 1.0 / lmax - 1e-9);
    if (lmin < 0) lower_ = std::max(lower_, 1.0 / lmin + 1e-9);
  }

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  std::size_t n_obs() const { return n_ * T_; }
  // Observations left after the within transformation.
  double effective_obs() const {
    return (static_cast<double>(n_) - (time_ ? 1.0 : 0.0)) *
           (static_cast<double>(T_) - (entity_ ? 1.0 : 0.0));
  }
  const std::vector<std::string>& names() const { return names_; }

  double log_det(double rho) const {
    double s = 0;
    for (const auto& l : eig_) s += std::log(std::abs(1.0 - rho * l));
    if (time_) s -= std::log(1.0 - rho);
    return (static_cast<double>(T_) - (entity_ ? 1.0 : 0.0)) * s;
  }

  double operator()(double rho) const {
    const double N = effective_obs();
    const double s2 = (e0_ - rho * eL_).squaredNorm() / N;
    if (!(s2 > 0)) return -std::numeric_limits<double>::infinity();
    return -0.5 * N * (std::log(2 * std::numbers::pi * s2) + 1.0) + log_det(rho);
  }

  Eigen::VectorXd coefficients(double rho) const { return b0_ - rho * bL_; }

  double sigma2(double rho) const {
    return (e0_ - rho * eL_).squaredNorm() / effective_obs();
  }

  // Unconcentrated log-likelihood at (delta, rho, sigma2).
  double full(const Eigen::VectorXd& delta, double rho, double s2) const {
    if (!(s2 > 0)) return -std::numeric_limits<double>::infinity();
    const double N = effective_obs();
    const double ssr = (y_ - rho * wy_ - Z_ * delta).squaredNorm();
    return -0.5 * N * std::log(2 * std::numbers::pi * s2) + log_det(rho) -
           ssr / (2 * s2);
  }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& wy() const { return wy_; }
  const Eigen::MatrixXd& Z() const { return Z_; }

 private:
  std::size_t n_, T_;
  bool entity_, time_;
  Eigen::VectorXd y_, wy_, b0_, bL_, e0_, eL_;
  Eigen::MatrixXd Z_;
  Eigen::VectorXcd eig_;
  std::vector<std::string> names_;
  double lower_ = -0.999, upper_ = 0.999;
};

/// Golden-section maximisation on [a, b].
template <typename F>
double golden_max(F&& f, double a, double b, double tol = 1e-10) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

/// Fixed-effect spatial Durbin model by concentrated quasi-ML. rho is
/// profiled with a 0.01 scan followed by golden-section refinement; standard
/// errors come from a central-difference Hessian of the full log-likelihood.
inline SdmFit fit_sdm(const PanelDataset& panel, const RegressionSpec& spec,
                      const SpatialWeights& W) {
  SdmLikelihood L(panel, spec, W);
  const double lo = L.lower(), hi = L.upper();

  double best = lo, best_ll = -std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::ceil((hi - lo) / 0.01));
  for (int i = 0; i <= steps; ++i) {
    const double r = std::min(hi, lo + 0.01 * i);
    const double ll = L(r);
    if (std::isfinite(ll) && ll > best_ll) {
      best_ll = ll;
      best = r;
    }
  }
  if (!std::isfinite(best_ll))
    fail(ErrorKind::numeric, "SDM log-likelihood is not finite for any rho");
  const double rho = golden_max(L, std::max(lo, best - 0.01), std::min(hi, best + 0.01));

  SdmFit fit;
  fit.rho = rho;
  fit.rho_lower = lo;
  fit.rho_upper = hi;
  const Eigen::VectorXd delta = L.coefficients(rho);
  fit.sigma2 = L.sigma2(rho);
  fit.log_likelihood = L(rho);

  const auto k = static_cast<Eigen::Index>(spec.regressors.size());
  const Eigen::Index off = delta.size() - 2 * k;
  fit.beta = delta.segment(off, k);
  fit.theta = delta.segment(off + k, k);

  // Parameter vector psi = (delta, rho, sigma2).
  const Eigen::Index p = delta.size() + 2;
  Eigen::VectorXd psi(p);
  psi << delta, rho, fit.sigma2;
  auto ll = [&](const Eigen::VectorXd& q) {
    return L.full(q.head(delta.size()), q(p - 2), q(p - 1));
  };
  Eigen::VectorXd h(p);
  for (Eigen::Index i = 0; i < p - 1; ++i) h(i) = 1e-4 * std::max(1.0, std::abs(psi(i)));
  h(p - 1) = 1e-3 * fit.sigma2;
  Eigen::MatrixXd H(p, p);
  const double f0 = ll(psi);
  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::VectorXd a = psi, b = psi;
    a(i) += h(i);
    b(i) -= h(i);
    H(i, i) = (ll(a) - 2 * f0 + ll(b)) / (h(i) * h(i));
    for (Eigen::Index j = i + 1; j < p; ++j) {
      Eigen::VectorXd pp = psi, pm = psi, mp = psi, mm = psi;
      pp(i) += h(i); pp(j) += h(j);
      pm(i) += h(i); pm(j) -= h(j);
      mp(i) -= h(i); mp(j) += h(j);
      mm(i) -= h(i); mm(j) -= h(j);
      H(i, j) = H(j, i) = (ll(pp) - ll(pm) - ll(mp) + ll(mm)) / (4 * h(i) * h(j));
    }
  }
  Eigen::MatrixXd info = -H;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  Eigen::VectorXd se = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }

  const Eigen::VectorXd fitted = rho * L.wy() + L.Z() * delta;
  const Eigen::VectorXd& y = L.y();
  const double cy = (y.array() - y.mean()).matrix().norm();
  const double cf = (fitted.array() - fitted.mean()).matrix().norm();
  const double corr = cy > 0 && cf > 0
                          ? (y.array() - y.mean()).matrix().dot(
                                (fitted.array() - fitted.mean()).matrix()) /
                                (cy * cf)
                          : 0.0;
  fit.r2 = corr * corr;

  CoefTable& t = fit.table;
  t.model = "SDM FE (" +
            std::string(spec.entity_effects && spec.time_effects ? "entity+time"
                        : spec.entity_effects                   ? "entity"
                        : spec.time_effects                     ? "time"
                                                                : "none") +
            "), dependent: " + spec.dependent;
  t.stat_label = "z";
  auto add = [&](const std::string& name, double est, double s) {
    CoefRow r{name, est, s, s > 0 ? est / s : 0.0, 1.0};
    r.p_value = z_p_value(r.stat);
    t.rows.push_back(r);
  };
  for (Eigen::Index i = 0; i < delta.size(); ++i)
    add(L.names()[static_cast<std::size_t>(i)], delta(i), se(i));
  add("rho", rho, se(p - 2));
  add("sigma2_e", fit.sigma2, se(p - 1));
  t.n_obs = L.n_obs();
  t.df_resid = L.effective_obs() - static_cast<double>(p);
  t.r2 = fit.r2;
  t.r2_label = "r2 (squared corr. of fitted vs actual, within-transformed)";
  t.extras = {{"log_likelihood", fit.log_likelihood},
              {"rho_lower_bound", lo},
              {"rho_upper_bound", hi}};
  return fit;
}

// ---------------------------------------------------------------------------
// Threshold regression

struct ThresholdFit {
  std::string threshold_var;
  std::string focal_var;
  double gamma = 0;
  std::size_t gamma_index = 0;
  std::vector<double> grid;
  std::vector<double> ssr_profile;  // NaN where a candidate was skipped
  double low_coef = 0, low_se = 0;
  double high_coef = 0, high_se = 0;
  double trim_lower = 0, trim_upper = 0;
  double r2 = 0;
  CoefTable table;
  std::vector<std::string> diagnostics;
};

// Linear-interpolation sample quantile (R type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) fail(ErrorKind::domain, "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + frac * (v[i + 1] - v[i]);
}

/// Single-threshold fixed-effects regression. The focal regressor is split
/// into focal*1(T <= gamma) and focal*1(T > gamma); gamma is chosen by grid
/// search over the distinct threshold values strictly inside the trimmed
/// percentile range, minimising SSR (ties go to the smaller gamma).
inline ThresholdFit fit_threshold(const PanelDataset& panel,
                                  const RegressionSpec& spec,
                                  const std::string& threshold_var,
                                  const std::string& focal_var,
                                  double trim = 0.05) {
  validate(spec, panel);
  if (!panel.has(threshold_var))
    fail(ErrorKind::schema, "unknown threshold variable '" + threshold_var + "'");
  if (std::find(spec.regressors.begin(), spec.regressors.end(), focal_var) ==
      spec.regressors.end())
    fail(ErrorKind::domain, "focal variable '" + focal_var + "' is not a regressor");
  if (!(trim >= 0 && trim < 0.5))
    fail(ErrorKind::domain, "trim fraction must lie in [0, 0.5)");

  auto tv = panel.column(threshold_var);
  std::vector<double> tvals(tv.begin(), tv.end());
  ThresholdFit fit;
  fit.threshold_var = threshold_var;
  fit.focal_var = focal_var;
  fit.trim_lower = quantile(tvals, trim);
  fit.trim_upper = quantile(tvals, 1 - trim);
  std::vector<double> distinct = tvals;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (double v : distinct)
    if (v > fit.trim_lower && v < fit.trim_upper) fit.grid.push_back(v);
  if (fit.grid.size() < 10)
    fail(ErrorKind::domain, "too few distinct values of threshold variable '" +
                                threshold_var + "' inside the trimmed range (" +
                                std::to_string(fit.grid.size()) + " < 10)");

  std::vector<std::string> names;
  for (const auto& r : spec.regressors)
    if (r != focal_var) names.push_back(r);
  const std::string low_name = focal_var + " (" + threshold_var + "<=gamma)";
  const std::string high_name = focal_var + " (" + threshold_var + ">gamma)";
  names.push_back(low_name);
  names.push_back(high_name);

  const auto N = static_cast<Eigen::Index>(panel.rows());
  const auto kc = static_cast<Eigen::Index>(names.size() - 2);
  Eigen::MatrixXd base(N, kc + 2);
  {
    Eigen::Index c = 0;
    for (const auto& r : spec.regressors)
      if (r != focal_var) base.col(c++) = panel.vector(r);
  }
  const Eigen::VectorXd focal = panel.vector(focal_var);
  const Eigen::VectorXd y = panel.vector(spec.dependent);
  const auto n = panel.n_entities(), T = panel.n_years();

  auto design = [&](double g) {
    Eigen::MatrixXd X = base;
    for (Eigen::Index i = 0; i < N; ++i) {
      const bool low = tv[static_cast<std::size_t>(i)] <= g;
      X(i, kc) = low ? focal(i) : 0.0;
      X(i, kc + 1) = low ? 0.0 : focal(i);
    }
    return X;
  };

  fit.ssr_profile.assign(fit.grid.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> notes(fit.grid.size());
  parallel_for(fit.grid.size(), [&](std::size_t gi) {
    const double g = fit.grid[gi];
    std::size_t n_low = 0;
    for (double v : tvals) n_low += v <= g;
    if (n_low == 0 || n_low == tvals.size()) {
      notes[gi] = "empty regime at gamma=" + io::format_double(g);
      return;
    }
    try {
      auto w = detail::within_ols(design(g), y, names, n, T, spec.entity_effects,
                                  spec.time_effects);
      fit.ssr_profile[gi] = w.ols.ssr;
    } catch (const Error& e) {
      notes[gi] = "skipped gamma=" + io::format_double(g) + ": " + e.what();
    }
  });
  for (auto& s : notes)
    if (!s.empty()) fit.diagnostics.push_back(std::move(s));

  bool found = false;
  for (std::size_t gi = 0; gi < fit.grid.size(); ++gi) {
    const double s = fit.ssr_profile[gi];
    if (std::isnan(s)) continue;
    if (!found || s < fit.ssr_profile[fit.gamma_index]) {
      fit.gamma_index = gi;
      found = true;
    }
  }
  if (!found) fail(ErrorKind::numeric, "no admissible threshold candidate");
  fit.gamma = fit.grid[fit.gamma_index];

  auto w = detail::within_ols(design(fit.gamma), y, names, n, T,
                              spec.entity_effects, spec.time_effects);
  auto out_names = names;
  if (!spec.entity_effects && !spec.time_effects) out_names.insert(out_names.begin(), "_cons");
  fit.table.model = "Threshold FE, dependent: " + spec.dependent +
                    ", threshold: " + threshold_var;
  fit.table.rows = t_rows(w.ols, out_names);
  fit.table.n_obs = panel.rows();
  fit.table.df_resid = w.ols.df_resid;
  fit.table.r2 = w.r2;
  fit.table.r2_label = spec.entity_effects || spec.time_effects ? "within R2" : "R2";
  fit.table.extras = {{"gamma", fit.gamma},
                      {"ssr_at_gamma", fit.ssr_profile[fit.gamma_index]},
                      {"grid_size", static_cast<double>(fit.grid.size())}};
  fit.r2 = w.r2;
  const auto& lo = fit.table.row(low_name);
  const auto& hi = fit.table.row(high_name);
  fit.low_coef = lo.estimate;
  fit.low_se = lo.std_error;
  fit.high_coef = hi.estimate;
  fit.high_se = hi.std_error;
  return fit;
}

// ---------------------------------------------------------------------------
// Moderation

struct ModerationFit {
  CoefTable direct;     // dependent ~ focal + controls
  CoefTable moderator;  // moderator ~ focal + controls
  CoefTable full;       // dependent ~ focal + moderator + focal x moderator + controls
  std::string interaction_name;
};

namespace detail {

inline CoefTable pooled_ols_table(const std::string& model, const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y,
                                  std::vector<std::string> names) {
  Eigen::MatrixXd Xc(X.rows(), X.cols() + 1);
  Xc << Eigen::VectorXd::Ones(X.rows()), X;
  names.insert(names.begin(), "constant");
  auto f = ols(Xc, y, names);
  CoefTable t;
  t.model = model;
  t.rows = t_rows(f, names);
  t.n_obs = static_cast<std::size_t>(X.rows());
  t.df_resid = f.df_resid;
  const double n = static_cast<double>(X.rows());
  const double p = static_cast<double>(Xc.cols());
  t.r2 = r2_from(y, f.ssr, true);
  t.r2_label = "R2";
  t.adj_r2 = 1.0 - (1.0 - t.r2) * (n - 1) / (n - p);
  FTest ft;
  ft.df1 = p - 1;
  ft.df2 = n - p;
  const double tss = (y.array() - y.mean()).matrix().squaredNorm();
  ft.value = ((tss - f.ssr) / ft.df1) / (f.ssr / ft.df2);
  ft.p_value = f_p_value(ft.value, ft.df1, ft.df2);
  t.f = ft;
  return t;
}

}  // namespace detail

/// Three-model moderation layout on the pooled sample with an intercept.
/// The interaction uses mean-centred focal and moderator.
inline ModerationFit fit_moderation(const PanelDataset& panel,
                                    const std::string& dependent,
                                    const std::string& focal,
                                    const std::string& moderator,
                                    const std::vector<std::string>& controls) {
  for (const auto& v : {dependent, focal, moderator})
    if (!panel.has(v)) fail(ErrorKind::schema, "unknown variable '" + v + "'");
  for (const auto& c : controls) {
    if (!panel.has(c)) fail(ErrorKind::schema, "unknown control '" + c + "'");
    if (c == dependent || c == focal || c == moderator)
      fail(ErrorKind::domain, "control '" + c + "' duplicates a model variable");
  }
  const auto N = static_cast<Eigen::Index>(panel.rows());
  const auto k = static_cast<Eigen::Index>(controls.size());
  const Eigen::VectorXd f = panel.vector(focal);
  const Eigen::VectorXd m = panel.vector(moderator);
  const Eigen::MatrixXd C = detail::columns(panel, controls);

  ModerationFit out;
  out.interaction_name = focal + "_x_" + moderator;

  Eigen::MatrixXd X1(N, 1 + k);
  X1 << f, C;
  std::vector<std::string> n1{focal};
  n1.insert(n1.end(), controls.begin(), controls.end());
  out.direct = detail::pooled_ols_table("Model 1: " + dependent + " ~ " + focal,
                                        X1, panel.vector(dependent), n1);
  out.moderator = detail::pooled_ols_table("Model 2: " + moderator + " ~ " + focal,
                                           X1, m, n1);

  const Eigen::VectorXd inter =
      ((f.array() - f.mean()) * (m.array() - m.mean())).matrix();
  Eigen::MatrixXd X3(N, 3 + k);
  X3 << f, m, inter, C;
  std::vector<std::string> n3{focal, moderator, out.interaction_name};
  n3.insert(n3.end(), controls.begin(), controls.end());
  out.full = detail::pooled_ols_table(
      "Model 3: " + dependent + " ~ " + focal + " * " + moderator, X3,
      panel.vector(dependent), n3);
  return out;
}

}  // namespace gpm::econ
