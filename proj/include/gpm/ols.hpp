#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "gpm/error.hpp"
#include "json.hpp"

namespace gpm::econ {

// Pivots below this fraction of the largest pivot mark a column as collinear.
constexpr double kRankThreshold = 1e-10;

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd resid;
  Eigen::MatrixXd cov;
  double ssr = 0;
  double sigma2 = 0;
  double df_resid = 0;
};

/// Least squares via column-pivoted QR. `absorbed_df` counts parameters
/// already swept out of X and y (fixed effects) for the residual dof.
inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<std::string>& names,
                  double absorbed_df = 0) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n) fail(ErrorKind::domain, "ols: X and y row counts differ");
  if (p == 0) fail(ErrorKind::domain, "ols: no regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < p) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) {
      auto c = static_cast<std::size_t>(perm(k));
      cols += (cols.empty() ? "" : ", ") +
              (c < names.size() ? names[c] : "col" + std::to_string(c));
    }
    fail(ErrorKind::rank, "rank deficient design: collinear column(s) " + cols);
  }
  OlsFit f;
  f.beta = qr.solve(y);
  f.resid = y - X * f.beta;
  f.ssr = f.resid.squaredNorm();
  f.df_resid = static_cast<double>(n) - absorbed_df - static_cast<double>(p);
  if (f.df_resid <= 0)
    fail(ErrorKind::rank, "ols: no residual degrees of freedom");
  f.sigma2 = f.ssr / f.df_resid;
  // (X'X)^-1 = P R^-1 R^-T P'
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(p, p));
  Eigen::MatrixXd xtx_inv_perm = Rinv * Rinv.transpose();
  Eigen::MatrixXd P = qr.colsPermutation();
  f.cov = f.sigma2 * (P * xtx_inv_perm * P.transpose());
  f.se = f.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return f;
}

struct CoefRow {
  std::string name;
  double estimate = 0;
  double std_error = 0;
  double stat = 0;
  double p_value = 1;
};

struct FTest {
  double value = 0;
  double df1 = 0;
  double df2 = 0;
  double p_value = 1;
};

struct CoefTable {
  std::string model;
  std::string stat_label = "t";  // "t" or "z"
  std::vector<CoefRow> rows;
  std::size_t n_obs = 0;
  double df_resid = 0;
  double r2 = 0;
  std::string r2_label = "r2";
  std::optional<double> adj_r2;
  std::optional<FTest> f;
  std::vector<std::pair<std::string, double>> extras;

  const CoefRow& row(const std::string& name) const {
    for (const auto& r : rows)
      if (r.name == name) return r;
    fail(ErrorKind::domain, "no coefficient named '" + name + "'");
  }
};

inline double t_p_value(double t, double df) {
  if (!std::isfinite(t)) return 0;
  boost::math::students_t dist(df);
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

inline double z_p_value(double z) {
  if (!std::isfinite(z)) return 0;
  boost::math::normal dist;
  return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

inline double f_p_value(double f, double df1, double df2) {
  if (!(f > 0) || !std::isfinite(f)) return f > 0 ? 0 : 1;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

// 1% / 5% / 10% convention.
inline const char* stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

inline std::vector<CoefRow> t_rows(const OlsFit& f,
                                   const std::vector<std::string>& names) {
  std::vector<CoefRow> rows;
  for (Eigen::Index i = 0; i < f.beta.size(); ++i) {
    CoefRow r;
    r.name = names[static_cast<std::size_t>(i)];
    r.estimate = f.beta(i);
    r.std_error = f.se(i);
    r.stat = r.std_error > 0 ? r.estimate / r.std_error : 0;
    r.p_value = t_p_value(r.stat, f.df_resid);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline nlohmann::json to_json(const CoefTable& t) {
  auto rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"name", r.name},
                    {"estimate", r.estimate},
                    {"std_error", r.std_error},
                    {t.stat_label, r.stat},
                    {"p_value", r.p_value},
                    {"stars", stars(r.p_value)}});
  nlohmann::json j = {{"model", t.model},
                      {"coefficients", rows},
                      {"n_obs", t.n_obs},
                      {"df_resid", t.df_resid},
                      {"r2", t.r2},
                      {"r2_definition", t.r2_label}};
  if (t.adj_r2) j["adj_r2"] = *t.adj_r2;
  if (t.f)
    j["F"] = {{"value", t.f->value},
              {"df1", t.f->df1},
              {"df2", t.f->df2},
              {"p_value", t.f->p_value}};
  for (const auto& [k, v] : t.extras) j[k] = v;
  return j;
}

inline std::string format_table(const CoefTable& t) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s\n", t.model.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "%-24s %12s %12s %10s %8s\n", "variable",
                "estimate", "std.err", t.stat_label.c_str(), "p");
  out += buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%-24s %12.6g%-3s %12.6g %10.3f %8.4f\n",
                  r.name.c_str(), r.estimate, stars(r.p_value), r.std_error,
                  r.stat, r.p_value);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "N = %zu   %s = %.4f", t.n_obs,
                t.r2_label.c_str(), t.r2);
  out += buf;
  if (t.adj_r2) {
    std::snprintf(buf, sizeof buf, "   adj. R2 = %.4f", *t.adj_r2);
    out += buf;
  }
  if (t.f) {
    std::snprintf(buf, sizeof buf, "   F(%g,%g) = %.3f, p = %.4f", t.f->df1,
                  t.f->df2, t.f->value, t.f->p_value);
    out += buf;
  }
  out += "\n";
  for (const auto& [k, v] : t.extras) {
    std::snprintf(buf, sizeof buf, "%s = %.6g\n", k.c_str(), v);
    out += buf;
  }
  out += "*** p<0.01, ** p<0.05, * p<0.10\n";
  return out;
}

}  // namespace gpm::econ
