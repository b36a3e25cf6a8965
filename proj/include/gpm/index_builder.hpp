#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gpm/core_data.hpp"
#include "gpm/error.hpp"

namespace gpm::index {

enum class Direction { positive, negative };

struct Indicator {
  std::string name;
  Direction direction = Direction::positive;
  std::string variable;  // panel column the indicator reads
  std::string group;     // optional first-level label
};

using IndicatorSystem = std::vector<Indicator>;

enum class Aggregation { weighted_sum, topsis };
enum class Pooling { pooled, per_year };

inline const char* to_string(Aggregation a) {
  return a == Aggregation::topsis ? "topsis" : "weighted-sum";
}

inline Aggregation parse_aggregation(const std::string& s) {
  if (s == "topsis") return Aggregation::topsis;
  if (s == "weighted-sum" || s == "weighted_sum") return Aggregation::weighted_sum;
  fail(ErrorKind::usage, "unknown aggregation method '" + s +
                             "' (expected topsis or weighted-sum)");
}

// Zero-avoidance offset applied after min-max scaling so that the entropy
// step never takes log(0).
constexpr double kZeroOffset = 1e-4;

/// Extreme-value (min-max) scaling in the given direction, then
/// (x' + eps) / (1 + eps) so every entry lies in (0, 1].
inline std::vector<double> normalize_minmax(std::span<const double> column,
                                            Direction dir,
                                            const std::string& name = "column",
                                            double offset = kZeroOffset) {
  if (column.size() < 2)
    fail(ErrorKind::domain, "indicator '" + name + "' needs >= 2 observations");
  auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo))
    fail(ErrorKind::domain, "degenerate column: indicator '" + name +
                                "' is constant (max == min)");
  const double range = hi - lo;
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    double s = dir == Direction::positive ? (column[i] - lo) / range
                                          : (hi - column[i]) / range;
    out[i] = (s + offset) / (1.0 + offset);
  }
  return out;
}

/// Standard entropy weights. Rows are observations, columns indicators.
inline Eigen::VectorXd entropy_weights(const Eigen::MatrixXd& normalized) {
  const Eigen::Index n = normalized.rows(), m = normalized.cols();
  if (n < 2) fail(ErrorKind::domain, "entropy weights need >= 2 observations");
  if (m < 1) fail(ErrorKind::domain, "entropy weights need >= 1 indicator");
  if ((normalized.array() <= 0).any() || !normalized.allFinite())
    fail(ErrorKind::domain, "entropy weights need strictly positive entries");
  const double k = 1.0 / std::log(static_cast<double>(n));
  Eigen::VectorXd d(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double total = normalized.col(j).sum();
    double h = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = normalized(i, j) / total;
      h += p * std::log(p);
    }
    d(j) = std::max(0.0, 1.0 + k * h);
  }
  const double dsum = d.sum();
  if (!(dsum > 0))
    fail(ErrorKind::domain,
         "entropy weights undefined: every indicator column is uniform");
  return d / dsum;
}

/// Aggregates normalized rows into one score per observation.
/// weighted-sum: s = sum_j w_j x_j. topsis: relative closeness D- / (D+ + D-)
/// with weighted Euclidean distances to the column-wise ideal (max) and
/// anti-ideal (min).
inline Eigen::VectorXd composite_index(const Eigen::MatrixXd& normalized,
                                       const Eigen::VectorXd& weights,
                                       Aggregation method) {
  if (normalized.cols() != weights.size())
    fail(ErrorKind::domain, "dimension mismatch: " +
                                std::to_string(normalized.cols()) +
                                " indicator columns vs " +
                                std::to_string(weights.size()) + " weights");
  if (std::abs(weights.sum() - 1.0) > 1e-9 || (weights.array() < 0).any())
    fail(ErrorKind::domain, "weights must be nonnegative and sum to 1");
  const Eigen::Index n = normalized.rows();
  Eigen::VectorXd score(n);
  if (method == Aggregation::weighted_sum) {
    score = normalized * weights;
  } else {
    const Eigen::MatrixXd v = normalized * weights.asDiagonal();
    const Eigen::RowVectorXd ideal = v.colwise().maxCoeff();
    const Eigen::RowVectorXd anti = v.colwise().minCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dp = (v.row(i) - ideal).norm();
      const double dm = (v.row(i) - anti).norm();
      // All rows identical: every row is the ideal.
      score(i) = dp + dm > 0 ? dm / (dp + dm) : 1.0;
    }
  }
  return score.cwiseMax(0.0).cwiseMin(1.0);
}

struct IndexResult {
  std::vector<std::string> entities;
  std::vector<int> years;
  std::vector<std::string> indicator_names;
  Eigen::MatrixXd normalized;  // rows entity-major, like PanelDataset
  Eigen::VectorXd weights;
  Eigen::VectorXd scores;
  Aggregation method = Aggregation::topsis;
  Pooling pooling = Pooling::pooled;
};

inline IndexResult build_index(const PanelDataset& panel,
                               const IndicatorSystem& system,
                               Aggregation method = Aggregation::topsis,
                               Pooling pooling = Pooling::pooled) {
  if (system.empty()) fail(ErrorKind::domain, "indicator system is empty");
  const auto n = static_cast<Eigen::Index>(panel.rows());
  IndexResult r;
  r.entities = panel.entities();
  r.years = panel.years();
  r.method = method;
  r.pooling = pooling;
  r.normalized.resize(n, static_cast<Eigen::Index>(system.size()));
  for (std::size_t j = 0; j < system.size(); ++j) {
    const auto& ind = system[j];
    if (!panel.has(ind.variable))
      fail(ErrorKind::schema, "indicator '" + ind.name +
                                  "' binds to missing variable '" +
                                  ind.variable + "'");
    r.indicator_names.push_back(ind.name);
    auto col = panel.column(ind.variable);
    if (pooling == Pooling::pooled) {
      auto z = normalize_minmax(col, ind.direction, ind.name);
      for (Eigen::Index i = 0; i < n; ++i)
        r.normalized(i, static_cast<Eigen::Index>(j)) = z[static_cast<std::size_t>(i)];
    } else {
      std::vector<double> cross(panel.n_entities());
      for (std::size_t t = 0; t < panel.n_years(); ++t) {
        for (std::size_t e = 0; e < panel.n_entities(); ++e)
          cross[e] = col[panel.row(e, t)];
        auto z = normalize_minmax(cross, ind.direction,
                                  ind.name + " in " +
                                      std::to_string(panel.years()[t]));
        for (std::size_t e = 0; e < panel.n_entities(); ++e)
          r.normalized(static_cast<Eigen::Index>(panel.row(e, t)),
                       static_cast<Eigen::Index>(j)) = z[e];
      }
    }
  }
  r.weights = entropy_weights(r.normalized);
  r.scores = composite_index(r.normalized, r.weights, method);
  return r;
}

inline Direction parse_direction(const std::string& s) {
  if (s == "+" || s == "positive") return Direction::positive;
  if (s == "-" || s == "negative" || s == "\xE2\x88\x92") return Direction::negative;
  fail(ErrorKind::schema, "indicator direction must be '+' or '-', got '" + s + "'");
}

/// `[{"name": ..., "direction": "+", "variable": ..., "group": ...}]`
inline IndicatorSystem parse_indicator_system(const nlohmann::json& j) {
  if (!j.is_array()) fail(ErrorKind::schema, "indicator system must be a JSON array");
  IndicatorSystem sys;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("name") ||
        !item.contains("direction") || !item.contains("variable"))
      fail(ErrorKind::schema,
           "each indicator needs 'name', 'direction' and 'variable'");
    Indicator ind;
    ind.name = item.at("name").get<std::string>();
    ind.direction = parse_direction(item.at("direction").get<std::string>());
    ind.variable = item.at("variable").get<std::string>();
    if (item.contains("group")) ind.group = item.at("group").get<std::string>();
    sys.push_back(std::move(ind));
  }
  return sys;
}

inline nlohmann::json to_json(const IndicatorSystem& sys) {
  auto arr = nlohmann::json::array();
  for (const auto& ind : sys) {
    nlohmann::json o = {{"name", ind.name},
                        {"direction", ind.direction == Direction::positive ? "+" : "-"},
                        {"variable", ind.variable}};
    if (!ind.group.empty()) o["group"] = ind.group;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline std::string format_scores_csv(const IndexResult& r) {
  std::string out = "entity,year,score\n";
  const std::size_t T = r.years.size();
  for (std::size_t e = 0; e < r.entities.size(); ++e)
    for (std::size_t t = 0; t < T; ++t)
      out += io::csv_escape(r.entities[e]) + "," + std::to_string(r.years[t]) +
             "," + io::format_double(r.scores(static_cast<Eigen::Index>(e * T + t))) +
             "\n";
  return out;
}

inline nlohmann::json weights_json(const IndexResult& r) {
  nlohmann::json w = nlohmann::json::object();
  for (std::size_t j = 0; j < r.indicator_names.size(); ++j)
    w[r.indicator_names[j]] = r.weights(static_cast<Eigen::Index>(j));
  return {{"method", to_string(r.method)},
          {"pooling", r.pooling == Pooling::pooled ? "pooled" : "per-year"},
          {"zero_offset", kZeroOffset},
          {"weights", w}};
}

}  // namespace gpm::index
