#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpm/error.hpp"
#include "gpm/io.hpp"

namespace gpm {

// Balanced long-format panel: every (entity, year) cell holds a value for
// every variable. Observations are stored entity-major, so row
// `e * years().size() + t` is entity e in year index t.
class PanelDataset {
 public:
  PanelDataset() = default;

  PanelDataset(std::vector<std::string> entities, std::vector<int> years,
               std::vector<std::string> variables)
      : entities_(std::move(entities)),
        years_(std::move(years)),
        variables_(std::move(variables)) {
    if (entities_.empty() || years_.empty())
      fail(ErrorKind::domain, "panel needs at least one entity and one year");
    for (std::size_t i = 1; i < years_.size(); ++i)
      if (years_[i] <= years_[i - 1])
        fail(ErrorKind::domain, "panel years must be strictly increasing");
    for (std::size_t i = 0; i < entities_.size(); ++i)
      for (std::size_t j = i + 1; j < entities_.size(); ++j)
        if (entities_[i] == entities_[j])
          fail(ErrorKind::domain, "duplicate entity '" + entities_[i] + "'");
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      if (index_.count(variables_[v]))
        fail(ErrorKind::schema, "duplicate variable '" + variables_[v] + "'");
      index_[variables_[v]] = v;
    }
    data_.assign(variables_.size(), std::vector<double>(rows(), 0.0));
  }

  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<int>& years() const { return years_; }
  const std::vector<std::string>& variables() const { return variables_; }

  std::size_t n_entities() const { return entities_.size(); }
  std::size_t n_years() const { return years_.size(); }
  std::size_t rows() const { return entities_.size() * years_.size(); }

  bool has(const std::string& var) const { return index_.count(var) != 0; }

  std::size_t var_index(const std::string& var) const {
    auto it = index_.find(var);
    if (it == index_.end())
      fail(ErrorKind::schema, "unknown variable '" + var + "'");
    return it->second;
  }

  std::size_t row(std::size_t entity, std::size_t year_idx) const {
    return entity * years_.size() + year_idx;
  }

  double at(std::size_t entity, std::size_t year_idx,
            const std::string& var) const {
    return data_[var_index(var)][row(entity, year_idx)];
  }

  void set(std::size_t entity, std::size_t year_idx, const std::string& var,
           double value) {
    data_[var_index(var)][row(entity, year_idx)] = value;
  }

  std::span<const double> column(const std::string& var) const {
    return data_[var_index(var)];
  }

  Eigen::VectorXd vector(const std::string& var) const {
    auto c = column(var);
    return Eigen::Map<const Eigen::VectorXd>(c.data(),
                                             static_cast<Eigen::Index>(c.size()));
  }

  // Adds (or overwrites) a variable column in entity-major order.
  void put_column(const std::string& var, std::span<const double> values) {
    if (values.size() != rows())
      fail(ErrorKind::domain, "column '" + var + "' has wrong length");
    if (!has(var)) {
      index_[var] = variables_.size();
      variables_.push_back(var);
      data_.emplace_back(rows(), 0.0);
    }
    std::copy(values.begin(), values.end(), data_[var_index(var)].begin());
  }

  // Sub-panel restricted to years in [from, to].
  PanelDataset filter_years(int from, int to) const {
    std::vector<int> keep;
    for (int y : years_)
      if (y >= from && y <= to) keep.push_back(y);
    if (keep.empty())
      fail(ErrorKind::domain, "no years in range " + std::to_string(from) +
                                  ".." + std::to_string(to));
    PanelDataset out(entities_, keep, variables_);
    for (std::size_t e = 0; e < n_entities(); ++e)
      for (std::size_t t = 0, k = 0; t < n_years(); ++t) {
        if (years_[t] < from || years_[t] > to) continue;
        for (std::size_t v = 0; v < variables_.size(); ++v)
          out.data_[v][out.row(e, k)] = data_[v][row(e, t)];
        ++k;
      }
    return out;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<int> years_;
  std::vector<std::string> variables_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> data_;
};

/// Parses a long-format panel (`entity,year,var1,...`). When `schema` is
/// non-empty only those variables are kept and each must be present;
/// otherwise every non-key column is loaded. Rows may arrive in any order,
/// but the (entity, year) grid must be complete.
inline PanelDataset parse_panel_csv(std::string_view text,
                                    const std::vector<std::string>& schema,
                                    const std::string& source = "panel") {
  auto table = io::parse_csv(text, source);
  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return i;
    return std::nullopt;
  };
  auto ent_col = find_col("entity");
  if (!ent_col) fail(ErrorKind::schema, source + ": missing column 'entity'");
  auto year_col = find_col("year");
  if (!year_col) fail(ErrorKind::schema, source + ": missing column 'year'");

  std::vector<std::string> vars = schema;
  if (vars.empty())
    for (const auto& h : table.header)
      if (h != "entity" && h != "year") vars.push_back(h);
  std::vector<std::size_t> var_cols;
  for (const auto& v : vars) {
    auto c = find_col(v);
    if (!c) fail(ErrorKind::schema, source + ": missing column '" + v + "'");
    var_cols.push_back(*c);
  }

  std::vector<std::string> entities;
  std::map<int, bool> year_set;
  std::unordered_map<std::string, std::size_t> ent_index;
  std::vector<int> row_years(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& name = table.rows[r][*ent_col];
    if (!ent_index.count(name)) {
      ent_index[name] = entities.size();
      entities.push_back(name);
    }
    int y = 0;
    if (!io::parse_int(table.rows[r][*year_col], y))
      fail(ErrorKind::parse, source + ": row " +
                                 std::to_string(table.line_numbers[r]) +
                                 ": year is not an integer: '" +
                                 table.rows[r][*year_col] + "'");
    row_years[r] = y;
    year_set[y] = true;
  }
  if (entities.empty()) fail(ErrorKind::schema, source + ": no data rows");
  std::vector<int> years;
  for (const auto& [y, _] : year_set) years.push_back(y);

  PanelDataset panel(entities, years, vars);
  std::vector<char> seen(panel.rows(), 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::size_t e = ent_index[table.rows[r][*ent_col]];
    std::size_t t = static_cast<std::size_t>(
        std::lower_bound(years.begin(), years.end(), row_years[r]) -
        years.begin());
    std::size_t obs = panel.row(e, t);
    if (seen[obs])
      fail(ErrorKind::balance, source + ": duplicate cell (" + entities[e] +
                                   ", " + std::to_string(years[t]) + ")");
    seen[obs] = 1;
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const auto& cell = table.rows[r][var_cols[v]];
      double value = 0;
      if (!io::parse_double(cell, value))
        fail(ErrorKind::parse, source + ": row " +
                                   std::to_string(table.line_numbers[r]) +
                                   ": column '" + vars[v] +
                                   "' is not numeric: '" + cell + "'");
      if (!std::isfinite(value))
        fail(ErrorKind::parse, source + ": row " +
                                   std::to_string(table.line_numbers[r]) +
                                   ": column '" + vars[v] + "' is not finite");
      panel.set(e, t, vars[v], value);
    }
  }

  std::string missing;
  std::size_t n_missing = 0;
  for (std::size_t e = 0; e < entities.size(); ++e)
    for (std::size_t t = 0; t < years.size(); ++t)
      if (!seen[panel.row(e, t)]) {
        if (n_missing < 20)
          missing += (n_missing ? ", (" : "(") + entities[e] + ", " +
                     std::to_string(years[t]) + ")";
        ++n_missing;
      }
  if (n_missing)
    fail(ErrorKind::balance, source + ": unbalanced panel, missing cell" +
                                 (n_missing > 1 ? "s " : " ") + missing +
                                 (n_missing > 20 ? ", ..." : ""));
  return panel;
}

inline PanelDataset load_panel_csv(const std::filesystem::path& path,
                                   const std::vector<std::string>& schema = {}) {
  return parse_panel_csv(io::read_file(path), schema, path.string());
}

inline std::string format_panel_csv(const PanelDataset& panel) {
  std::string out = "entity,year";
  for (const auto& v : panel.variables()) out += "," + io::csv_escape(v);
  out += "\n";
  for (std::size_t e = 0; e < panel.n_entities(); ++e)
    for (std::size_t t = 0; t < panel.n_years(); ++t) {
      out += io::csv_escape(panel.entities()[e]) + "," +
             std::to_string(panel.years()[t]);
      for (const auto& v : panel.variables())
        out += "," + io::format_double(panel.at(e, t, v));
      out += "\n";
    }
  return out;
}

inline void write_panel_csv(const PanelDataset& panel,
                            const std::filesystem::path& path) {
  io::write_file_atomic(path, format_panel_csv(panel));
}

// ---------------------------------------------------------------------------
// Spatial weights

struct GeoPoint {
  double lat = 0;  // degrees
  double lon = 0;  // degrees
};

struct SpatialWeights {
  Eigen::MatrixXd matrix;
  bool row_standardized = false;

  std::size_t n() const { return static_cast<std::size_t>(matrix.rows()); }

  // True when every row sums to 1 within tol. A zero row fails this check.
  bool rows_sum_to_one(double tol = 1e-12) const {
    if (matrix.rows() == 0) return false;
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
      if (std::abs(matrix.row(i).sum() - 1.0) > tol) return false;
    return true;
  }
};

constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle (haversine) distance in kilometres.
inline double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  double dlat = (b.lat - a.lat) * deg;
  double dlon = (b.lon - a.lon) * deg;
  double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(a.lat * deg) * std::cos(b.lat * deg) *
                 std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

inline void row_standardize(SpatialWeights& w) {
  for (Eigen::Index i = 0; i < w.matrix.rows(); ++i) {
    double s = w.matrix.row(i).sum();
    if (s > 0) w.matrix.row(i) /= s;
  }
  w.row_standardized = true;
}

/// w_ij = 1 / d_ij with d_ij the great-circle distance in km; zero diagonal.
inline SpatialWeights build_inverse_distance_weights(
    std::span<const GeoPoint> coords, bool standardize) {
  const auto n = static_cast<Eigen::Index>(coords.size());
  if (n < 2) fail(ErrorKind::domain, "inverse-distance weights need n >= 2");
  SpatialWeights w;
  w.matrix = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = haversine_km(coords[i], coords[j]);
      if (!(d > 0))
        fail(ErrorKind::domain, "duplicate coordinates for entities " +
                                    std::to_string(i) + " and " +
                                    std::to_string(j) + " (infinite weight)");
      w.matrix(i, j) = w.matrix(j, i) = 1.0 / d;
    }
  if (standardize) row_standardize(w);
  return w;
}

struct EntityCoords {
  std::vector<std::string> entities;
  std::vector<GeoPoint> points;
};

inline EntityCoords parse_coords_csv(std::string_view text,
                                     const std::string& source = "coords") {
  auto table = io::parse_csv(text, source);
  if (table.header.size() != 3 || table.header[0] != "entity" ||
      table.header[1] != "lat" || table.header[2] != "lon")
    fail(ErrorKind::schema, source + ": expected header 'entity,lat,lon'");
  EntityCoords out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    GeoPoint p;
    if (!io::parse_double(table.rows[r][1], p.lat) ||
        !io::parse_double(table.rows[r][2], p.lon))
      fail(ErrorKind::parse, source + ": row " +
                                 std::to_string(table.line_numbers[r]) +
                                 ": bad coordinate");
    out.entities.push_back(table.rows[r][0]);
    out.points.push_back(p);
  }
  return out;
}

// Reorders coordinates to match the panel's entity order.
inline std::vector<GeoPoint> align_coords(const EntityCoords& coords,
                                          const std::vector<std::string>& order) {
  std::vector<GeoPoint> out;
  for (const auto& e : order) {
    auto it = std::find(coords.entities.begin(), coords.entities.end(), e);
    if (it == coords.entities.end())
      fail(ErrorKind::schema, "no coordinates for entity '" + e + "'");
    out.push_back(coords.points[static_cast<std::size_t>(
        it - coords.entities.begin())]);
  }
  return out;
}

/// Approximate city-centre coordinates for the four Hainan prefecture-level
/// cities. Reconstructed from public gazetteer positions; not the matrix any
/// published estimate used.
inline EntityCoords hainan_preset_coords() {
  return {{"Haikou", "Sanya", "Sansha", "Danzhou"},
          {{20.044, 110.199}, {18.253, 109.512}, {16.834, 112.339},
           {19.521, 109.580}}};
}

inline std::string format_coords_csv(const EntityCoords& c) {
  std::string out = "entity,lat,lon\n";
  for (std::size_t i = 0; i < c.entities.size(); ++i)
    out += io::csv_escape(c.entities[i]) + "," +
           io::format_double(c.points[i].lat) + "," +
           io::format_double(c.points[i].lon) + "\n";
  return out;
}

/// Dense weight matrix CSV: header `entity,<e1>,...,<en>`, one row per entity.
inline SpatialWeights parse_weights_matrix_csv(
    std::string_view text, const std::vector<std::string>& order,
    const std::string& source = "weights") {
  auto table = io::parse_csv(text, source);
  const std::size_t n = order.size();
  if (table.header.size() != n + 1 || table.header[0] != "entity" ||
      table.rows.size() != n)
    fail(ErrorKind::schema,
         source + ": expected an " + std::to_string(n) + "x" +
             std::to_string(n) + " matrix with header 'entity,<names>'");
  auto pos = [&](const std::string& name) {
    auto it = std::find(order.begin(), order.end(), name);
    if (it == order.end())
      fail(ErrorKind::schema, source + ": unknown entity '" + name + "'");
    return static_cast<Eigen::Index>(it - order.begin());
  };
  SpatialWeights w;
  w.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    auto i = pos(table.rows[r][0]);
    for (std::size_t c = 1; c <= n; ++c) {
      double v = 0;
      if (!io::parse_double(table.rows[r][c], v) || !std::isfinite(v) || v < 0)
        fail(ErrorKind::parse, source + ": row " +
                                   std::to_string(table.line_numbers[r]) +
                                   ": weights must be finite and >= 0");
      w.matrix(i, pos(table.header[c])) = v;
    }
  }
  for (Eigen::Index i = 0; i < w.matrix.rows(); ++i)
    if (w.matrix(i, i) != 0)
      fail(ErrorKind::domain, source + ": weight matrix diagonal must be zero");
  w.row_standardized = w.rows_sum_to_one();
  return w;
}

}  // namespace gpm
