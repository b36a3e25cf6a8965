#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpm/error.hpp"
#include "json.hpp"

namespace gpm::fusion {

enum class KernelKind { gaussian, uniform, epanechnikov };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::uniform: return "uniform";
    case KernelKind::epanechnikov: return "epanechnikov";
  }
  return "gaussian";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "gaussian") return KernelKind::gaussian;
  if (s == "uniform") return KernelKind::uniform;
  if (s == "epanechnikov") return KernelKind::epanechnikov;
  fail(ErrorKind::schema, "unknown kernel '" + s + "'");
}

// Window function phi(u): nonnegative, unit integral.
inline double window(KernelKind k, double u) {
  switch (k) {
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2 * std::numbers::pi);
    case KernelKind::uniform:
      return std::abs(u) <= 1 ? 0.5 : 0.0;
    case KernelKind::epanechnikov:
      return std::abs(u) <= 1 ? 0.75 * (1 - u * u) : 0.0;
  }
  return 0;
}

namespace detail {

// Composite Simpson over the kernel's support ([-1, 1] for the compact
// kernels, [-12, 12] for the gaussian).
inline double window_integral(KernelKind k) {
  const double a = k == KernelKind::gaussian ? -12.0 : -1.0;
  const double b = -a;
  const int n = 20000;
  const double h = (b - a) / n;
  double s = window(k, a) + window(k, b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * window(k, a + i * h);
  return s * h / 3;
}

inline void verify_window(KernelKind k) {
  static const bool ok[3] = {
      std::abs(window_integral(KernelKind::gaussian) - 1) <= 1e-6,
      std::abs(window_integral(KernelKind::uniform) - 1) <= 1e-6,
      std::abs(window_integral(KernelKind::epanechnikov) - 1) <= 1e-6,
  };
  if (!ok[static_cast<int>(k)])
    fail(ErrorKind::numeric, std::string("kernel '") + to_string(k) +
                                 "' does not integrate to 1");
}

}  // namespace detail

/// Window kind plus bandwidth. An empty bandwidth vector selects the
/// rule-of-thumb h = count^(-1/5) * sd per class and feature; one entry is
/// shared by every feature; otherwise one entry per feature.
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  std::vector<double> bandwidth;

  KernelSpec() { detail::verify_window(kind); }

  explicit KernelSpec(KernelKind k, std::vector<double> h = {})
      : kind(k), bandwidth(std::move(h)) {
    detail::verify_window(kind);
    for (double v : bandwidth)
      if (!(v > 0) || !std::isfinite(v))
        fail(ErrorKind::domain, "kernel bandwidth must be positive");
  }
};

/// P_N(x) = (1/N) sum_i (1/h) phi((x - x_i) / h), with the window volume
/// taken as h in one dimension.
inline double parzen_density(std::span<const double> samples, KernelKind kind,
                             double h, double x) {
  if (samples.empty()) fail(ErrorKind::domain, "parzen density needs >= 1 sample");
  if (!(h > 0)) fail(ErrorKind::domain, "parzen bandwidth must be positive");
  double s = 0;
  for (double xi : samples) s += window(kind, (x - xi) / h);
  return s / (static_cast<double>(samples.size()) * h);
}

// Rule-of-thumb bandwidth: count^(-1/5) times the sample standard deviation,
// falling back to unit spread when the column has no variation.
inline double default_bandwidth(std::span<const double> column) {
  const double n = static_cast<double>(column.size());
  double mean = 0;
  for (double v : column) mean += v;
  mean /= n;
  double var = 0;
  for (double v : column) var += (v - mean) * (v - mean);
  const double sd = column.size() > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  return std::pow(n, -0.2) * (sd > 0 ? sd : 1.0);
}

struct FusionClass {
  std::string label;
  double utility = 1.0;
  std::vector<std::vector<double>> samples;  // rows: observations, cols: features
};

struct FusionModel {
  std::vector<FusionClass> classes;
  KernelSpec kernel;

  std::size_t features() const {
    return classes.empty() || classes.front().samples.empty()
               ? 0
               : classes.front().samples.front().size();
  }
};

inline void validate(const FusionModel& m) {
  if (m.classes.empty()) fail(ErrorKind::domain, "fusion model has no classes");
  const std::size_t k = m.features();
  if (k == 0) fail(ErrorKind::domain, "fusion model has no features");
  for (const auto& c : m.classes) {
    if (c.samples.empty())
      fail(ErrorKind::domain, "class '" + c.label + "' has no samples");
    for (const auto& row : c.samples) {
      if (row.size() != k)
        fail(ErrorKind::domain, "class '" + c.label + "' has a sample with " +
                                    std::to_string(row.size()) +
                                    " features, expected " + std::to_string(k));
      for (double v : row)
        if (!std::isfinite(v))
          fail(ErrorKind::domain, "class '" + c.label + "' has a non-finite sample");
    }
    if (!std::isfinite(c.utility))
      fail(ErrorKind::domain, "class '" + c.label + "' has a non-finite utility");
  }
  if (m.kernel.bandwidth.size() > 1 && m.kernel.bandwidth.size() != k)
    fail(ErrorKind::domain, "bandwidth vector length must be 1 or the feature count");
}

inline std::vector<double> feature_column(const FusionClass& c, std::size_t j) {
  std::vector<double> col(c.samples.size());
  for (std::size_t i = 0; i < c.samples.size(); ++i) col[i] = c.samples[i][j];
  return col;
}

inline double bandwidth_for(const FusionModel& m, const FusionClass& c,
                            std::size_t j, std::span<const double> column) {
  if (m.kernel.bandwidth.empty()) return default_bandwidth(column);
  (void)c;
  return m.kernel.bandwidth.size() == 1 ? m.kernel.bandwidth[0]
                                        : m.kernel.bandwidth[j];
}

/// Sum over features of ln P(x_j | F_i); -inf when any factor is zero.
inline double class_log_density(const FusionModel& m, std::size_t cls,
                                std::span<const double> obs) {
  if (cls >= m.classes.size())
    fail(ErrorKind::domain, "class index " + std::to_string(cls) + " out of range");
  if (obs.size() != m.features())
    fail(ErrorKind::domain, "observation has " + std::to_string(obs.size()) +
                                " features, model expects " +
                                std::to_string(m.features()));
  const auto& c = m.classes[cls];
  double s = 0;
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const auto col = feature_column(c, j);
    const double p = parzen_density(col, m.kernel.kind, bandwidth_for(m, c, j, col),
                                    obs[j]);
    if (!(p > 0)) return -std::numeric_limits<double>::infinity();
    s += std::log(p);
  }
  return s;
}

/// Product over features of the per-feature Parzen densities (features are
/// treated as independently observed).
inline double class_conditional_density(const FusionModel& m, std::size_t cls,
                                        std::span<const double> obs) {
  return std::exp(class_log_density(m, cls, obs));
}

struct FusionDecision {
  // Empty when no class scored above zero ("no evidence").
  std::optional<std::size_t> chosen;
  std::vector<double> scores;         // density * utility
  std::vector<double> log_densities;  // ln P(obs | F_i)
  std::vector<double> densities;

  bool no_evidence() const { return !chosen.has_value(); }
};

/// Expected-utility fusion: for i = 1..m compute mu_i = P(obs | F_i) * I_i
/// and keep the running maximum, starting from a result of zero. Comparison
/// happens in the log domain so that products of many small densities do not
/// underflow. Ties keep the earlier class.
inline FusionDecision fuse_decision(const FusionModel& m, std::span<const double> obs) {
  validate(m);
  FusionDecision d;
  const std::size_t n = m.classes.size();
  d.scores.resize(n);
  d.log_densities.resize(n);
  d.densities.resize(n);
  double best_log_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double ld = class_log_density(m, i, obs);
    const double u = m.classes[i].utility;
    d.log_densities[i] = ld;
    d.densities[i] = std::exp(ld);
    d.scores[i] = d.densities[i] * u;
    // Only strictly positive mu can beat the initial result of zero.
    if (!(u > 0) || ld == -std::numeric_limits<double>::infinity()) continue;
    const double ls = ld + std::log(u);
    if (ls > best_log_score) {
      best_log_score = ls;
      d.chosen = i;
    }
  }
  return d;
}

/// Returns a copy with `obs` appended to class `cls`'s sample matrix.
inline FusionModel append_observation(FusionModel m, std::size_t cls,
                                      std::span<const double> obs) {
  if (cls >= m.classes.size())
    fail(ErrorKind::domain, "class index " + std::to_string(cls) + " out of range");
  if (m.features() != 0 && obs.size() != m.features())
    fail(ErrorKind::domain, "observation has " + std::to_string(obs.size()) +
                                " features, model expects " +
                                std::to_string(m.features()));
  m.classes[cls].samples.emplace_back(obs.begin(), obs.end());
  return m;
}

// JSON layout:
// {"kernel": {"kind": "gaussian", "bandwidth": 0.5 | [..] (optional)},
//  "classes": [{"label": "F1", "utility": 1.0, "samples": [[..], ..]}, ..]}
inline FusionModel model_from_json(const nlohmann::json& j) {
  FusionModel m;
  try {
    KernelKind kind = KernelKind::gaussian;
    std::vector<double> h;
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      if (k.contains("kind")) kind = parse_kernel_kind(k.at("kind").get<std::string>());
      if (k.contains("bandwidth") && !k.at("bandwidth").is_null()) {
        const auto& b = k.at("bandwidth");
        if (b.is_number())
          h.push_back(b.get<double>());
        else
          h = b.get<std::vector<double>>();
      }
    }
    m.kernel = KernelSpec(kind, h);
    for (const auto& c : j.at("classes")) {
      FusionClass fc;
      fc.label = c.value("label", "F" + std::to_string(m.classes.size() + 1));
      fc.utility = c.value("utility", 1.0);
      fc.samples = c.at("samples").get<std::vector<std::vector<double>>>();
      m.classes.push_back(std::move(fc));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::schema, std::string("fusion model JSON: ") + e.what());
  }
  validate(m);
  return m;
}

inline nlohmann::json to_json(const FusionModel& m) {
  nlohmann::json kernel = {{"kind", to_string(m.kernel.kind)}};
  if (m.kernel.bandwidth.size() == 1)
    kernel["bandwidth"] = m.kernel.bandwidth[0];
  else if (!m.kernel.bandwidth.empty())
    kernel["bandwidth"] = m.kernel.bandwidth;
  auto classes = nlohmann::json::array();
  for (const auto& c : m.classes)
    classes.push_back({{"label", c.label}, {"utility", c.utility}, {"samples", c.samples}});
  return {{"kernel", kernel}, {"classes", classes}};
}

inline nlohmann::json to_json(const FusionDecision& d, const FusionModel& m) {
  auto classes = nlohmann::json::array();
  for (std::size_t i = 0; i < d.scores.size(); ++i)
    classes.push_back({{"index", i},
                       {"label", m.classes[i].label},
                       {"utility", m.classes[i].utility},
                       {"density", d.densities[i]},
                       {"log_density", d.log_densities[i]},
                       {"score", d.scores[i]}});
  nlohmann::json j = {{"classes", classes}, {"no_evidence", d.no_evidence()}};
  if (d.chosen) {
    j["chosen"] = *d.chosen;
    j["chosen_label"] = m.classes[*d.chosen].label;
  } else {
    j["chosen"] = nullptr;
  }
  return j;
}

}  // namespace gpm::fusion
