#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpm/core_data.hpp"
#include "gpm/index_builder.hpp"
#include "gpm/parzen_fusion.hpp"

// Seeded synthetic data. Every generator consumes one explicit seed and
// produces identical output on every platform: the engine is mt19937_64
// (fully specified) and the uniform/normal transforms are written out here
// instead of using the implementation-defined <random> distributions.
namespace gpm::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal by Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0;
    do u1 = uniform(); while (u1 <= 0);
    const double u2 = uniform();
    const double r = std::sqrt(-2 * std::log(u1));
    spare_ = r * std::sin(2 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t bits() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool has_spare_ = false;
};

inline std::vector<std::string> entity_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("e" + std::to_string(i + 1));
  return out;
}

inline std::vector<int> year_range(int first, std::size_t T) {
  std::vector<int> out;
  for (std::size_t t = 0; t < T; ++t) out.push_back(first + static_cast<int>(t));
  return out;
}

/// y = sum_k beta_k x_k + mu_i + (optional delta_t) + N(0, sigma^2), with
/// regressors x1..xK drawn independently of the effects.
inline PanelDataset fe_panel(std::uint64_t seed, std::size_t n, std::size_t T,
                             const std::vector<double>& beta, double sigma,
                             bool time_effects = false) {
  Rng rng(seed);
  std::vector<std::string> vars{"y"};
  for (std::size_t k = 0; k < beta.size(); ++k) vars.push_back("x" + std::to_string(k + 1));
  PanelDataset p(entity_names(n), year_range(2000, T), vars);
  std::vector<double> mu(n), dt(T, 0.0);
  for (auto& m : mu) m = rng.normal(0, 1);
  if (time_effects)
    for (auto& d : dt) d = rng.normal(0, 0.5);
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t t = 0; t < T; ++t) {
      double y = mu[e] + dt[t] + rng.normal(0, sigma);
      for (std::size_t k = 0; k < beta.size(); ++k) {
        const double x = rng.normal(0, 1) + 0.3 * mu[e];
        p.set(e, t, vars[k + 1], x);
        y += beta[k] * x;
      }
      p.set(e, t, "y", y);
    }
  return p;
}

struct SdmData {
  PanelDataset panel;
  SpatialWeights weights;
  std::vector<GeoPoint> coords;
};

/// Two-way fixed-effect SDM: y_t = (I - rho W)^-1 (X_t beta + W X_t theta +
/// mu + delta_t 1 + eps_t) with inverse-distance W over random locations.
/// With clusters == 0 the locations are uniform over a 2 x 2.5 degree box;
/// otherwise they form `clusters` tight groups (0.05 degree spread) scattered
/// over a 30 x 30 degree region. A uniform layout makes W nearly
/// rank-one, which leaves rho weakly identified once time effects absorb the
/// unit eigenvector.
inline SdmData sdm_panel(std::uint64_t seed, std::size_t n, std::size_t T, double rho,
                         const std::vector<double>& beta,
                         const std::vector<double>& theta, double sigma,
                         std::size_t clusters = 0) {
  Rng rng(seed);
  SdmData d;
  if (clusters == 0) {
    for (std::size_t i = 0; i < n; ++i)
      d.coords.push_back({rng.uniform(18.0, 20.0), rng.uniform(108.5, 111.0)});
  } else {
    std::vector<GeoPoint> centers;
    for (std::size_t c = 0; c < clusters; ++c)
      centers.push_back({rng.uniform(10.0, 40.0), rng.uniform(90.0, 120.0)});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = centers[i % clusters];
      d.coords.push_back({c.lat + rng.normal(0, 0.05), c.lon + rng.normal(0, 0.05)});
    }
  }
  d.weights = build_inverse_distance_weights(d.coords, true);
  std::vector<std::string> vars{"y"};
  for (std::size_t k = 0; k < beta.size(); ++k) vars.push_back("x" + std::to_string(k + 1));
  d.panel = PanelDataset(entity_names(n), year_range(2000, T), vars);
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::VectorXd mu(N);
  for (auto& m : mu) m = rng.normal(0, 1);
  const Eigen::MatrixXd A =
      Eigen::MatrixXd::Identity(N, N) - rho * d.weights.matrix;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  for (std::size_t t = 0; t < T; ++t) {
    const double dt = rng.normal(0, 0.5);
    Eigen::MatrixXd X(N, static_cast<Eigen::Index>(beta.size()));
    for (Eigen::Index i = 0; i < N; ++i)
      for (Eigen::Index k = 0; k < X.cols(); ++k) X(i, k) = rng.normal(0, 1);
    const Eigen::MatrixXd WX = d.weights.matrix * X;
    Eigen::VectorXd rhs = mu + Eigen::VectorXd::Constant(N, dt);
    for (Eigen::Index k = 0; k < X.cols(); ++k)
      rhs += beta[static_cast<std::size_t>(k)] * X.col(k) +
             theta[static_cast<std::size_t>(k)] * WX.col(k);
    for (Eigen::Index i = 0; i < N; ++i) rhs(i) += rng.normal(0, sigma);
    const Eigen::VectorXd y = lu.solve(rhs);
    for (std::size_t e = 0; e < n; ++e) {
      d.panel.set(e, t, "y", y(static_cast<Eigen::Index>(e)));
      for (std::size_t k = 0; k < beta.size(); ++k)
        d.panel.set(e, t, vars[k + 1], X(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(k)));
    }
  }
  return d;
}

/// Threshold panel: y = low * dei * 1(tr <= gamma) + high * dei * 1(tr > gamma)
/// + control_beta * ctrl + mu_i + noise. `tr` is uniform on [0.1, 0.5].
inline PanelDataset threshold_panel(std::uint64_t seed, std::size_t n, std::size_t T,
                                    double gamma, double low, double high,
                                    double control_beta, double sigma) {
  Rng rng(seed);
  PanelDataset p(entity_names(n), year_range(2000, T), {"y", "dei", "ctrl", "tr"});
  for (std::size_t e = 0; e < n; ++e) {
    const double mu = rng.normal(0, 1);
    for (std::size_t t = 0; t < T; ++t) {
      const double dei = rng.uniform(0.0, 1.0) + 0.2 * mu;
      const double ctrl = rng.normal(0, 1);
      const double tr = rng.uniform(0.1, 0.5);
      const double slope = tr <= gamma ? low : high;
      p.set(e, t, "y", slope * dei + control_beta * ctrl + mu + rng.normal(0, sigma));
      p.set(e, t, "dei", dei);
      p.set(e, t, "ctrl", ctrl);
      p.set(e, t, "tr", tr);
    }
  }
  return p;
}

/// Moderation panel: y = 0.3 + 0.8 f + b_m m + b_i (f - 0.5)(m - 2) + 0.2 c +
/// noise, where b_m = 0.1 unless the interaction is zero (then m is pure noise).
inline PanelDataset moderation_panel(std::uint64_t seed, std::size_t n, std::size_t T,
                                     double interaction, double sigma) {
  Rng rng(seed);
  PanelDataset p(entity_names(n), year_range(2000, T), {"y", "f", "m", "c"});
  for (std::size_t e = 0; e < n; ++e)
    for (std::size_t t = 0; t < T; ++t) {
      const double f = rng.normal(0.5, 0.2);
      const double m = rng.normal(2.0, 1.0);
      const double c = rng.normal(0, 1);
      const double y = 0.3 + 0.8 * f + (interaction != 0 ? 0.1 * m : 0.0) +
                       interaction * (f - 0.5) * (m - 2.0) + 0.2 * c +
                       rng.normal(0, sigma);
      p.set(e, t, "y", y);
      p.set(e, t, "f", f);
      p.set(e, t, "m", m);
      p.set(e, t, "c", c);
    }
  return p;
}

// ---------------------------------------------------------------------------
// Hainan-style demo

inline index::IndicatorSystem demo_dei_system() {
  using index::Direction;
  return {
      {"Mobile phone penetration", Direction::positive, "dei_mobile", "Carrier"},
      {"4G base stations per capita", Direction::positive, "dei_4g", "Carrier"},
      {"Telecom revenue share of GDP", Direction::positive, "dei_telecom", "Industrialization"},
      {"Software employee share", Direction::positive, "dei_software", "Industrialization"},
      {"R&D share of GDP", Direction::positive, "dei_rnd", "Environment"},
      {"Digital finance index", Direction::positive, "dei_finance", "Industrial digitalization"},
  };
}

inline index::IndicatorSystem demo_rural_system() {
  using index::Direction;
  return {
      {"Rural Engel coefficient", Direction::negative, "rural_engel", "Affluent life"},
      {"Wage share of income", Direction::positive, "rural_wage_share", "Affluent life"},
      {"Per-capita disposable income", Direction::positive, "rural_income", "Affluent life"},
      {"Pesticide use per hectare", Direction::positive, "rural_pesticide", "Industry"},
      {"Sanitary toilet coverage", Direction::positive, "rural_toilet", "Ecology"},
      {"Rural radio coverage", Direction::positive, "rural_radio", "Governance"},
      {"Rural TV coverage", Direction::positive, "rural_tv", "Governance"},
      {"Culture and education spending", Direction::positive, "rural_culture", "Civilization"},
      {"Rural consumption level", Direction::positive, "rural_consumption", "Civilization"},
      {"Machinery power per capita", Direction::positive, "rural_machinery", "Industry"},
      {"Cars per 100 households", Direction::positive, "rural_cars", "Industry"},
      {"Rural/urban income ratio", Direction::positive, "rural_income_ratio", "Governance"},
      {"Minimum allowance share", Direction::negative, "rural_subsistence", "Governance"},
  };
}

/// Four-city, 2003-2022 panel with raw indicators, controls (Age, CPI, Trade,
/// GDP, Rate1-3), the threshold variable Tr, the moderator DR, and the DEI and
/// Rural composites computed from the raw indicators (TOPSIS, pooled).
inline PanelDataset demo_panel(std::uint64_t seed) {
  Rng rng(seed);
  const auto coords = hainan_preset_coords();
  const auto dei_sys = demo_dei_system();
  const auto rural_sys = demo_rural_system();
  std::vector<std::string> vars;
  for (const auto& i : dei_sys) vars.push_back(i.variable);
  for (const auto& i : rural_sys) vars.push_back(i.variable);
  for (const char* c : {"Age", "CPI", "Trade", "GDP", "Rate1", "Rate2", "Rate3", "Tr", "DR"})
    vars.push_back(c);
  PanelDataset p(coords.entities, year_range(2003, 20), vars);

  const double dei_base[4] = {0.25, 0.22, 0.18, 0.12};
  const double rural_base[4] = {0.45, 0.42, 0.35, 0.30};
  for (std::size_t e = 0; e < 4; ++e) {
    const double city = rng.normal(0, 0.02);
    for (std::size_t t = 0; t < 20; ++t) {
      const double tt = static_cast<double>(t) / 19.0;
      const int year = 2003 + static_cast<int>(t);
      const double latent_dei = dei_base[e] + 0.6 * tt * tt + city + rng.normal(0, 0.02);
      const double tr = 0.15 + 0.25 * tt + rng.normal(0, 0.03);
      const double rate1 = 0.35 - 0.12 * tt + rng.normal(0, 0.02) - 0.04 * static_cast<double>(e == 0);
      const double rate2 = 0.22 + 0.02 * tt + rng.normal(0, 0.02);
      const double rate3 = 1.0 - rate1 - rate2;
      const double age = 0.10 + 0.05 * tt + rng.normal(0, 0.005);
      const double cpi = 1.0 + 0.5 * tt + rng.normal(0, 0.03);
      const double trade = 0.20 + 0.15 * tt + rng.normal(0, 0.03);
      const double gdp = 5.0 + 1.5 * tt + 0.3 * static_cast<double>(3 - e) + rng.normal(0, 0.05);
      const double dr = year >= 2020 ? 0.2 * (year - 2019) + rng.normal(0, 0.02)
                                     : std::abs(rng.normal(0, 0.01));
      const double slope = tr <= 0.28 ? 0.06 : 0.18;
      const double latent_rural = rural_base[e] + 0.25 * tt + slope * latent_dei +
                                  0.05 * trade + 0.2 * rate3 + rng.normal(0, 0.02);

      auto put = [&](const char* v, double x) { p.set(e, t, v, x); };
      put("dei_mobile", 60 + 70 * latent_dei + rng.normal(0, 2));
      put("dei_4g", std::max(0.01, 0.5 + 8 * latent_dei * latent_dei + rng.normal(0, 0.1)));
      put("dei_telecom", 2 + 4 * latent_dei + rng.normal(0, 0.15));
      put("dei_software", 0.5 + 1.5 * latent_dei + rng.normal(0, 0.05));
      put("dei_rnd", 0.3 + 1.2 * latent_dei + rng.normal(0, 0.05));
      put("dei_finance", 40 + 300 * latent_dei + rng.normal(0, 8));

      put("rural_engel", 0.60 - 0.30 * latent_rural + rng.normal(0, 0.01));
      put("rural_wage_share", 0.20 + 0.30 * latent_rural + rng.normal(0, 0.01));
      put("rural_income", 3000 + 18000 * latent_rural + rng.normal(0, 300));
      put("rural_pesticide", 0.02 + 0.02 * latent_rural + rng.normal(0, 0.002));
      put("rural_toilet", 40 + 60 * latent_rural + rng.normal(0, 2));
      put("rural_radio", 80 + 20 * latent_rural + rng.normal(0, 1));
      put("rural_tv", 82 + 18 * latent_rural + rng.normal(0, 1));
      put("rural_culture", 200 + 1500 * latent_rural + rng.normal(0, 40));
      put("rural_consumption", 2500 + 12000 * latent_rural + rng.normal(0, 250));
      put("rural_machinery", 0.3 + 1.2 * latent_rural + rng.normal(0, 0.04));
      put("rural_cars", 2 + 30 * latent_rural + rng.normal(0, 1));
      put("rural_income_ratio", 0.30 + 0.25 * latent_rural + rng.normal(0, 0.01));
      put("rural_subsistence", 0.12 - 0.08 * latent_rural + rng.normal(0, 0.004));

      put("Age", age);
      put("CPI", cpi);
      put("Trade", trade);
      put("GDP", gdp);
      put("Rate1", rate1);
      put("Rate2", rate2);
      put("Rate3", rate3);
      put("Tr", tr);
      put("DR", dr);
    }
  }
  const auto dei = index::build_index(p, dei_sys, index::Aggregation::topsis);
  const auto rural = index::build_index(p, rural_sys, index::Aggregation::topsis);
  p.put_column("DEI", std::span<const double>(dei.scores.data(), static_cast<std::size_t>(dei.scores.size())));
  p.put_column("Rural", std::span<const double>(rural.scores.data(), static_cast<std::size_t>(rural.scores.size())));
  return p;
}

/// Example fusion wiring: classes are long-run strategy profiles of the
/// industry game, features are the (Rate1, Rate2, Rate3) structure observed
/// in the demo panel grouped by period. This is one documented way to feed
/// panel evidence into the decision engine, not a calibrated mapping.
inline fusion::FusionModel demo_fusion_model(const PanelDataset& panel) {
  fusion::FusionModel m;
  m.kernel = fusion::KernelSpec(fusion::KernelKind::gaussian);
  m.classes = {{"status quo (0,0,0)", 1.0, {}},
               {"Rate2 innovates (0,1,0)", 1.2, {}},
               {"full cooperation (1,1,1)", 1.5, {}}};
  for (std::size_t e = 0; e < panel.n_entities(); ++e)
    for (std::size_t t = 0; t < panel.n_years(); ++t) {
      const int year = panel.years()[t];
      const std::size_t cls = year < 2010 ? 0 : year < 2018 ? 1 : 2;
      m.classes[cls].samples.push_back(
          {panel.at(e, t, "Rate1"), panel.at(e, t, "Rate2"), panel.at(e, t, "Rate3")});
    }
  return m;
}

}  // namespace gpm::synth
