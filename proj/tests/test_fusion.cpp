#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpm/parzen_fusion.hpp"
#include "gpm/synth.hpp"

using namespace gpm;
using namespace gpm::fusion;

namespace {

// Simpson's rule on a uniform grid.
double simpson(auto&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

// Naive product-of-Gaussians density written from the formula.
double naive_density(const std::vector<std::vector<double>>& rows, double h,
                     const std::vector<double>& x) {
  double prod = 1;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double s = 0;
    for (const auto& r : rows) {
      const double u = (x[j] - r[j]) / h;
      s += std::exp(-u * u / 2) / std::sqrt(2 * std::numbers::pi) / h;
    }
    prod *= s / static_cast<double>(rows.size());
  }
  return prod;
}

std::size_t naive_decision(const FusionModel& m, double h, const std::vector<double>& x) {
  std::size_t best = 0;
  double best_score = -1;
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    const double s = naive_density(m.classes[i].samples, h, x) * m.classes[i].utility;
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

FusionModel three_class_toy(std::uint64_t seed, double h) {
  synth::Rng rng(seed);
  FusionModel m;
  m.kernel = KernelSpec(KernelKind::gaussian, {h});
  for (double mean : {-2.0, 0.0, 2.0}) {
    FusionClass c;
    c.label = "mean " + std::to_string(mean);
    for (int i = 0; i < 200; ++i) c.samples.push_back({rng.normal(mean, 1.0)});
    m.classes.push_back(std::move(c));
  }
  return m;
}

FusionModel two_class(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b, double ua, double ub) {
  FusionModel m;
  m.kernel = KernelSpec(KernelKind::gaussian, {0.5});
  m.classes.push_back({"A", ua, a});
  m.classes.push_back({"B", ub, b});
  return m;
}

}  // namespace

TEST(Parzen, StandardNormalPeak) {
  std::vector<double> s = {0.0};
  EXPECT_NEAR(parzen_density(s, KernelKind::gaussian, 1.0, 0.0),
              1 / std::sqrt(2 * std::numbers::pi), 1e-15);
}

TEST(Parzen, SymmetricSamplesGiveSymmetricDensity) {
  std::vector<double> s = {-1.0, 1.0};
  for (auto k : {KernelKind::gaussian, KernelKind::uniform, KernelKind::epanechnikov})
    for (double x = 0; x < 3; x += 0.137)
      EXPECT_NEAR(parzen_density(s, k, 0.8, x), parzen_density(s, k, 0.8, -x), 1e-12);
}

TEST(Parzen, IntegratesToOne) {
  synth::Rng rng(3);
  std::vector<double> s(1000);
  for (auto& v : s) v = rng.normal();
  const double q = simpson([&](double x) { return parzen_density(s, KernelKind::gaussian, 0.3, x); },
                           -8, 8, 4000);
  EXPECT_NEAR(q, 1.0, 1e-3);
}

TEST(Parzen, EveryKernelNormalised) {
  synth::Rng rng(4);
  for (auto k : {KernelKind::gaussian, KernelKind::uniform, KernelKind::epanechnikov})
    for (std::size_t n : {1u, 10u, 100u}) {
      std::vector<double> s(n);
      for (auto& v : s) v = rng.normal();
      const double q = simpson([&](double x) { return parzen_density(s, k, 0.4, x); }, -10, 10,
                               200000);
      EXPECT_NEAR(q, 1.0, 1e-3) << to_string(k) << " n=" << n;
    }
}

TEST(Parzen, Guards) {
  std::vector<double> none;
  std::vector<double> one = {0.0};
  EXPECT_THROW(parzen_density(none, KernelKind::gaussian, 1, 0), Error);
  EXPECT_THROW(parzen_density(one, KernelKind::gaussian, 0, 0), Error);
  EXPECT_THROW(KernelSpec(KernelKind::gaussian, {-1.0}), Error);
}

TEST(ClassDensity, SingleFeatureEqualsParzen) {
  auto m = three_class_toy(5, 0.5);
  const auto col = feature_column(m.classes[1], 0);
  std::vector<double> x = {0.3};
  EXPECT_NEAR(class_conditional_density(m, 1, x),
              parzen_density(col, KernelKind::gaussian, 0.5, 0.3), 1e-15);
}

TEST(ClassDensity, IdenticalColumnsGiveSquare) {
  synth::Rng rng(6);
  std::vector<std::vector<double>> rows;
  std::vector<double> col;
  for (int i = 0; i < 40; ++i) {
    const double v = rng.normal();
    rows.push_back({v, v});
    col.push_back(v);
  }
  auto m = two_class(rows, rows, 1, 1);
  std::vector<double> x = {0.4, 0.4};
  const double p = parzen_density(col, KernelKind::gaussian, 0.5, 0.4);
  EXPECT_NEAR(class_conditional_density(m, 0, x), p * p, 1e-12);
}

TEST(ClassDensity, MatchesNaiveProduct) {
  std::vector<std::vector<double>> a = {{0, 1}, {1, 1}, {1, 0}}, b = {{3, 3}, {2, 4}};
  auto m = two_class(a, b, 1, 1);
  for (std::vector<double> x : {std::vector<double>{0.5, 0.5}, {2.0, 3.0}, {-1.0, 4.0}}) {
    EXPECT_NEAR(class_conditional_density(m, 0, x), naive_density(a, 0.5, x), 1e-14);
    EXPECT_NEAR(class_conditional_density(m, 1, x), naive_density(b, 0.5, x), 1e-14);
  }
}

TEST(ClassDensity, DimensionMismatch) {
  auto m = two_class({{0, 1}}, {{1, 0}}, 1, 1);
  std::vector<double> x = {0.5};
  EXPECT_THROW(class_conditional_density(m, 0, x), Error);
}

TEST(Fuse, UtilityBreaksEqualDensities) {
  std::vector<std::vector<double>> rows = {{0.1}, {0.4}, {0.9}};
  std::vector<double> x = {0.5};
  EXPECT_EQ(*fuse_decision(two_class(rows, rows, 2, 1), x).chosen, 0u);
  EXPECT_EQ(*fuse_decision(two_class(rows, rows, 1, 2), x).chosen, 1u);
  // Equal scores: lowest index wins.
  EXPECT_EQ(*fuse_decision(two_class(rows, rows, 1, 1), x).chosen, 0u);
}

TEST(Fuse, DensityDominates) {
  auto m = two_class({{0.0}, {0.2}}, {{5.0}, {6.0}}, 1, 1);
  std::vector<double> x = {0.2};
  EXPECT_EQ(*fuse_decision(m, x).chosen, 0u);
}

TEST(Fuse, ThreeClassToyAtObservation) {
  auto m = three_class_toy(7, 0.5);
  std::vector<double> x = {1.9};
  const auto d = fuse_decision(m, x);
  EXPECT_EQ(*d.chosen, naive_decision(m, 0.5, {1.9}));
  EXPECT_EQ(*d.chosen, 2u);
  EXPECT_EQ(std::max_element(d.scores.begin(), d.scores.end()) - d.scores.begin(), 2);
}

TEST(Fuse, AgreesWithNaiveOnGrid) {
  auto m = three_class_toy(8, 0.5);
  for (double x = -4; x <= 4; x += 0.01) {
    std::vector<double> o = {x};
    ASSERT_EQ(*fuse_decision(m, o).chosen, naive_decision(m, 0.5, o)) << x;
  }
}

TEST(Fuse, UtilityScalingInvariant) {
  auto m = three_class_toy(9, 0.5);
  m.classes[0].utility = 1.3;
  m.classes[2].utility = 0.7;
  synth::Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> o = {rng.uniform(-4, 4)};
    auto scaled = m;
    for (auto& c : scaled.classes) c.utility *= 37.0;
    EXPECT_EQ(fuse_decision(m, o).chosen, fuse_decision(scaled, o).chosen);
  }
}

TEST(Fuse, HugeBandwidthPicksUtility) {
  auto m = three_class_toy(11, 1e6);
  m.classes[0].utility = 1.0;
  m.classes[1].utility = 3.0;
  m.classes[2].utility = 2.0;
  for (double x : {-2.0, 0.0, 1.9}) {
    std::vector<double> o = {x};
    EXPECT_EQ(*fuse_decision(m, o).chosen, 1u);
  }
}

TEST(Fuse, PermutedRowsLeaveDensitiesUnchanged) {
  auto m = three_class_toy(12, 0.5);
  auto p = m;
  std::reverse(p.classes[1].samples.begin(), p.classes[1].samples.end());
  std::rotate(p.classes[2].samples.begin(), p.classes[2].samples.begin() + 17,
              p.classes[2].samples.end());
  std::vector<double> o = {0.77};
  const auto a = fuse_decision(m, o), b = fuse_decision(p, o);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.densities[i], b.densities[i], 1e-12);
}

TEST(Fuse, NoEvidenceWhenAllDensitiesVanish) {
  FusionModel m;
  m.kernel = KernelSpec(KernelKind::uniform, {0.1});
  m.classes.push_back({"A", 1, {{0.0}}});
  m.classes.push_back({"B", 1, {{1.0}}});
  std::vector<double> o = {5.0};
  const auto d = fuse_decision(m, o);
  EXPECT_TRUE(d.no_evidence());
  EXPECT_TRUE(to_json(d, m)["no_evidence"].get<bool>());
  EXPECT_TRUE(to_json(d, m)["chosen"].is_null());
}

TEST(Fuse, LogDomainSurvivesUnderflow) {
  FusionModel m;
  m.kernel = KernelSpec(KernelKind::gaussian, {0.02});
  std::vector<double> a(60, 0.0), b(60, 0.05), o(60, 0.5);
  m.classes.push_back({"A", 1, {a}});
  m.classes.push_back({"B", 1, {b}});
  const auto d = fuse_decision(m, o);
  EXPECT_EQ(d.densities[0], 0.0);
  ASSERT_TRUE(d.chosen.has_value());
  EXPECT_EQ(*d.chosen, 1u);
}

TEST(Append, AddsMassAtPoint) {
  auto m = three_class_toy(13, 0.5);
  std::vector<double> o = {3.5};
  const double before = class_conditional_density(m, 1, o);
  const double other = class_conditional_density(m, 2, o);
  auto m2 = append_observation(m, 1, o);
  EXPECT_GT(class_conditional_density(m2, 1, o), before);
  EXPECT_EQ(class_conditional_density(m2, 2, o), other);
  EXPECT_EQ(m2.classes[1].samples.size(), 201u);
  EXPECT_THROW(append_observation(m, 3, o), Error);
  std::vector<double> wide = {1.0, 2.0};
  EXPECT_THROW(append_observation(m, 0, wide), Error);
}

TEST(Append, IncrementalEqualsBatch) {
  auto batch = three_class_toy(14, 0.5);
  FusionModel inc;
  inc.kernel = batch.kernel;
  for (const auto& c : batch.classes) inc.classes.push_back({c.label, c.utility, {c.samples[0]}});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t r = 1; r < batch.classes[i].samples.size(); ++r)
      inc = append_observation(inc, i, batch.classes[i].samples[r]);
  synth::Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> o = {rng.uniform(-4, 4)};
    const auto a = fuse_decision(batch, o), b = fuse_decision(inc, o);
    EXPECT_EQ(a.scores, b.scores);
  }
}

TEST(ModelJson, RoundTrip) {
  auto m = three_class_toy(16, 0.5);
  m.classes[2].utility = 2.5;
  const auto back = model_from_json(to_json(m));
  EXPECT_EQ(back.classes.size(), 3u);
  EXPECT_EQ(back.classes[2].utility, 2.5);
  EXPECT_EQ(back.classes[1].samples, m.classes[1].samples);
  EXPECT_EQ(back.kernel.bandwidth, m.kernel.bandwidth);
}

TEST(ModelJson, DefaultsAndErrors) {
  auto m = model_from_json(nlohmann::json::parse(R"({"classes":[{"samples":[[1,2],[2,3]]}]})"));
  EXPECT_EQ(m.classes[0].utility, 1.0);
  EXPECT_EQ(m.kernel.kind, KernelKind::gaussian);
  EXPECT_TRUE(m.kernel.bandwidth.empty());
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"classes":[{"samples":[]}]})")), Error);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"classes":[{"samples":[[1],[1,2]]}]})")),
               Error);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"kernel":{"kind":"box"},"classes":[]})")),
               Error);
}

TEST(Bandwidth, RuleOfThumb) {
  std::vector<double> c = {1, 2, 3, 4, 5};
  EXPECT_NEAR(default_bandwidth(c), std::pow(5.0, -0.2) * std::sqrt(2.5), 1e-14);
  std::vector<double> flat = {2, 2};
  EXPECT_NEAR(default_bandwidth(flat), std::pow(2.0, -0.2), 1e-14);
}
