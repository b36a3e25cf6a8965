#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gpm/index_builder.hpp"
#include "gpm/synth.hpp"

using namespace gpm;
using namespace gpm::index;

namespace {

constexpr double eps = kZeroOffset;

double offset(double s) { return (s + eps) / (1 + eps); }

// Direct evaluation of the entropy formula, written independently of the
// library (column-wise loops, natural log, explicit normalisation).
std::vector<double> entropy_oracle(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), m = rows[0].size();
  std::vector<double> d(m);
  for (std::size_t j = 0; j < m; ++j) {
    double total = 0;
    for (const auto& r : rows) total += r[j];
    double e = 0;
    for (const auto& r : rows) {
      const double p = r[j] / total;
      e -= p * std::log(p);
    }
    d[j] = 1 - e / std::log(static_cast<double>(n));
  }
  double s = 0;
  for (double x : d) s += x;
  for (double& x : d) x /= s;
  return d;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[0].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

TEST(Normalize, PositiveDirection) {
  std::vector<double> c = {1, 2, 3};
  auto z = normalize_minmax(c, Direction::positive);
  EXPECT_DOUBLE_EQ(z[0], offset(0));
  EXPECT_DOUBLE_EQ(z[1], offset(0.5));
  EXPECT_DOUBLE_EQ(z[2], 1.0);
  EXPECT_GT(z[0], 0);
}

TEST(Normalize, NegativeIsReversal) {
  std::vector<double> c = {1, 2, 3};
  auto p = normalize_minmax(c, Direction::positive);
  auto n = normalize_minmax(c, Direction::negative);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(n[i], p[2 - i]);
}

TEST(Normalize, ConstantColumnNamesIndicator) {
  std::vector<double> c = {5, 5, 5};
  try {
    normalize_minmax(c, Direction::positive, "Mobile phones");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate column"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("Mobile phones"), std::string::npos);
  }
}

TEST(Normalize, ScaleInvariant) {
  synth::Rng rng(5);
  std::vector<double> c(50), scaled(50);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = rng.normal(10, 3);
    scaled[i] = 37.5 * c[i];
  }
  auto a = normalize_minmax(c, Direction::positive);
  auto b = normalize_minmax(scaled, Direction::positive);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Entropy, IdenticalColumnsShareEqually) {
  auto w = entropy_weights(to_matrix({{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}}));
  EXPECT_NEAR(w(0), 0.5, 1e-15);
  EXPECT_NEAR(w(1), 0.5, 1e-15);
}

TEST(Entropy, DispersedColumnGetsMoreWeight) {
  const std::vector<std::vector<double>> rows = {
      {0.50, 0.01}, {0.51, 0.30}, {0.49, 0.70}, {0.50, 1.00}};
  auto w = entropy_weights(to_matrix(rows));
  auto oracle = entropy_oracle(rows);
  EXPECT_GT(w(1), w(0));
  EXPECT_NEAR(w(0), oracle[0], 1e-14);
  EXPECT_NEAR(w(1), oracle[1], 1e-14);
}

TEST(Entropy, SingleColumnWeightOne) {
  auto w = entropy_weights(to_matrix({{0.2}, {0.7}}));
  EXPECT_DOUBLE_EQ(w(0), 1.0);
}

TEST(Entropy, RejectsNonPositiveAndUniform) {
  EXPECT_THROW(entropy_weights(to_matrix({{0.0, 1.0}, {0.5, 0.2}})), Error);
  EXPECT_THROW(entropy_weights(to_matrix({{0.3, 0.4}, {0.3, 0.4}})), Error);
}

TEST(Composite, TopsisIdealAndAntiIdeal) {
  Eigen::MatrixXd m = to_matrix({{1.0, 1.0}, {0.2, 0.4}, {0.0, 0.0}});
  Eigen::VectorXd w(2);
  w << 0.3, 0.7;
  auto s = composite_index(m, w, Aggregation::topsis);
  EXPECT_DOUBLE_EQ(s(0), 1.0);
  EXPECT_DOUBLE_EQ(s(2), 0.0);
  auto ws = composite_index(m, w, Aggregation::weighted_sum);
  EXPECT_DOUBLE_EQ(ws(2), 0.0);
}

TEST(Composite, WeightedSumOfUniformWeightsIsMean) {
  Eigen::VectorXd w(2);
  w << 0.5, 0.5;
  auto s = composite_index(to_matrix({{0.2, 0.4}}), w, Aggregation::weighted_sum);
  EXPECT_NEAR(s(0), 0.3, 1e-15);
}

TEST(Composite, DimensionMismatch) {
  Eigen::VectorXd w(3);
  w << 0.2, 0.3, 0.5;
  EXPECT_THROW(composite_index(to_matrix({{0.2, 0.4}}), w, Aggregation::topsis), Error);
}

TEST(Composite, RankAgreementUnderComonotoneIndicators) {
  synth::Rng rng(9);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i) {
    const double t = rng.uniform(0.01, 1.0);
    rows.push_back({t, t * t, std::sqrt(t), 0.5 + 0.5 * t});
  }
  const auto m = to_matrix(rows);
  const auto w = entropy_weights(m);
  const auto a = composite_index(m, w, Aggregation::topsis);
  const auto b = composite_index(m, w, Aggregation::weighted_sum);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (rows[static_cast<std::size_t>(i)][0] < rows[static_cast<std::size_t>(j)][0]) {
        EXPECT_LT(a(i), a(j));
        EXPECT_LT(b(i), b(j));
      }
}

TEST(BuildIndex, DemoPanelScoresInUnitInterval) {
  const auto p = synth::demo_panel(1);
  for (auto method : {Aggregation::topsis, Aggregation::weighted_sum})
    for (auto pool : {Pooling::pooled, Pooling::per_year}) {
      const auto r = build_index(p, synth::demo_rural_system(), method, pool);
      EXPECT_EQ(r.scores.size(), 80);
      EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
      EXPECT_GE(r.scores.minCoeff(), 0.0);
      EXPECT_LE(r.scores.maxCoeff(), 1.0);
    }
}

TEST(BuildIndex, MissingVariableIsSchemaError) {
  const auto p = synth::demo_panel(1);
  IndicatorSystem sys = {{"ghost", Direction::positive, "no_such_column", ""}};
  try {
    build_index(p, sys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
  }
}

TEST(IndicatorJson, RoundTrip) {
  const auto sys = synth::demo_rural_system();
  const auto back = parse_indicator_system(to_json(sys));
  ASSERT_EQ(back.size(), sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) {
    EXPECT_EQ(back[i].name, sys[i].name);
    EXPECT_EQ(back[i].variable, sys[i].variable);
    EXPECT_EQ(back[i].direction, sys[i].direction);
  }
}

TEST(IndicatorJson, RejectsUnknownDirection) {
  auto j = nlohmann::json::parse(R"([{"name":"a","direction":"up","variable":"a"}])");
  EXPECT_THROW(parse_indicator_system(j), Error);
}

TEST(ScoresCsv, HeaderAndRowCount) {
  const auto r = build_index(synth::demo_panel(2), synth::demo_dei_system());
  const auto csv = format_scores_csv(r);
  EXPECT_EQ(csv.rfind("entity,year,score\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 81);
}
