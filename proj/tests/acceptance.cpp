#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gpm/econometrics.hpp"
#include "gpm/evo_game.hpp"
#include "gpm/index_builder.hpp"
#include "gpm/io.hpp"
#include "gpm/parzen_fusion.hpp"
#include "gpm/synth.hpp"

namespace fs = std::filesystem;
using namespace gpm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

game::GamePayoffParams random_params(synth::Rng& rng) {
  game::GamePayoffParams p;
  for (double* r : game::param_refs(p)) *r = rng.uniform(0, 5);
  return p;
}

Eigen::Matrix3d fd_jacobian(const game::StrategyState& s, const game::GamePayoffParams& p) {
  const double h = 1e-3;
  Eigen::Matrix3d J;
  for (int c = 0; c < 3; ++c) {
    auto a = s, b = s;
    game::detail::set_axis(a, c, s[static_cast<std::size_t>(c)] + h);
    game::detail::set_axis(b, c, s[static_cast<std::size_t>(c)] - h);
    const auto fa = game::replicator_field(a, p), fb = game::replicator_field(b, p);
    for (int r = 0; r < 3; ++r)
      J(r, c) = (fa[static_cast<std::size_t>(r)] - fb[static_cast<std::size_t>(r)]) / (2 * h);
  }
  return J;
}

// 1. Closed-form vertex eigenvalues against the spectrum of a numerically
// differentiated Jacobian.
Outcome vertex_eigenvalues() {
  synth::Rng rng(101);
  double worst = 0;
  for (int d = 0; d < 100; ++d) {
    const auto p = random_params(rng);
    const auto table = game::vertex_eigenvalue_formulas(p);
    for (std::size_t v = 0; v < 8; ++v) {
      Eigen::EigenSolver<Eigen::Matrix3d> es(fd_jacobian(game::vertices()[v], p), false);
      std::vector<double> num, sym(table[v].begin(), table[v].end());
      for (int k = 0; k < 3; ++k) {
        worst = std::max(worst, std::abs(es.eigenvalues()(k).imag()));
        num.push_back(es.eigenvalues()(k).real());
      }
      std::sort(num.begin(), num.end());
      std::sort(sym.begin(), sym.end());
      for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(num[k] - sym[k]));
    }
  }
  return {worst <= 1e-9, "800 vertex spectra, max abs error " + fmt(worst)};
}

// 2. Payoff table mixed over opponents' strategies against the bracket
// expressions of the replicator equations.
Outcome payoff_consistency() {
  synth::Rng rng(102);
  double worst = 0;
  for (int d = 0; d < 20; ++d) {
    const auto p = random_params(rng);
    const auto tab = game::payoff_table(p);
    auto pr = [](double q, int a) { return a == 0 ? q : 1 - q; };
    for (int k = 0; k < 100; ++k) {
      const game::StrategyState s{rng.uniform(), rng.uniform(), rng.uniform()};
      double adv[3] = {0, 0, 0};
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          using game::situation;
          adv[0] += pr(s.y, b) * pr(s.z, c) *
                    (tab[situation(0, b, c)][0] - tab[situation(1, b, c)][0]);
          adv[1] += pr(s.x, b) * pr(s.z, c) *
                    (tab[situation(b, 0, c)][1] - tab[situation(b, 1, c)][1]);
          adv[2] += pr(s.x, b) * pr(s.y, c) *
                    (tab[situation(b, c, 0)][2] - tab[situation(b, c, 1)][2]);
        }
      const auto br = game::brackets(s, p);
      for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(adv[i] - br[i]));
    }
  }
  return {worst <= 1e-12, "2000 states, max abs error " + fmt(worst)};
}

// 3. Preset trajectories reach the expected corners by t = 50.
Outcome preset_trajectories() {
  const auto p = game::default_preset();
  const game::StrategyState from[] = {{0, 0, 0}, {0, 0.01, 0}, {0, 0, 0.01}, {0.01, 0, 0}};
  const game::StrategyState to[] = {{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
  double worst = 0;
  for (int c = 0; c < 4; ++c) {
    const auto end = game::simulate_trajectory(from[c], p, 50, 0.01, 1000).states.back();
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(end[i] - to[c][i]));
  }
  return {worst <= 0.01, "4 starts, max endpoint distance " + fmt(worst)};
}

// 4. Every stable vertex pulls back 20 starts at distance 0.05.
int attraction_failures(const game::GamePayoffParams& p, synth::Rng& rng, int& stable) {
  int failures = 0;
  const auto rep = game::vertex_eigenvalues(p);
  for (std::size_t v = 0; v < 8; ++v) {
    if (rep[v].classification != game::Stability::stable) continue;
    ++stable;
    const auto& corner = game::vertices()[v];
    for (int k = 0; k < 20; ++k) {
      double d[3], norm = 0;
      for (double& c : d) {
        c = std::abs(rng.normal());
        norm += c * c;
      }
      norm = std::sqrt(norm);
      game::StrategyState s;
      for (int i = 0; i < 3; ++i) {
        const double off = 0.05 * d[i] / norm;
        game::detail::set_axis(s, i, corner[static_cast<std::size_t>(i)] == 0
                                         ? off
                                         : 1 - off);
      }
      const auto end = game::simulate_trajectory(s, p, 200, 0.01, 20000).states.back();
      double dist = 0;
      for (std::size_t i = 0; i < 3; ++i) dist = std::max(dist, std::abs(end[i] - corner[i]));
      failures += dist > 1e-3;
    }
  }
  return failures;
}

Outcome stable_vertices_attract() {
  synth::Rng rng(104);
  int stable = 0;
  int failures = attraction_failures(game::default_preset(), rng, stable);
  const int preset_stable = stable;
  // Random draws whose stable vertices contract at rate >= 0.1, so that
  // t = 200 covers the linear decay from 0.05 down to 1e-3.
  int draws = 0;
  while (draws < 30) {
    const auto p = random_params(rng);
    bool fast = true;
    for (const auto& r : game::vertex_eigenvalues(p))
      if (r.classification == game::Stability::stable)
        for (const auto& l : r.eigenvalues) fast = fast && l.real() <= -0.1;
    if (!fast) continue;
    ++draws;
    failures += attraction_failures(p, rng, stable);
  }
  return {failures == 0 && preset_stable > 0,
          "preset + 30 draws, " + std::to_string(stable) + " stable vertices x 20 starts, " +
              std::to_string(failures) + " failures"};
}

// Simpson's rule for the gaussian; for the compact kernels, 3-point
// Gauss-Legendre on each piece between consecutive kernel breakpoints, which
// is exact for piecewise quadratics and never samples a discontinuity.
double integrate_density(const std::vector<double>& s, fusion::KernelKind k, double h) {
  auto f = [&](double x) { return fusion::parzen_density(s, k, h, x); };
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  if (k == fusion::KernelKind::gaussian) {
    const double a = *lo - 12 * h, b = *hi + 12 * h;
    const int n = 20000;
    const double w = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * f(a + i * w);
    return acc * w / 3;
  }
  std::vector<double> br;
  for (double v : s) {
    br.push_back(v - h);
    br.push_back(v + h);
  }
  std::sort(br.begin(), br.end());
  const double node = std::sqrt(3.0 / 5.0);
  double total = 0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const double a = br[i], b = br[i + 1];
    if (!(b > a)) continue;
    const double m = (a + b) / 2, r = (b - a) / 2;
    total += r * (5 * f(m - r * node) + 8 * f(m) + 5 * f(m + r * node)) / 9;
  }
  return total;
}

// 5. Parzen densities integrate to one.
Outcome parzen_normalization() {
  synth::Rng rng(105);
  double worst = 0;
  for (auto k : {fusion::KernelKind::gaussian, fusion::KernelKind::uniform,
                 fusion::KernelKind::epanechnikov})
    for (std::size_t n : {1u, 10u, 1000u}) {
      std::vector<double> s(n);
      for (auto& v : s) v = rng.normal();
      const double h = fusion::default_bandwidth(s);
      worst = std::max(worst, std::abs(integrate_density(s, k, h) - 1));
    }
  return {worst <= 1e-3, "9 kernel/size cases, max |integral - 1| " + fmt(worst)};
}

// 6. fuse_decision against a brute-force expected-utility decision.
Outcome fusion_oracle() {
  synth::Rng rng(106);
  fusion::FusionModel m;
  m.kernel = fusion::KernelSpec(fusion::KernelKind::gaussian, {0.5});
  for (double mean : {-2.0, 0.0, 2.0}) {
    fusion::FusionClass c;
    c.label = "N(" + fmt(mean) + ",1)";
    for (int i = 0; i < 200; ++i) c.samples.push_back({rng.normal(mean, 1)});
    m.classes.push_back(std::move(c));
  }
  int agree = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.uniform(-5, 5);
    std::size_t best = 0;
    double best_score = -1;
    for (std::size_t i = 0; i < 3; ++i) {
      double acc = 0;
      for (const auto& r : m.classes[i].samples) {
        const double u = (x - r[0]) / 0.5;
        acc += std::exp(-u * u / 2) / std::sqrt(2 * std::numbers::pi) / 0.5;
      }
      const double score = acc / 200 * m.classes[i].utility;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    std::vector<double> o = {x};
    const auto d = fusion::fuse_decision(m, o);
    agree += d.chosen && *d.chosen == best;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 decisions agree"};
}

// 7. Within estimator against dummy-variable OLS.
Outcome fe_oracle() {
  synth::Rng meta(107);
  double worst = 0;
  int panels = 0;
  while (panels < 20) {
    const std::size_t n = 2 + meta.bits() % 6, T = 3 + meta.bits() % 8;
    const bool time = panels % 2 == 1;
    // Dummy-variable OLS needs a positive residual count.
    if (n * T > 60 || n * T <= n + (time ? T - 1 : 0) + 2) continue;
    const std::vector<std::string> xs = {"x1", "x2"};
    const auto p = synth::fe_panel(700 + static_cast<std::uint64_t>(panels), n, T,
                                   {0.7, -1.3}, 0.5, time);
    const auto fit = econ::fit_fixed_effects(p, {"y", xs, true, time});
    const Eigen::MatrixXd X = econ::detail::columns(p, xs);
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>(n) +
                              (time ? static_cast<Eigen::Index>(T) - 1 : 0);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(X.rows(), cols);
    D.leftCols(2) = X;
    for (std::size_t e = 0; e < n; ++e)
      for (std::size_t t = 0; t < T; ++t) {
        const auto r = static_cast<Eigen::Index>(e * T + t);
        D(r, 2 + static_cast<Eigen::Index>(e)) = 1;
        if (time && t > 0) D(r, 2 + static_cast<Eigen::Index>(n + t - 1)) = 1;
      }
    const Eigen::VectorXd b = D.colPivHouseholderQr().solve(p.vector("y"));
    for (std::size_t j = 0; j < 2; ++j)
      worst = std::max(worst, std::abs(fit.rows[j].estimate - b(static_cast<Eigen::Index>(j))));
    ++panels;
  }
  return {worst <= 1e-8, "20 panels, max coefficient difference " + fmt(worst)};
}

// 8. Planted spatial autoregression recovered by the SDM.
Outcome sdm_recovery() {
  int hits = 0;
  double lo = 1, hi = -1;
  for (int r = 0; r < 50; ++r) {
    const auto d = synth::sdm_panel(8000 + static_cast<std::uint64_t>(r), 25, 20, 0.35,
                                    {1.0, -0.5}, {0.4, 0.2}, 0.5, 8);
    const auto f = econ::fit_sdm(d.panel, {"y", {"x1", "x2"}, true, true}, d.weights);
    hits += std::abs(f.rho - 0.35) <= 0.10;
    lo = std::min(lo, f.rho);
    hi = std::max(hi, f.rho);
  }
  return {hits >= 48, std::to_string(hits) + "/50 within 0.35 +- 0.10, rho in [" + fmt(lo) +
                          ", " + fmt(hi) + "]"};
}

// 9. Planted threshold and regime slopes recovered.
Outcome threshold_recovery() {
  int hits = 0;
  for (int r = 0; r < 50; ++r) {
    const auto p = synth::threshold_panel(9000 + static_cast<std::uint64_t>(r), 10, 20, 0.28,
                                          0.057, 0.179, 0.3, 0.01);
    const auto f = econ::fit_threshold(p, {"y", {"dei", "ctrl"}}, "tr", "dei");
    const std::size_t k = f.gamma_index;
    const double below = k > 0 ? f.grid[k - 1] : f.grid[k];
    const double above = k + 1 < f.grid.size() ? f.grid[k + 1] : f.grid[k];
    const bool gamma_ok = below <= 0.28 && 0.28 <= above;
    const bool slopes_ok = std::abs(f.low_coef - 0.057) <= 3 * f.low_se &&
                           std::abs(f.high_coef - 0.179) <= 3 * f.high_se;
    hits += gamma_ok && slopes_ok;
  }
  return {hits >= 48, std::to_string(hits) + "/50 within one grid step and 3 SE"};
}

// 10. Entropy weights, score range and monotonicity under fixed weights.
Outcome index_properties() {
  const auto panel = synth::demo_panel(110);
  const auto sys = synth::demo_rural_system();
  double weight_err = 0;
  bool in_range = true;
  for (auto method : {index::Aggregation::topsis, index::Aggregation::weighted_sum})
    for (auto pool : {index::Pooling::pooled, index::Pooling::per_year}) {
      const auto r = index::build_index(panel, sys, method, pool);
      weight_err = std::max(weight_err, std::abs(r.weights.sum() - 1));
      in_range = in_range && r.scores.minCoeff() >= 0 && r.scores.maxCoeff() <= 1;
    }
  const auto base = index::build_index(panel, sys, index::Aggregation::weighted_sum);
  std::vector<std::vector<double>> raw;
  for (const auto& ind : sys) {
    const auto c = panel.column(ind.variable);
    raw.emplace_back(c.begin(), c.end());
  }
  auto score_of = [&](const std::vector<std::vector<double>>& cols, std::size_t row) {
    double s = 0;
    for (std::size_t j = 0; j < sys.size(); ++j)
      s += base.weights(static_cast<Eigen::Index>(j)) *
           index::normalize_minmax(cols[j], sys[j].direction, sys[j].name)[row];
    return s;
  };
  synth::Rng rng(1010);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t row = rng.bits() % panel.rows(), j = rng.bits() % sys.size();
    auto cols = raw;
    const auto [mn, mx] = std::minmax_element(cols[j].begin(), cols[j].end());
    const double step = rng.uniform(0, 0.5) * (*mx - *mn);
    // Improve the indicator in its own direction.
    cols[j][row] += sys[j].direction == index::Direction::positive ? step : -step;
    violations += score_of(cols, row) < score_of(raw, row) - 1e-12;
  }
  return {weight_err <= 1e-12 && in_range && violations == 0,
          "weight sum error " + fmt(weight_err) + ", scores in [0,1]: " +
              (in_range ? "yes" : "no") + ", " + std::to_string(violations) +
              "/1000 monotonicity violations"};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string g = GPM_CLI_PATH, d = dir.string() + "/";
  const std::string panel = " --panel " + d + "panel.csv";
  const std::string quiet = " > /dev/null 2>&1";
  const std::vector<std::string> steps = {
      "demo generate --seed 7 --out-dir " + d,
      "index build" + panel + " --system " + d + "dei_system.json --out " + d + "dei.csv",
      "index build" + panel + " --system " + d + "rural_system.json --method weighted-sum --out " +
          d + "rural.csv",
      "regress fe" + panel + " --dep Rural --vars DEI,Age,CPI,Trade,GDP --out " + d + "fe.json",
      "regress sdm" + panel + " --dep Rural --vars DEI,Age,CPI,Trade,GDP --weights " + d +
          "coords.csv --out " + d + "sdm.json",
      "regress threshold" + panel + " --dep Rural --vars DEI,Age,CPI --threshold-var Tr " +
          "--focal DEI --out " + d + "threshold.json",
      "regress moderation" + panel + " --dep Rural --vars DEI,DR,Age,CPI --focal DEI " +
          "--moderator DR --out " + d + "moderation.json",
      "fusion run --model " + d + "fusion_model.json --observe 0.4,0.6,0.5 --out " + d +
          "fusion.json",
      "game equilibria --params " + d + "preset.json --out " + d + "equilibria.json",
      "game simulate --params " + d + "preset.json --init 0,0.01,0 --out " + d +
          "trajectory.csv --svg " + d + "trajectory.svg",
  };
  for (const auto& s : steps)
    if (shell(g + " " + s + quiet) != 0) {
      std::fprintf(stderr, "pipeline step failed: %s\n", s.c_str());
      return false;
    }
  return true;
}

// 11. Two runs of the demo pipeline produce identical bytes.
Outcome determinism() {
  const auto root = fs::temp_directory_path() / "gpm_acceptance";
  const auto a = root / "run_a", b = root / "run_b";
  if (!run_pipeline(a) || !run_pipeline(b)) return {false, "pipeline step failed"};
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const auto other = b / e.path().filename();
    same += fs::exists(other) && io::read_file(e.path()) == io::read_file(other);
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++files_b;
  fs::remove_all(root);
  return {files >= 17 && files == files_b && same == files,
          std::to_string(same) + "/" + std::to_string(files) + " files byte-identical"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "vertex eigenvalue formulas", 5, vertex_eigenvalues},
      {2, "payoff/replicator consistency", 5, payoff_consistency},
      {3, "preset trajectories", 10, preset_trajectories},
      {4, "stable vertices attract", 0, stable_vertices_attract},
      {5, "Parzen normalization", 0, parzen_normalization},
      {6, "fusion oracle equivalence", 0, fusion_oracle},
      {7, "FE dummy-variable oracle", 0, fe_oracle},
      {8, "SDM rho recovery", 60, sdm_recovery},
      {9, "threshold recovery", 30, threshold_recovery},
      {10, "index properties", 0, index_properties},
      {11, "CLI determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s criterion %d: %s (%s; %.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs,
                c.limit_s > 0 ? (" of " + fmt(c.limit_s) + " s allowed").c_str() : "");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
