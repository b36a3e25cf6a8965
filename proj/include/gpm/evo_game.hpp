#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gpm/error.hpp"
#include "gpm/io.hpp"
#include "gpm/ode.hpp"
#include "json.hpp"

// Three-player evolutionary game between Rate1, Rate2 and Rate3.
//
// Player x (Rate1) chooses promote / not promote, player y (Rate2) innovate /
// not innovate, player z (Rate3) promote / not promote Rate2. State
// coordinates are the probabilities of each player's first action.
namespace gpm::game {

struct GamePayoffParams {
  double Cg = 0;       // Rate1 investment in Rate2's digital economy
  double alpha = 0;    // subsidy Rate1 -> Rate2
  double beta = 0;     // income Rate1 brings to Rate2
  double R = 0;        // Rate1 economic loss from not promoting
  double I = 0;        // Rate1 credibility loss from not promoting
  double Cf = 0;       // Rate2 cost of digital innovation
  double C = 0;        // Rate1-imposed cost on Rate2 when not innovating
  double gamma = 0;    // Rate2 loss from not innovating
  double O = 0;        // Rate2 benefit of normal operation
  double eta = 0;      // Rate2 benefit of innovation
  double T = 0;        // Rate2 feedback benefit to Rate3
  double Cp = 0;       // Rate3 investment in Rate2 applications
  double epsilon = 0;  // Rate3 benefit from Rate2 innovation
  double delta = 0;    // benefit to Rate1 from Rate3 promotion
  double Y = 0;        // Rate3 loss when Rate2 does not innovate
  double J = 0;        // Rate3 lost profit from not promoting
  double v = 0;        // Rate3 extra purchase cost from not promoting
};

inline void validate(const GamePayoffParams& p) {
  const double all[] = {p.Cg, p.alpha, p.beta, p.R,     p.I,     p.Cf,
                        p.C,  p.gamma, p.O,    p.eta,   p.T,     p.Cp,
                        p.epsilon,     p.delta, p.Y,    p.J,     p.v};
  for (double d : all)
    if (!std::isfinite(d)) fail(ErrorKind::domain, "game parameters must be finite");
  if (p.Cg < 0 || p.Cf < 0 || p.C < 0 || p.Cp < 0)
    fail(ErrorKind::domain, "cost parameters Cg, Cf, C, Cp must be >= 0");
}

struct StrategyState {
  double x = 0;
  double y = 0;
  double z = 0;

  double operator[](std::size_t i) const { return i == 0 ? x : i == 1 ? y : z; }
  friend bool operator==(const StrategyState&, const StrategyState&) = default;
};

inline bool in_cube(const StrategyState& s, double tol = 0) {
  for (std::size_t i = 0; i < 3; ++i)
    if (!(s[i] >= -tol && s[i] <= 1 + tol)) return false;
  return true;
}

inline void require_in_cube(const StrategyState& s) {
  if (!in_cube(s))
    fail(ErrorKind::domain, "strategy state (" + io::format_double(s.x) + ", " +
                                io::format_double(s.y) + ", " +
                                io::format_double(s.z) + ") lies outside [0,1]^3");
}

// ---------------------------------------------------------------------------
// Payoffs

using Payoff = std::array<double, 3>;  // (Rate1, Rate2, Rate3)

/// The 8 pure-strategy situations in table order. Rate1 plays its first
/// action in situations 1, 2, 5, 6; Rate2 in 1-4; Rate3 in the odd ones.
inline std::array<Payoff, 8> payoff_table(const GamePayoffParams& p) {
  validate(p);
  const double r1_promote_innov = p.beta - p.Cg - p.alpha;
  const double r1_idle = -p.R - p.I;
  const double r3_promote_innov = p.epsilon + p.delta + p.T - p.Cp;
  const double r3_idle = -p.J - p.v;
  const double r2_not_innov = p.O - p.gamma;
  return {{
      {r1_promote_innov, p.eta + p.alpha - p.Cf - p.T, r3_promote_innov},
      {r1_promote_innov, p.eta + p.alpha - p.Cf, r3_idle},
      {r1_idle, p.eta - p.Cf - p.T, r3_promote_innov},
      {r1_idle, p.eta - p.Cf, 0.0},
      {-p.Cg - p.delta, r2_not_innov - p.C, p.delta - p.Cp - p.Y},
      {-p.Cg, r2_not_innov - p.C, r3_idle},
      {r1_idle, r2_not_innov, -p.Cp - p.Y},
      {r1_idle, r2_not_innov, r3_idle},
  }};
}

// Situation index (0-based) for actions a1, a2, a3 in {0 = first, 1 = second}.
constexpr std::size_t situation(int a1, int a2, int a3) {
  return static_cast<std::size_t>(a3 + 2 * a1 + 4 * a2);
}

struct PlayerPayoffs {
  double first = 0;   // expected payoff of the first action
  double second = 0;  // expected payoff of the second action
  double mean = 0;    // p * first + (1 - p) * second
};

/// Expected payoffs of each player's two actions against the opponents'
/// mixed strategies, mixed from the payoff table.
inline std::array<PlayerPayoffs, 3> expected_payoffs(const StrategyState& s,
                                                     const GamePayoffParams& p) {
  require_in_cube(s);
  const auto table = payoff_table(p);
  const double prob[3] = {s.x, s.y, s.z};
  auto weight = [&](int who, int a) { return a == 0 ? prob[who] : 1 - prob[who]; };
  std::array<PlayerPayoffs, 3> out{};
  for (int player = 0; player < 3; ++player) {
    double u[2] = {0, 0};
    for (int own = 0; own < 2; ++own)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          int a[3];
          a[player] = own;
          a[(player + 1) % 3] = b;
          a[(player + 2) % 3] = c;
          const double w = weight((player + 1) % 3, b) * weight((player + 2) % 3, c);
          u[own] += w * table[situation(a[0], a[1], a[2])][static_cast<std::size_t>(player)];
        }
    out[static_cast<std::size_t>(player)] = {u[0], u[1],
                                             prob[player] * u[0] + (1 - prob[player]) * u[1]};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replicator dynamics. Each bracket is the payoff advantage of the first
// action and does not depend on the player's own probability.

inline double bracket_x(double y, double z, const GamePayoffParams& p) {
  return p.I - p.Cg + p.R - y * (p.alpha - p.beta - p.delta * z) - p.delta * z;
}

inline double bracket_y(double x, double z, const GamePayoffParams& p) {
  return p.eta - p.Cf - p.O + p.gamma + x * (p.alpha + p.C) - p.T * z;
}

inline double bracket_z(double x, double y, const GamePayoffParams& p) {
  return p.J - p.Cp + p.v - p.Y +
         y * (p.epsilon - p.J + p.delta + p.T - p.v + p.Y + p.J * x - p.delta * x +
              p.v * x) +
         p.delta * x;
}

inline std::array<double, 3> brackets(const StrategyState& s, const GamePayoffParams& p) {
  return {bracket_x(s.y, s.z, p), bracket_y(s.x, s.z, p), bracket_z(s.x, s.y, p)};
}

// Replicator field without the cube check; also used for finite differences
// that step outside the cube.
inline std::array<double, 3> replicator_field(const StrategyState& s,
                                              const GamePayoffParams& p) {
  const auto b = brackets(s, p);
  return {s.x * (1 - s.x) * b[0], s.y * (1 - s.y) * b[1], s.z * (1 - s.z) * b[2]};
}

inline std::array<double, 3> replicator_rhs(const StrategyState& s,
                                            const GamePayoffParams& p) {
  require_in_cube(s);
  return replicator_field(s, p);
}

using Matrix3 = Eigen::Matrix3d;

/// Analytic Jacobian of the replicator field. Row 3, column 2 uses
/// x(J - delta + v), the derivative of the z-bracket in y.
inline Matrix3 jacobian(const StrategyState& s, const GamePayoffParams& p) {
  const double x = s.x, y = s.y, z = s.z;
  const double gx = x * (1 - x), gy = y * (1 - y), gz = z * (1 - z);
  Matrix3 J;
  J(0, 0) = (1 - 2 * x) * bracket_x(y, z, p);
  J(0, 1) = gx * (p.beta - p.alpha + p.delta * z);
  J(0, 2) = gx * (p.delta * y - p.delta);
  J(1, 0) = gy * (p.alpha + p.C);
  J(1, 1) = (1 - 2 * y) * bracket_y(x, z, p);
  J(1, 2) = gy * (-p.T);
  J(2, 0) = gz * (p.delta + y * (p.J - p.delta + p.v));
  J(2, 1) = gz * (p.epsilon - p.J + p.delta + p.T - p.v + p.Y +
                  x * (p.J - p.delta + p.v));
  J(2, 2) = (1 - 2 * z) * bracket_z(x, y, p);
  return J;
}

// ---------------------------------------------------------------------------
// Equilibria and stability

enum class Stability { stable, unstable, saddle, non_hyperbolic };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable (ESS)";
    case Stability::unstable: return "unstable";
    case Stability::saddle: return "saddle";
    case Stability::non_hyperbolic: return "non-hyperbolic";
  }
  return "?";
}

constexpr double kStabilityTol = 1e-9;

template <typename Range>
Stability classify(const Range& eigenvalues, double tol = kStabilityTol) {
  bool all_neg = true, all_pos = true;
  for (const auto& l : eigenvalues) {
    const double re = std::real(l);
    if (std::abs(re) <= tol) return Stability::non_hyperbolic;
    all_neg = all_neg && re < -tol;
    all_pos = all_pos && re > tol;
  }
  if (all_neg) return Stability::stable;
  if (all_pos) return Stability::unstable;
  return Stability::saddle;
}

struct EquilibriumReport {
  std::string name;  // E1..E8 for vertices
  std::string kind;  // "vertex", "face" or "interior"
  StrategyState point;
  std::array<std::complex<double>, 3> eigenvalues;
  Stability classification = Stability::non_hyperbolic;
};

// Vertices N1..N8 in table order.
inline const std::array<StrategyState, 8>& vertices() {
  static const std::array<StrategyState, 8> v = {{{0, 0, 0},
                                                  {1, 0, 0},
                                                  {0, 1, 0},
                                                  {0, 0, 1},
                                                  {1, 1, 0},
                                                  {1, 0, 1},
                                                  {0, 1, 1},
                                                  {1, 1, 1}}};
  return v;
}

/// Closed-form vertex eigenvalues in the order the eigenvalue table lists
/// them (which is not always x, y, z order).
inline std::array<std::array<double, 3>, 8> vertex_eigenvalue_formulas(
    const GamePayoffParams& p) {
  const double Cg = p.Cg, a = p.alpha, b = p.beta, R = p.R, I = p.I, Cf = p.Cf,
               C = p.C, g = p.gamma, O = p.O, eta = p.eta, T = p.T, Cp = p.Cp,
               eps = p.epsilon, d = p.delta, Y = p.Y, J = p.J, v = p.v;
  return {{
      {I - Cg + R, eta - Cf - O + g, J - Cp + v - Y},
      {Cg - I - R, J - Cp + d + v - Y, a + C - Cf + eta - O + g},
      {Cf - eta + O - g, eps - Cp + d + T, b - a - Cg + I + R},
      {I - Cg - d + R, Cp - J - v + Y, eta - Cf - O - T + g},
      {a - b + Cg - I - R, eps - Cp + J + d + T + v, Cf - C - a - eta + O - g},
      {Cg - I + d - R, Cp - J - d - v + Y, a + C - Cf + eta - O - T + g},
      {Cp - eps - d - T, b - a - Cg + I + R, Cf - eta + O + T - g},
      {a - b + Cg - I - R, Cp - eps - J - d - T - v, Cf - C - a - eta + O + T - g},
  }};
}

// Which state coordinate each tabulated eigenvalue belongs to.
inline const std::array<std::array<int, 3>, 8>& vertex_eigenvalue_axes() {
  static const std::array<std::array<int, 3>, 8> axes = {{{0, 1, 2},
                                                          {0, 2, 1},
                                                          {1, 2, 0},
                                                          {0, 2, 1},
                                                          {0, 2, 1},
                                                          {0, 2, 1},
                                                          {2, 0, 1},
                                                          {0, 2, 1}}};
  return axes;
}

/// Eigenvalues at each vertex, reordered to (x, y, z) axis order.
inline std::array<double, 3> vertex_axis_eigenvalues(const GamePayoffParams& p,
                                                     std::size_t vertex) {
  const auto f = vertex_eigenvalue_formulas(p)[vertex];
  const auto& ax = vertex_eigenvalue_axes()[vertex];
  std::array<double, 3> out{};
  for (std::size_t k = 0; k < 3; ++k) out[static_cast<std::size_t>(ax[k])] = f[k];
  return out;
}

inline std::array<EquilibriumReport, 8> vertex_eigenvalues(const GamePayoffParams& p) {
  validate(p);
  const auto f = vertex_eigenvalue_formulas(p);
  std::array<EquilibriumReport, 8> out;
  for (std::size_t i = 0; i < 8; ++i) {
    auto& r = out[i];
    r.name = "E" + std::to_string(i + 1);
    r.kind = "vertex";
    r.point = vertices()[i];
    for (std::size_t k = 0; k < 3; ++k) r.eigenvalues[k] = f[i][k];
    r.classification = classify(r.eigenvalues);
  }
  return out;
}

inline EquilibriumReport report_at(const StrategyState& s, const GamePayoffParams& p,
                                   std::string kind) {
  EquilibriumReport r;
  r.kind = std::move(kind);
  r.point = s;
  Eigen::EigenSolver<Matrix3> es(jacobian(s, p), false);
  for (int k = 0; k < 3; ++k) r.eigenvalues[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            });
  r.classification = classify(r.eigenvalues);
  return r;
}

struct EquilibriumSet {
  std::vector<EquilibriumReport> points;
  std::vector<std::string> diagnostics;
};

namespace detail {

inline double bracket(int axis, const StrategyState& s, const GamePayoffParams& p) {
  return brackets(s, p)[static_cast<std::size_t>(axis)];
}

inline void set_axis(StrategyState& s, int axis, double v) {
  (axis == 0 ? s.x : axis == 1 ? s.y : s.z) = v;
}

inline bool merge_into(std::vector<EquilibriumReport>& pts, const StrategyState& s,
                       double tol = 1e-8) {
  for (const auto& q : pts)
    if (std::abs(q.point.x - s.x) <= tol && std::abs(q.point.y - s.y) <= tol &&
        std::abs(q.point.z - s.z) <= tol)
      return true;
  return false;
}

inline std::string fmt_state(const StrategyState& s) {
  return "(" + io::format_double(s.x) + ", " + io::format_double(s.y) + ", " +
         io::format_double(s.z) + ")";
}

}  // namespace detail

/// All rest points of the replicator system in [0,1]^3: the 8 vertices, the
/// closed-form face solutions (two brackets zero, third coordinate pure), and
/// interior roots from damped Newton on the three brackets seeded on a 5x5x5
/// grid. Edges only carry rest points when a bracket vanishes identically
/// along them, which is reported as a degenerate continuum in diagnostics.
inline EquilibriumSet find_equilibria(const GamePayoffParams& p) {
  validate(p);
  EquilibriumSet out;
  for (const auto& r : vertex_eigenvalues(p)) out.points.push_back(r);

  // Edges: one free coordinate, whose bracket is constant along the edge.
  for (int free = 0; free < 3; ++free)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        StrategyState s;
        const int o1 = (free + 1) % 3, o2 = (free + 2) % 3;
        detail::set_axis(s, o1, a);
        detail::set_axis(s, o2, b);
        if (std::abs(detail::bracket(free, s, p)) <= 1e-12)
          out.diagnostics.push_back("degenerate edge: every point with fixed " +
                                    detail::fmt_state(s) +
                                    " along axis " + std::to_string(free) +
                                    " is a rest point");
      }

  // Faces: coordinate `fixed` pure, the other two solve their (affine) brackets.
  // Each bracket is affine in every single coordinate, so evaluating at 0 and
  // 1 recovers its coefficients exactly.
  for (int fixed = 0; fixed < 3; ++fixed)
    for (int level = 0; level < 2; ++level) {
      const int a = (fixed + 1) % 3, b = (fixed + 2) % 3;
      // Bracket of a depends on b (and fixed); bracket of b depends on a.
      auto solve_for = [&](int who, int var) -> std::optional<double> {
        StrategyState s0, s1;
        detail::set_axis(s0, fixed, level);
        detail::set_axis(s1, fixed, level);
        detail::set_axis(s0, var, 0);
        detail::set_axis(s1, var, 1);
        const double f0 = detail::bracket(who, s0, p);
        const double slope = detail::bracket(who, s1, p) - f0;
        if (std::abs(slope) <= 1e-14) {
          const char* axis = "xyz";
          out.diagnostics.push_back(
              std::string("face ") + axis[fixed] + " = " + std::to_string(level) +
              ": bracket of " + axis[who] + " does not depend on " + axis[var] +
              (std::abs(f0) <= 1e-12 ? " and vanishes (continuum of rest points)"
                                     : ", no rest point inside the face"));
          return std::nullopt;
        }
        return -f0 / slope;
      };
      const auto vb = solve_for(a, b);
      const auto va = solve_for(b, a);
      if (!va || !vb) continue;
      StrategyState s;
      detail::set_axis(s, fixed, level);
      detail::set_axis(s, a, *va);
      detail::set_axis(s, b, *vb);
      if (!in_cube(s, 1e-12)) continue;
      s = {std::clamp(s.x, 0.0, 1.0), std::clamp(s.y, 0.0, 1.0), std::clamp(s.z, 0.0, 1.0)};
      if (!detail::merge_into(out.points, s))
        out.points.push_back(report_at(s, p, "face"));
    }

  // Interior: damped Newton on the bracket system.
  auto F = [&](const Eigen::Vector3d& q) {
    const auto b = brackets({q(0), q(1), q(2)}, p);
    return Eigen::Vector3d(b[0], b[1], b[2]);
  };
  auto DF = [&](const Eigen::Vector3d& q) {
    const double x = q(0), y = q(1), z = q(2);
    Matrix3 D;
    D << 0, -(p.alpha - p.beta - p.delta * z), y * p.delta - p.delta,
        p.alpha + p.C, 0, -p.T,
        p.delta + y * (p.J - p.delta + p.v),
        p.epsilon - p.J + p.delta + p.T - p.v + p.Y + x * (p.J - p.delta + p.v), 0;
    return D;
  };
  int failed = 0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) {
        Eigen::Vector3d q((i + 0.5) / 5, (j + 0.5) / 5, (k + 0.5) / 5);
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
          const Eigen::Vector3d f = F(q);
          const double norm = f.norm();
          if (norm < 1e-13) {
            converged = true;
            break;
          }
          Eigen::FullPivLU<Matrix3> lu(DF(q));
          if (!lu.isInvertible()) break;
          const Eigen::Vector3d step = lu.solve(f);
          double lambda = 1.0;
          while (lambda > 1e-6 && F(q - lambda * step).norm() >= norm) lambda /= 2;
          if (lambda <= 1e-6) break;
          q -= lambda * step;
          if (q.cwiseAbs().maxCoeff() > 1e6) break;
        }
        if (!converged) {
          ++failed;
          continue;
        }
        StrategyState s{q(0), q(1), q(2)};
        if (!in_cube(s, 1e-12)) continue;
        s = {std::clamp(s.x, 0.0, 1.0), std::clamp(s.y, 0.0, 1.0), std::clamp(s.z, 0.0, 1.0)};
        if (!detail::merge_into(out.points, s))
          out.points.push_back(report_at(s, p, "interior"));
      }
  if (failed)
    out.diagnostics.push_back("interior search: Newton did not converge from " +
                              std::to_string(failed) + " of 125 seeds");
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
  std::vector<double> t;
  std::vector<StrategyState> states;
};

// Overshoot beyond the cube that is clamped silently.
constexpr double kClampTol = 1e-9;

/// Fixed-step RK4 integration of the replicator system from t = 0 to t_end,
/// recording every `sample_every`-th step (plus the final state).
inline Trajectory simulate_trajectory(const StrategyState& initial,
                                      const GamePayoffParams& p, double t_end,
                                      double dt, std::size_t sample_every = 1) {
  validate(p);
  require_in_cube(initial);
  if (!(dt > 0) || !std::isfinite(dt)) fail(ErrorKind::domain, "dt must be positive");
  if (!(t_end >= 0) || !std::isfinite(t_end))
    fail(ErrorKind::domain, "t_end must be nonnegative");
  if (sample_every == 0) sample_every = 1;
  auto rhs = [&](double, const ode::Vec<3>& s) {
    return replicator_field({s[0], s[1], s[2]}, p);
  };
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(t_end / dt - 1e-9)));
  Trajectory tr;
  tr.t.reserve(steps / sample_every + 2);
  tr.states.reserve(steps / sample_every + 2);
  ode::Vec<3> s = {initial.x, initial.y, initial.z};
  tr.t.push_back(0);
  tr.states.push_back(initial);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double h = std::min(dt, t_end - t0);
    s = ode::rk4_step<3>(rhs, t0, s, h);
    for (double& c : s) {
      if (c < 0 || c > 1) {
        const double over = c < 0 ? -c : c - 1;
        if (over > kClampTol || !std::isfinite(c))
          fail(ErrorKind::numeric, "trajectory left [0,1]^3 by " + io::format_double(over) +
                                       " at t=" + io::format_double(t0 + h) +
                                       "; use a smaller dt");
        c = std::clamp(c, 0.0, 1.0);
      }
    }
    if (k % sample_every == 0 || k == steps) {
      tr.t.push_back(k == steps ? t_end : static_cast<double>(k) * dt);
      tr.states.push_back({s[0], s[1], s[2]});
    }
  }
  return tr;
}

inline std::string format_trajectory_csv(const Trajectory& tr) {
  std::string out = "t,x,y,z\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    out += io::format_double(tr.t[i]) + "," + io::format_double(tr.states[i].x) + "," +
           io::format_double(tr.states[i].y) + "," + io::format_double(tr.states[i].z) +
           "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parameter I/O and the shipped preset

inline const std::array<const char*, 17>& param_names() {
  static const std::array<const char*, 17> names = {
      "Cg", "alpha", "beta", "R", "I", "Cf", "C", "gamma", "O",
      "eta", "T", "Cp", "epsilon", "delta", "Y", "J", "v"};
  return names;
}

inline std::array<double*, 17> param_refs(GamePayoffParams& p) {
  return {&p.Cg, &p.alpha, &p.beta, &p.R, &p.I, &p.Cf, &p.C, &p.gamma, &p.O,
          &p.eta, &p.T, &p.Cp, &p.epsilon, &p.delta, &p.Y, &p.J, &p.v};
}

inline GamePayoffParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::schema, "game parameters must be a JSON object");
  GamePayoffParams p;
  auto refs = param_refs(p);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const char* key = param_names()[i];
    if (!j.contains(key) || !j.at(key).is_number())
      fail(ErrorKind::schema, std::string("game parameters: missing numeric key '") + key + "'");
    *refs[i] = j.at(key).get<double>();
  }
  for (const auto& [key, _] : j.items()) {
    if (key.empty() || key[0] == '_') continue;  // comments / metadata
    if (std::find_if(param_names().begin(), param_names().end(),
                     [&](const char* n) { return key == n; }) == param_names().end())
      fail(ErrorKind::schema, "game parameters: unknown key '" + key + "'");
  }
  validate(p);
  return p;
}

inline nlohmann::json to_json(const GamePayoffParams& p) {
  nlohmann::json j = nlohmann::json::object();
  auto copy = p;
  auto refs = param_refs(copy);
  for (std::size_t i = 0; i < refs.size(); ++i) j[param_names()[i]] = *refs[i];
  return j;
}

/// Preset obtained from the sign annotations of the vertex eigenvalue table:
/// E1 entirely positive (unstable origin), E8 entirely negative ((1,1,1) an
/// ESS) and every other annotation that is consistent with those two. Not an
/// empirical calibration.
inline GamePayoffParams default_preset() {
  GamePayoffParams p;
  p.Cg = 2;
  p.alpha = 2;
  p.beta = 2;
  p.R = 2;
  p.I = 3;
  p.Cf = 2;
  p.C = 1;
  p.gamma = 1;
  p.O = 3;
  p.eta = 5;
  p.T = 0.5;
  p.Cp = 2;
  p.epsilon = 1;
  p.delta = 1;
  p.Y = 0.5;
  p.J = 2;
  p.v = 1;
  return p;
}

// Printed sign annotations of the vertex eigenvalue table, same layout as
// vertex_eigenvalue_formulas().
inline const std::array<std::array<int, 3>, 8>& tabulated_signs() {
  static const std::array<std::array<int, 3>, 8> s = {{{+1, +1, +1},
                                                       {-1, +1, +1},
                                                       {-1, +1, -1},
                                                       {+1, +1, +1},
                                                       {+1, +1, -1},
                                                       {-1, -1, +1},
                                                       {-1, -1, -1},
                                                       {-1, -1, -1}}};
  return s;
}

struct SignViolation {
  std::size_t vertex;  // 0-based (E1 = 0)
  std::size_t slot;    // 0-based column in the table
  int expected;
  double value;
};

inline std::vector<SignViolation> sign_violations(const GamePayoffParams& p) {
  std::vector<SignViolation> out;
  const auto f = vertex_eigenvalue_formulas(p);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      const int want = tabulated_signs()[i][k];
      if (!(want * f[i][k] > 0)) out.push_back({i, k, want, f[i][k]});
    }
  return out;
}

inline nlohmann::json to_json(const EquilibriumReport& r) {
  auto eig = nlohmann::json::array();
  for (const auto& l : r.eigenvalues) eig.push_back({{"re", l.real()}, {"im", l.imag()}});
  nlohmann::json j = {{"kind", r.kind},
                      {"point", {r.point.x, r.point.y, r.point.z}},
                      {"eigenvalues", eig},
                      {"classification", to_string(r.classification)}};
  if (!r.name.empty()) j["name"] = r.name;
  return j;
}

}  // namespace gpm::game
