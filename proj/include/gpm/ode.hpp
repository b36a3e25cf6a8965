#pragma once

#include <array>
#include <cstddef>

namespace gpm::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
Vec<N> axpy(const Vec<N>& x, double a, const Vec<N>& y) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * y[i];
  return out;
}

// One classic fourth-order Runge-Kutta step for an autonomous or
// time-dependent system `rhs(t, x) -> dx/dt`.
template <std::size_t N, typename Rhs>
Vec<N> rk4_step(const Rhs& rhs, double t, const Vec<N>& x, double dt) {
  const Vec<N> k1 = rhs(t, x);
  const Vec<N> k2 = rhs(t + dt / 2, axpy(x, dt / 2, k1));
  const Vec<N> k3 = rhs(t + dt / 2, axpy(x, dt / 2, k2));
  const Vec<N> k4 = rhs(t + dt, axpy(x, dt, k3));
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace gpm::ode
