#pragma once

#include <stdexcept>
#include <utility>

namespace mpe {

/// Number of equal internal steps per flow call. The method itself is fixed
/// at 10 stages and order 4.
struct RkConfig {
  int substeps = 4;
};

/// Ketcheson's low-storage SSPRK(10,4) for u' = f(u) over a total time tau,
/// split into cfg.substeps equal steps. State needs `State + State` and
/// `double * State`.
template <class State, class Rhs>
State ssprk104(Rhs&& f, State u, double tau, RkConfig cfg = {}) {
  if (cfg.substeps < 1) throw std::invalid_argument("RK substeps must be >= 1");
  if (tau == 0.0) return u;
  const double dt = tau / cfg.substeps;
  for (int s = 0; s < cfg.substeps; ++s) {
    State q1 = u;
    State q2 = u;
    for (int i = 0; i < 5; ++i) q1 = q1 + (dt / 6.0) * f(q1);
    q2 = (1.0 / 25.0) * q2 + (9.0 / 25.0) * q1;
    q1 = 15.0 * q2 + (-5.0) * q1;
    for (int i = 0; i < 4; ++i) q1 = q1 + (dt / 6.0) * f(q1);
    u = q2 + (3.0 / 5.0) * q1 + (dt / 10.0) * f(q1);
  }
  return u;
}

}  // namespace mpe
