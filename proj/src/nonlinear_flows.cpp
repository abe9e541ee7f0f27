#include "mpe/nonlinear_flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mpe {

double flow_tanh(double v, double lambda, double tau) {
  if (v == 0.0 || tau == 0.0) return v;
  const double growth = lambda * tau;
  const double a = std::abs(v);
  // log|sinh v| + lambda tau, valid for every a > 0.
  const double log_mag = a + std::log1p(-std::exp(-2.0 * a)) - std::log(2.0);
  const double log_x = log_mag + growth;
  if (log_x > 20.0) {
    // arcsinh(X) = log X + log(1 + sqrt(1 + X^-2)) for X = exp(log_x).
    const double r = log_x + std::log1p(std::sqrt(1.0 + std::exp(-2.0 * log_x)));
    return std::copysign(r, v);
  }
  return std::asinh(std::sinh(v) * std::exp(growth));
}

Field flow_tanh(const Field& v, double lambda, double tau) {
  Field out = v;
  for (auto& z : out.values()) z = Complex(flow_tanh(z.real(), lambda, tau), 0.0);
  return out;
}

double flow_double_well(double v, double tau) {
  if (tau == 0.0) return v;
  const double denom = 1.0 + std::expm1(2.0 * tau) * v * v;
  if (!(denom > 0.0)) {
    std::ostringstream msg;
    msg << "double-well flow blows up for v = " << v << " at tau = " << tau;
    throw std::domain_error(msg.str());
  }
  return std::exp(tau) * v / std::sqrt(denom);
}

Field flow_double_well(const Field& v, double tau, double bound) {
  const double vmax = norm_inf(v);
  if (vmax > bound) {
    std::ostringstream msg;
    msg << "closed-form double-well flow requires max|v| <= " << bound
        << ", got " << vmax;
    throw std::domain_error(msg.str());
  }
  Field out = v;
  for (auto& z : out.values()) z = Complex(flow_double_well(z.real(), tau), 0.0);
  return out;
}

Field flow_phase(const Field& v, const Field& omega, double rho, double tau) {
  if (!v.grid().same_as(omega.grid())) throw std::invalid_argument("grid mismatch");
  Field out = v;
  const auto w = omega.component(0);
  const std::size_t m = v.grid().size();
  for (int c = 0; c < v.components(); ++c) {
    auto vals = out.component(c);
    for (std::size_t k = 0; k < m; ++k) {
      const double phase = tau * (w[k].real() + rho * std::norm(vals[k]));
      vals[k] *= std::polar(1.0, phase);
    }
  }
  return out;
}

double truncate_double_well(double u, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("truncation bound must be positive");
  if (u > M) return (1.0 - 3.0 * M * M) * u + 2.0 * M * M * M;
  if (u < -M) return (1.0 - 3.0 * M * M) * u - 2.0 * M * M * M;
  return u - u * u * u;
}

double truncate_double_well_derivative(double u, double M) {
  if (std::abs(u) > M) return 1.0 - 3.0 * M * M;
  return 1.0 - 3.0 * u * u;
}

double double_well_kappa(double M) { return std::max(1.0, 3.0 * M * M - 1.0); }

double fkpp_coefficient(double p, double q) {
  if (p == std::floor(p) && q == std::floor(q) && p >= 0 && q >= 0 && p + q <= 160) {
    // (p+q+1)! / (p! q!) as an exact running product while it fits.
    double k = p + q + 1;
    for (int i = 1; i <= static_cast<int>(q); ++i) k = k * (p + i) / i;
    return k;
  }
  return std::exp(std::lgamma(p + q + 2.0) - std::lgamma(p + 1.0) -
                  std::lgamma(q + 1.0));
}

double truncate_fkpp(double u, double M, double K) {
  if (!(M > 0.0)) throw std::invalid_argument("truncation bound must be positive");
  const double m4 = M * M * M * M;
  if (u > M) {
    const double c = K * m4 * std::pow(1.0 - M, 4);
    return 5.0 * c * (1.0 - 2.0 * M) * u + c * (9.0 * M * M - 4.0 * M);
  }
  if (u < -M) {
    const double c = K * m4 * std::pow(1.0 + M, 4);
    return 5.0 * c * (1.0 + 2.0 * M) * u + c * (9.0 * M * M + 4.0 * M);
  }
  return K * std::pow(u, 5) * std::pow(1.0 - u, 5);
}

double truncate_fkpp_derivative(double u, double M, double K) {
  const double x = std::clamp(u, -M, M);
  return 5.0 * K * std::pow(x, 4) * std::pow(1.0 - x, 4) * (1.0 - 2.0 * x);
}

Field conservative_rhs(const std::function<double(double)>& f_base,
                       const Field& u) {
  Field out(u.grid_ptr(), ScalarKind::Real, u.components());
  for (int c = 0; c < u.components(); ++c) {
    const auto in = u.component(c);
    auto vals = out.component(c);
    for (std::size_t k = 0; k < in.size(); ++k) vals[k] = f_base(in[k].real());
    const double avg = mean(out, c).real();
    for (auto& z : vals) z -= avg;
  }
  return out;
}

// ---------------------------------------------------------------------------

NonlinearFlow NonlinearFlow::tanh_flow(double lambda) {
  NonlinearFlow nf;
  nf.kind_ = FlowKind::ClosedFormTanh;
  nf.lambda_ = lambda;
  nf.kappa_ = std::abs(lambda);
  nf.f_ = [lambda](double u) { return lambda * std::tanh(u); };
  return nf;
}

NonlinearFlow NonlinearFlow::double_well(double M, RkConfig rk) {
  NonlinearFlow nf;
  nf.kind_ = FlowKind::ClosedFormDoubleWell;
  nf.bound_ = M;
  nf.kappa_ = double_well_kappa(M);
  nf.rk_ = rk;
  nf.f_ = [M](double u) { return truncate_double_well(u, M); };
  return nf;
}

NonlinearFlow NonlinearFlow::phase(Field omega, double rho) {
  NonlinearFlow nf;
  nf.kind_ = FlowKind::ClosedFormPhase;
  nf.rho_ = rho;
  nf.omega_ = std::move(omega);
  return nf;
}

NonlinearFlow NonlinearFlow::pointwise(std::function<double(double)> f,
                                       double kappa, RkConfig rk,
                                       bool conservative,
                                       std::optional<double> truncation_bound) {
  NonlinearFlow nf;
  nf.kind_ = FlowKind::RkGeneric;
  nf.f_ = std::move(f);
  nf.kappa_ = kappa;
  nf.rk_ = rk;
  nf.conservative_ = conservative;
  nf.bound_ = truncation_bound;
  return nf;
}

NonlinearFlow NonlinearFlow::reaction_system(double k_plus, double k_minus,
                                             double M, RkConfig rk) {
  NonlinearFlow nf;
  nf.kind_ = FlowKind::RkSystem;
  nf.k_plus_ = k_plus;
  nf.k_minus_ = k_minus;
  nf.bound_ = M;
  // |g_u| + |g_v| <= k+ M^2 + 2 k+ M^2 + 3 k- M^2 on the box.
  nf.kappa_ = 2.0 * (3.0 * std::abs(k_plus) + 3.0 * std::abs(k_minus)) * M * M;
  nf.rk_ = rk;
  return nf;
}

Field NonlinearFlow::rhs(const Field& v) const {
  switch (kind_) {
    case FlowKind::ClosedFormPhase: {
      Field out = v;
      const auto w = omega_->component(0);
      const std::size_t m = v.grid().size();
      for (int c = 0; c < v.components(); ++c) {
        auto vals = out.component(c);
        for (std::size_t k = 0; k < m; ++k) {
          vals[k] *= Complex(0.0, w[k].real() + rho_ * std::norm(vals[k]));
        }
      }
      return out;
    }
    case FlowKind::RkSystem: {
      if (v.components() != 2) {
        throw std::invalid_argument("reaction system needs a two-component field");
      }
      Field out(v.grid_ptr(), ScalarKind::Real, 2);
      const auto u = v.component(0);
      const auto w = v.component(1);
      auto du = out.component(0);
      auto dw = out.component(1);
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double a = u[k].real();
        const double b = w[k].real();
        const double g = k_plus_ * a * b * b - k_minus_ * b * b * b;
        du[k] = -g;
        dw[k] = g;
      }
      return out;
    }
    default: {
      if (conservative_) return conservative_rhs(f_, v);
      Field out(v.grid_ptr(), ScalarKind::Real, v.components());
      for (std::size_t k = 0; k < v.size(); ++k) out[k] = f_(v[k].real());
      return out;
    }
  }
}

Field NonlinearFlow::operator()(double tau, const Field& v) const {
  if (tau == 0.0) return v;
  switch (kind_) {
    case FlowKind::ClosedFormTanh:
      return flow_tanh(v, lambda_, tau);
    case FlowKind::ClosedFormPhase:
      return flow_phase(v, *omega_, rho_, tau);
    case FlowKind::ClosedFormDoubleWell: {
      const double M = *bound_;
      if (norm_inf(v) <= M) {
        // Forward in time the untruncated flow never leaves [-M, M]; backward
        // it can, in which case the truncated dynamics take over.
        bool inside = true;
        Field out = v;
        for (auto& z : out.values()) {
          const double x = z.real();
          const double denom = 1.0 + std::expm1(2.0 * tau) * x * x;
          if (!(denom > 0.0)) {
            inside = false;
            break;
          }
          const double y = std::exp(tau) * x / std::sqrt(denom);
          if (std::abs(y) > M) {
            inside = false;
            break;
          }
          z = Complex(y, 0.0);
        }
        if (inside) return out;
      }
      auto f = [this](const Field& u) { return rhs(u); };
      return ssprk104(f, v, tau, rk_);
    }
    case FlowKind::RkGeneric:
    case FlowKind::RkSystem: {
      auto f = [this](const Field& u) { return rhs(u); };
      return ssprk104(f, v, tau, rk_);
    }
  }
  throw std::logic_error("unknown flow kind");
}

}  // namespace mpe
