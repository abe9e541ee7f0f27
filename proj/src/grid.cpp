#include "mpe/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpe {

namespace {

// FFTW planning is not thread-safe; execution on an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

class FftPlans {
 public:
  FftPlans(int dim, int n) {
    std::vector<Complex> scratch(dim == 1 ? n : static_cast<std::size_t>(n) * n);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim == 1) {
      fwd_ = fftw_plan_dft_1d(n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_FORWARD, flags);
      bwd_ = fftw_plan_dft_1d(n, as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_BACKWARD, flags);
    } else {
      fwd_ = fftw_plan_dft_2d(n, n, as_fftw(scratch.data()),
                              as_fftw(scratch.data()), FFTW_FORWARD, flags);
      bwd_ = fftw_plan_dft_2d(n, n, as_fftw(scratch.data()),
                              as_fftw(scratch.data()), FFTW_BACKWARD, flags);
    }
    if (fwd_ == nullptr || bwd_ == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
  }
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(Complex* data) const {
    fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data));
  }
  void backward(Complex* data) const {
    fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data));
  }

 private:
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

SpectralGrid::SpectralGrid(int dim, int n_per_axis, double length, double origin)
    : dim_(dim), n_(n_per_axis), length_(length), origin_(origin) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("grid dimension must be 1 or 2");
  }
  if (n_per_axis < 2 || n_per_axis % 2 != 0) {
    throw std::invalid_argument("grid size must be even and >= 2, got " +
                                std::to_string(n_per_axis));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("grid length must be positive");
  }
  size_ = dim == 1 ? static_cast<std::size_t>(n_)
                   : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  symbols_.resize(size_);
  if (dim == 1) {
    for (int i = 0; i < n_; ++i) symbols_[i] = laplacian_symbol(wavenumber(i));
  } else {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) {
        symbols_[static_cast<std::size_t>(i) * n_ + j] =
            laplacian_symbol(wavenumber(i), wavenumber(j));
      }
    }
  }
  plans_ = std::make_unique<FftPlans>(dim, n_);
}

SpectralGrid::~SpectralGrid() = default;

double SpectralGrid::cell_volume() const { return std::pow(spacing(), dim_); }

double SpectralGrid::volume() const { return std::pow(length_, dim_); }

int SpectralGrid::wavenumber(int slot) const {
  if (slot < 0 || slot >= n_) throw std::out_of_range("FFT slot out of range");
  return slot < n_ / 2 ? slot : slot - n_;
}

double SpectralGrid::laplacian_symbol(int p, int q) const {
  const int lo = -n_ / 2;
  const int hi = n_ / 2 - 1;
  if (p < lo || p > hi || q < lo || q > hi || (dim_ == 1 && q != 0)) {
    throw std::out_of_range("wavenumber index out of range");
  }
  const double kp = 2.0 * p * std::numbers::pi / length_;
  const double kq = 2.0 * q * std::numbers::pi / length_;
  return kp * kp + kq * kq;
}

bool SpectralGrid::same_as(const SpectralGrid& other) const {
  return this == &other || (dim_ == other.dim_ && n_ == other.n_ &&
                            length_ == other.length_ && origin_ == other.origin_);
}

void SpectralGrid::forward(std::span<Complex> data) const {
  if (data.size() % size_ != 0) {
    throw std::invalid_argument("transform buffer is not a multiple of grid size");
  }
  for (std::size_t off = 0; off < data.size(); off += size_) {
    plans_->forward(data.data() + off);
  }
}

void SpectralGrid::inverse(std::span<Complex> data) const {
  if (data.size() % size_ != 0) {
    throw std::invalid_argument("transform buffer is not a multiple of grid size");
  }
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t off = 0; off < data.size(); off += size_) {
    plans_->backward(data.data() + off);
  }
  for (auto& v : data) v *= scale;
}

GridPtr make_grid(int dim, int n_per_axis, double length, double origin) {
  return std::make_shared<const SpectralGrid>(dim, n_per_axis, length, origin);
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, ScalarKind kind, int components)
    : grid_(std::move(grid)), kind_(kind), components_(components) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (components < 1) throw std::invalid_argument("field needs >= 1 component");
  values_.assign(grid_->size() * static_cast<std::size_t>(components),
                 Complex(0.0, 0.0));
}

Field::Field(GridPtr grid, ScalarKind kind, std::vector<Complex> values,
             int components)
    : grid_(std::move(grid)),
      kind_(kind),
      components_(components),
      values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("field needs a grid");
  if (components < 1) throw std::invalid_argument("field needs >= 1 component");
  if (values_.size() != grid_->size() * static_cast<std::size_t>(components)) {
    throw std::invalid_argument("field value count does not match grid");
  }
}

std::span<Complex> Field::component(int c) {
  if (c < 0 || c >= components_) throw std::out_of_range("component index");
  return std::span<Complex>(values_).subspan(c * grid_->size(), grid_->size());
}

std::span<const Complex> Field::component(int c) const {
  if (c < 0 || c >= components_) throw std::out_of_range("component index");
  return std::span<const Complex>(values_).subspan(c * grid_->size(),
                                                   grid_->size());
}

void Field::require_compatible(const Field& other) const {
  if (!grid_ || !other.grid_ || !grid_->same_as(*other.grid_)) {
    throw std::invalid_argument("grid mismatch");
  }
  if (components_ != other.components_) {
    throw std::invalid_argument("component count mismatch");
  }
}

Field& Field::operator+=(const Field& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  if (other.kind_ == ScalarKind::Complex) kind_ = ScalarKind::Complex;
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_compatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  if (other.kind_ == ScalarKind::Complex) kind_ = ScalarKind::Complex;
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

void Field::project_real() {
  if (kind_ != ScalarKind::Real) return;
  for (auto& v : values_) v = Complex(v.real(), 0.0);
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

std::vector<Complex> forward_transform(const Field& f) {
  std::vector<Complex> spec(f.values().begin(), f.values().end());
  f.grid().forward(spec);
  return spec;
}

Field inverse_transform(const GridPtr& grid, ScalarKind kind,
                        std::vector<Complex> spectrum, int components) {
  grid->inverse(spectrum);
  Field out(grid, kind, std::move(spectrum), components);
  out.project_real();
  return out;
}

Field linear_propagate(const Field& f, std::span<const Complex> nu, double tau,
                       bool allow_backward) {
  if (nu.size() != 1 && nu.size() != static_cast<std::size_t>(f.components())) {
    throw std::invalid_argument("need one diffusion coefficient per component");
  }
  if (!std::isfinite(tau)) throw std::invalid_argument("non-finite step");
  for (const auto& c : nu) {
    if (tau < 0.0 && c.real() > 0.0 && !allow_backward) {
      throw std::domain_error(
          "backward linear step with dissipative coefficient requires "
          "allow_backward");
    }
  }
  if (tau == 0.0) return f;
  const auto& grid = f.grid();
  auto spec = forward_transform(f);
  const auto symbols = grid.symbols();
  const std::size_t m = grid.size();
  for (int c = 0; c < f.components(); ++c) {
    const Complex rate = -tau * nu[nu.size() == 1 ? 0 : c];
    Complex* block = spec.data() + c * m;
    for (std::size_t k = 0; k < m; ++k) {
      if (symbols[k] != 0.0) block[k] *= std::exp(rate * symbols[k]);
    }
  }
  return inverse_transform(f.grid_ptr(), f.kind(), std::move(spec),
                           f.components());
}

Field linear_propagate(const Field& f, Complex nu, double tau,
                       bool allow_backward) {
  return linear_propagate(f, std::span<const Complex>(&nu, 1), tau,
                          allow_backward);
}

Complex integrate(const Field& f, int component) {
  const auto v = f.component(component);
  // Neumaier-compensated sum so that large grids do not lose mass digits.
  double sr = 0, cr = 0, si = 0, ci = 0;
  auto add = [](double& s, double& c, double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  };
  for (const auto& z : v) {
    add(sr, cr, z.real());
    add(si, ci, z.imag());
  }
  return f.grid().cell_volume() * Complex(sr + cr, si + ci);
}

Complex mean(const Field& f, int component) {
  return integrate(f, component) / f.grid().volume();
}

double norm_l2(const Field& f) {
  double s = 0.0;
  for (const auto& z : f.values()) s += std::norm(z);
  return std::sqrt(f.grid().cell_volume() * s);
}

double norm_inf(const Field& f) {
  double m = 0.0;
  for (const auto& z : f.values()) m = std::max(m, std::abs(z));
  return m;
}

double imag_ratio(const Field& f) {
  double mi = 0.0;
  for (const auto& z : f.values()) mi = std::max(mi, std::abs(z.imag()));
  const double m = norm_inf(f);
  return m == 0.0 ? 0.0 : mi / m;
}

Field spectral_derivative(const Field& f, int axis) {
  const auto& grid = f.grid();
  if (axis < 0 || axis >= grid.dim()) throw std::out_of_range("axis");
  const int n = grid.n();
  const double base = 2.0 * std::numbers::pi / grid.length();
  auto spec = forward_transform(f);
  const std::size_t m = grid.size();
  for (int c = 0; c < f.components(); ++c) {
    Complex* block = spec.data() + c * m;
    for (std::size_t k = 0; k < m; ++k) {
      const int slot = grid.dim() == 1 ? static_cast<int>(k)
                       : axis == 0     ? static_cast<int>(k / n)
                                       : static_cast<int>(k % n);
      if (slot == n / 2) {
        block[k] = 0.0;
      } else {
        block[k] *= Complex(0.0, base * grid.wavenumber(slot));
      }
    }
  }
  return inverse_transform(f.grid_ptr(), f.kind(), std::move(spec),
                           f.components());
}

Field spectral_laplacian(const Field& f) {
  auto spec = forward_transform(f);
  const auto symbols = f.grid().symbols();
  const std::size_t m = f.grid().size();
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t k = 0; k < m; ++k) spec[c * m + k] *= -symbols[k];
  }
  return inverse_transform(f.grid_ptr(), f.kind(), std::move(spec),
                           f.components());
}

}  // namespace mpe
