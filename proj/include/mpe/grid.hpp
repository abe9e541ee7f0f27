#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace mpe {

using Complex = std::complex<double>;

enum class ScalarKind { Real, Complex };

class FftPlans;

/// Uniform periodic grid on [origin, origin + length)^dim with N points per
/// axis and the table of Laplacian symbols lambda >= 0 in FFT storage order.
///
/// Immutable after construction; share it through GridPtr.
class SpectralGrid {
 public:
  SpectralGrid(int dim, int n_per_axis, double length, double origin = 0.0);
  ~SpectralGrid();

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  double length() const { return length_; }
  double origin() const { return origin_; }
  double spacing() const { return length_ / n_; }
  std::size_t size() const { return size_; }
  /// h^dim, the rectangle-rule weight.
  double cell_volume() const;
  /// |Omega| = length^dim.
  double volume() const;

  /// Signed wavenumber index stored in FFT slot `slot` along one axis:
  /// 0, 1, ..., N/2-1, then the Nyquist slot, then -N/2+1, ..., -1.
  /// The Nyquist slot reports -N/2.
  int wavenumber(int slot) const;

  /// Symbol (2 p pi / L)^2 + (2 q pi / L)^2 for signed indices p (and q).
  /// Throws std::out_of_range unless -N/2 <= p, q <= N/2 - 1.
  double laplacian_symbol(int p, int q = 0) const;

  /// Precomputed symbols in row-major FFT storage order.
  std::span<const double> symbols() const { return symbols_; }

  /// Coordinate of node i along an axis.
  double coordinate(int i) const { return origin_ + i * spacing(); }

  bool same_as(const SpectralGrid& other) const;

  /// Unnormalized forward DFT, in place, `count` contiguous blocks of size().
  void forward(std::span<Complex> data) const;
  /// Inverse DFT including the 1/N^dim factor, in place.
  void inverse(std::span<Complex> data) const;

 private:
  int dim_;
  int n_;
  double length_;
  double origin_;
  std::size_t size_;
  std::vector<double> symbols_;
  std::unique_ptr<FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

/// Validating factory. dim in {1,2}; n even and >= 2; length > 0.
GridPtr make_grid(int dim, int n_per_axis, double length, double origin = 0.0);

/// Nodal samples of one or more scalar components on a grid. Values are
/// component-major: component c occupies [c*size, (c+1)*size).
class Field {
 public:
  Field() = default;
  Field(GridPtr grid, ScalarKind kind, int components = 1);
  Field(GridPtr grid, ScalarKind kind, std::vector<Complex> values,
        int components = 1);

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  ScalarKind kind() const { return kind_; }
  int components() const { return components_; }
  std::size_t size() const { return values_.size(); }

  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }
  std::span<Complex> component(int c);
  std::span<const Complex> component(int c) const;

  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  /// Throws std::invalid_argument unless both live on equal grids with the
  /// same component count.
  void require_compatible(const Field& other) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  /// Drops imaginary parts of a Real field.
  void project_real();

 private:
  GridPtr grid_;
  ScalarKind kind_ = ScalarKind::Real;
  int components_ = 1;
  std::vector<Complex> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Spectrum of every component (unnormalized forward transform).
std::vector<Complex> forward_transform(const Field& f);
/// Builds a field of the given kind from a spectrum laid out like
/// forward_transform produces.
Field inverse_transform(const GridPtr& grid, ScalarKind kind,
                        std::vector<Complex> spectrum, int components = 1);

/// Exact linear flow: every Fourier coefficient multiplied by
/// exp(-tau * nu * lambda). One nu per component, or a single nu for all.
/// Negative tau with Re(nu) > 0 amplifies high modes and is rejected unless
/// allow_backward is set.
Field linear_propagate(const Field& f, std::span<const Complex> nu, double tau,
                       bool allow_backward = false);
Field linear_propagate(const Field& f, Complex nu, double tau,
                       bool allow_backward = false);

/// Rectangle-rule integral h^dim * sum of one component.
Complex integrate(const Field& f, int component = 0);
/// Grid mean of one component.
Complex mean(const Field& f, int component = 0);
/// Discrete L2 norm sqrt(h^dim * sum |u|^2) over all components.
double norm_l2(const Field& f);
/// max |u| over all nodes and components.
double norm_inf(const Field& f);
/// Largest |Im u| relative to max |u| (0 for the zero field).
double imag_ratio(const Field& f);

/// Spectral first derivative along `axis` (0 = x, 1 = y) with the Nyquist
/// coefficient zeroed.
Field spectral_derivative(const Field& f, int axis);
/// Spectral Laplacian -lambda * u_hat.
Field spectral_laplacian(const Field& f);

/// Samples g(x) (1-D) or g(x, y) (2-D) at the grid nodes.
template <class Fn>
Field sample(const GridPtr& grid, ScalarKind kind, Fn&& g) {
  Field out(grid, kind);
  const int n = grid->n();
  if constexpr (std::is_invocable_v<Fn&, double>) {
    if (grid->dim() != 1) throw std::invalid_argument("1-D sampler on a 2-D grid");
    for (int i = 0; i < n; ++i) out[i] = Complex(g(grid->coordinate(i)));
  } else {
    if (grid->dim() != 2) throw std::invalid_argument("2-D sampler on a 1-D grid");
    for (int i = 0; i < n; ++i) {
      const double x = grid->coordinate(i);
      for (int j = 0; j < n; ++j) {
        out[static_cast<std::size_t>(i) * n + j] =
            Complex(g(x, grid->coordinate(j)));
      }
    }
  }
  return out;
}

}  // namespace mpe
