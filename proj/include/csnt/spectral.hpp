#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "csnt/grid.hpp"

namespace csnt {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

/// Real-to-complex Fourier transforms on one Grid plus the mode tables the
/// spectral operators need.
///
/// The half spectrum follows the FFTW r2c layout (last axis n/2+1 long).
/// forward() is unnormalized; inverse() divides by the point count, so
/// inverse(forward(f)) == f. Plans are created once under a global lock and
/// executed with the new-array interface, so one instance may be shared by
/// concurrent callers.
class Spectral {
 public:
  explicit Spectral(const Grid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t modes() const { return modes_; }

  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// `in` is preserved.
  void inverse(std::span<const Complex> in, std::span<double> out) const;
  Spectrum forward(std::span<const double> in) const;
  std::vector<double> inverse(std::span<const Complex> in) const;

  /// Signed integer wavenumber along `axis` for every mode.
  std::span<const double> wavenumber(int axis) const { return k_[axis]; }
  /// Wavenumber used by odd-order derivatives: zero on the Nyquist plane.
  std::span<const double> odd_wavenumber(int axis) const { return k_odd_[axis]; }
  /// |xi|^2 per mode.
  std::span<const double> k2() const { return k2_; }
  /// 1 inside the 2/3-rule band, 0 outside.
  std::span<const unsigned char> band() const { return band_; }
  /// Multiplicity of each half-spectrum mode in the full spectrum (1 or 2).
  std::span<const double> weight() const { return weight_; }

  /// Discrete L2(T^d) inner product of two real fields given by their
  /// half spectra (Parseval with the cell-volume quadrature weight).
  double inner(std::span<const Complex> a, std::span<const Complex> b) const;

 private:
  Grid grid_;
  std::size_t modes_;
  void* plan_forward_ = nullptr;
  void* plan_inverse_ = nullptr;
  std::vector<std::vector<double>> k_;
  std::vector<std::vector<double>> k_odd_;
  std::vector<double> k2_;
  std::vector<unsigned char> band_;
  std::vector<double> weight_;
};

/// Shared transform object for `grid`, created on first use.
std::shared_ptr<const Spectral> spectral_for(const Grid& grid);

}  // namespace csnt
