#include "csnt/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "csnt/errors.hpp"

namespace csnt {

namespace {

// FFTW planning is not thread safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Spectral::Spectral(const Grid& grid) : grid_(grid), modes_(1) {
  const int d = grid.dim();
  const int n = grid.n();
  const int nh = n / 2 + 1;
  for (int a = 0; a < d - 1; ++a) modes_ *= static_cast<std::size_t>(n);
  modes_ *= static_cast<std::size_t>(nh);

  std::vector<int> dims(d, n);
  {
    std::lock_guard lock(planner_mutex());
    double* rbuf = fftw_alloc_real(grid.size());
    fftw_complex* cbuf = fftw_alloc_complex(modes_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_forward_ = fftw_plan_dft_r2c(d, dims.data(), rbuf, cbuf, flags);
    plan_inverse_ = fftw_plan_dft_c2r(d, dims.data(), cbuf, rbuf, flags);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
  if (plan_forward_ == nullptr || plan_inverse_ == nullptr) {
    throw SolverError("FFTW planning failed");
  }

  k_.assign(d, std::vector<double>(modes_));
  k_odd_.assign(d, std::vector<double>(modes_));
  k2_.assign(modes_, 0.0);
  band_.assign(modes_, 1);
  weight_.assign(modes_, 2.0);
  const int cutoff = grid.dealias_cutoff();
  for (std::size_t m = 0; m < modes_; ++m) {
    std::size_t rest = m;
    for (int a = d - 1; a >= 0; --a) {
      const int extent = (a == d - 1) ? nh : n;
      const int j = static_cast<int>(rest % static_cast<std::size_t>(extent));
      rest /= static_cast<std::size_t>(extent);
      const int k = (a == d - 1) ? j : (j <= n / 2 ? j : j - n);
      k_[a][m] = k;
      k_odd_[a][m] = (std::abs(k) == n / 2) ? 0.0 : k;
      k2_[m] += static_cast<double>(k) * k;
      if (std::abs(k) > cutoff) band_[m] = 0;
      if (a == d - 1 && (j == 0 || j == n / 2)) weight_[m] = 1.0;
    }
  }
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

void Spectral::forward(std::span<const double> in, std::span<Complex> out) const {
  if (in.size() != grid_.size() || out.size() != modes_) {
    throw DataError("Spectral::forward: buffer size mismatch");
  }
  // r2c plans leave the input untouched.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void Spectral::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (in.size() != modes_ || out.size() != grid_.size()) {
    throw DataError("Spectral::inverse: buffer size mismatch");
  }
  Spectrum scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(grid_.size());
  for (auto& v : out) v *= scale;
}

Spectrum Spectral::forward(std::span<const double> in) const {
  Spectrum out(modes_);
  forward(in, out);
  return out;
}

std::vector<double> Spectral::inverse(std::span<const Complex> in) const {
  std::vector<double> out(grid_.size());
  inverse(in, out);
  return out;
}

double Spectral::inner(std::span<const Complex> a, std::span<const Complex> b) const {
  long double s = 0.0L;
  for (std::size_t m = 0; m < modes_; ++m) {
    s += weight_[m] * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
  }
  const double npts = static_cast<double>(grid_.size());
  return static_cast<double>(s) * grid_.cell_volume() / npts;
}

std::shared_ptr<const Spectral> spectral_for(const Grid& grid) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Spectral>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{grid.dim(), grid.n()}];
  if (!slot) slot = std::make_shared<const Spectral>(grid);
  return slot;
}

}  // namespace csnt
