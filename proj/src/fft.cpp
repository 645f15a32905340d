#include "eklab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace eklab::fft {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  fftw_plan get(std::size_t n0, std::size_t n1, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(n0, n1, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> buf(n0 * n1);
    fftw_plan p = n1 == 1 ? fftw_plan_dft_1d(static_cast<int>(n0), buf.data(), buf.data(), sign,
                                             FFTW_ESTIMATE | FFTW_UNALIGNED)
                          : fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), buf.data(), buf.data(),
                                             sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

std::valarray<Complex> transform(const Grid& grid, const std::valarray<Complex>& data, int sign) {
  if (!grid.periodic()) throw Error(ErrorKind::dimension, "spectral transforms need a periodic grid");
  if (data.size() != grid.size()) throw Error(ErrorKind::shape, "sample count does not match grid");
  const std::size_t n1 = grid.dim() == 2 ? grid.points(1) : 1;
  fftw_plan plan = cache().get(grid.points(0), n1, sign);
  std::valarray<Complex> in = data;
  std::valarray<Complex> out(data.size());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(&in[0]), reinterpret_cast<fftw_complex*>(&out[0]));
  return out;
}

}  // namespace

std::valarray<Complex> forward(const Grid& grid, const std::valarray<Complex>& data) {
  return transform(grid, data, FFTW_FORWARD);
}

std::valarray<Complex> inverse(const Grid& grid, const std::valarray<Complex>& spectrum) {
  auto out = transform(grid, spectrum, FFTW_BACKWARD);
  out *= Complex(1.0 / static_cast<double>(grid.size()), 0.0);
  return out;
}

std::vector<long> mode_indices(std::size_t n) {
  std::vector<long> k(n);
  const long nn = static_cast<long>(n);
  for (long i = 0; i < nn; ++i) k[i] = i < nn / 2 ? i : i - nn;
  return k;
}

std::vector<double> wavenumbers(const Grid& grid, int axis) {
  const auto idx = mode_indices(grid.points(axis));
  std::vector<double> xi(idx.size());
  const double scale = 2.0 * std::numbers::pi / grid.length(axis);
  for (std::size_t i = 0; i < idx.size(); ++i) xi[i] = scale * static_cast<double>(idx[i]);
  return xi;
}

}  // namespace eklab::fft
