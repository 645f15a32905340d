#pragma once

#include <valarray>
#include <vector>

#include "eklab/field.hpp"

namespace eklab::fft {

/// Unnormalized forward DFT over all axes of a periodic grid.
std::valarray<Complex> forward(const Grid& grid, const std::valarray<Complex>& data);
/// Inverse DFT including the 1/N normalization, so inverse(forward(f)) = f.
std::valarray<Complex> inverse(const Grid& grid, const std::valarray<Complex>& spectrum);

/// Angular wavenumbers 2*pi*k/L in FFT order along one axis.
std::vector<double> wavenumbers(const Grid& grid, int axis);
/// Signed integer mode index in FFT order (k for k < n/2, k - n otherwise).
std::vector<long> mode_indices(std::size_t n);

}  // namespace eklab::fft
