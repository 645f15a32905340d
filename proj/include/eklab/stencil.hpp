#pragma once

#include <cstddef>
#include <span>
#include <valarray>
#include <vector>

namespace eklab {

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
/// Returns w[m][j], the weight of node j for the m-th derivative at `z`,
/// for m = 0..max_order.
std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> nodes, int max_order);

/// Precomputed differentiation on a fixed node set. Every node uses a stencil
/// of `width` consecutive nodes, centered where possible and shifted inward
/// near the ends, so accuracy is width - order for each derivative.
class NodeDifferentiator {
 public:
  NodeDifferentiator(std::vector<double> nodes, int max_order, int width);

  std::valarray<double> apply(const std::valarray<double>& f, int order) const;
  /// Derivative of order `order` at the single node `i`.
  double at(const std::valarray<double>& f, int order, std::size_t i) const;

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  int max_order() const noexcept { return max_order_; }

 private:
  std::vector<double> nodes_;
  int max_order_;
  int width_;
  std::vector<std::size_t> start_;
  // weights_[order][i * width + j]
  std::vector<std::vector<double>> weights_;
};

/// Local polynomial interpolation (and differentiation) of samples taken on
/// sorted nodes, evaluated at arbitrary points inside the node range.
double interpolate(std::span<const double> nodes, std::span<const double> values, double z, int order = 0,
                   int width = 8);

/// Running integral F(z_i) = int_{z_0}^{z_i} f on sorted nodes: four-point
/// Gauss-Legendre on each interval of the local degree width-1 interpolant.
std::vector<double> cumulative_integral(std::span<const double> nodes, std::span<const double> values, int width = 6);

}  // namespace eklab
