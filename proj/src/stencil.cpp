#include "eklab/stencil.hpp"

#include <algorithm>

#include "eklab/errors.hpp"

namespace eklab {

std::vector<std::vector<double>> fornberg_weights(double z, std::span<const double> x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < 0) throw Error(ErrorKind::shape, "empty stencil");
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

NodeDifferentiator::NodeDifferentiator(std::vector<double> nodes, int max_order, int width)
    : nodes_(std::move(nodes)), max_order_(max_order), width_(width) {
  const std::size_t n = nodes_.size();
  if (width_ < max_order_ + 1 || static_cast<std::size_t>(width_) > n)
    throw Error(ErrorKind::unsupported_order, "stencil too narrow for requested derivative order");
  start_.resize(n);
  weights_.assign(max_order_ + 1, std::vector<double>(n * width_, 0.0));
  const std::size_t half = static_cast<std::size_t>(width_) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t s = i >= half ? i - half : 0;
    s = std::min(s, n - static_cast<std::size_t>(width_));
    start_[i] = s;
    const auto w = fornberg_weights(nodes_[i], std::span<const double>(nodes_.data() + s, width_), max_order_);
    for (int m = 0; m <= max_order_; ++m)
      std::copy(w[m].begin(), w[m].end(), weights_[m].begin() + static_cast<std::ptrdiff_t>(i * width_));
  }
}

double NodeDifferentiator::at(const std::valarray<double>& f, int order, std::size_t i) const {
  if (order < 0 || order > max_order_) throw Error(ErrorKind::unsupported_order, "derivative order not prepared");
  const double* w = weights_[order].data() + i * width_;
  const std::size_t s = start_[i];
  double acc = 0.0;
  for (int j = 0; j < width_; ++j) acc += w[j] * f[s + j];
  return acc;
}

std::valarray<double> NodeDifferentiator::apply(const std::valarray<double>& f, int order) const {
  if (f.size() != nodes_.size()) throw Error(ErrorKind::shape, "sample count does not match nodes");
  std::valarray<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = at(f, order, i);
  return out;
}

double interpolate(std::span<const double> nodes, std::span<const double> values, double z, int order, int width) {
  const std::size_t n = nodes.size();
  if (n != values.size()) throw Error(ErrorKind::shape, "nodes and values differ in length");
  width = std::min<int>(width, static_cast<int>(n));
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), z);
  std::size_t k = static_cast<std::size_t>(it - nodes.begin());
  const std::size_t half = static_cast<std::size_t>(width) / 2;
  std::size_t s = k >= half ? k - half : 0;
  s = std::min(s, n - static_cast<std::size_t>(width));
  const auto w = fornberg_weights(z, nodes.subspan(s, width), order);
  double acc = 0.0;
  for (int j = 0; j < width; ++j) acc += w[order][j] * values[s + j];
  return acc;
}

std::vector<double> cumulative_integral(std::span<const double> nodes, std::span<const double> values, int width) {
  const std::size_t n = nodes.size();
  if (n != values.size()) throw Error(ErrorKind::shape, "nodes and values differ in length");
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  width = std::min<int>(width, static_cast<int>(n));
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    long s = static_cast<long>(i) - (width - 2) / 2;
    s = std::clamp<long>(s, 0, static_cast<long>(n) - width);
    const auto sub = nodes.subspan(static_cast<std::size_t>(s), width);
    const double c = 0.5 * (nodes[i] + nodes[i + 1]), h = 0.5 * (nodes[i + 1] - nodes[i]);
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) {
      const auto w = fornberg_weights(c + h * gx[q], sub, 0)[0];
      double f = 0.0;
      for (int j = 0; j < width; ++j) f += w[j] * values[s + j];
      acc += gw[q] * f;
    }
    out[i + 1] = out[i] + h * acc;
  }
  return out;
}

}  // namespace eklab
