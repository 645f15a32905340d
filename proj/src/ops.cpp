#include "eklab/ops.hpp"

#include <algorithm>
#include <cmath>

#include "eklab/fft.hpp"
#include "eklab/stencil.hpp"

namespace eklab {

namespace {

// Odd derivatives drop the Nyquist mode, which keeps real fields real.
std::vector<double> odd_wavenumbers(const Grid& g, int axis) {
  auto xi = fft::wavenumbers(g, axis);
  const std::size_t n = g.points(axis);
  if (n % 2 == 0) xi[n / 2] = 0.0;
  return xi;
}

std::size_t axis_index(const Grid& g, std::size_t flat, int axis) {
  if (g.dim() == 1) return flat;
  const std::size_t ny = g.points(1);
  return axis == 0 ? flat / ny : flat % ny;
}

void check_axis(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dim()) throw Error(ErrorKind::dimension, "axis out of range");
}

std::valarray<Complex> spectral_derivative(const Grid& g, const std::valarray<Complex>& f, int axis, int order) {
  auto spec = fft::forward(g, f);
  const auto xi = order % 2 ? odd_wavenumbers(g, axis) : fft::wavenumbers(g, axis);
  const Complex unit(0.0, 1.0);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::pow(unit * xi[axis_index(g, i, axis)], order);
  return fft::inverse(g, spec);
}

template <class T>
std::valarray<T> halfline_derivative(const std::valarray<T>& f, double h, int m) {
  if (m < 1 || m > halfline_max_order)
    throw Error(ErrorKind::unsupported_order, "half-line stencils support orders 1.." + std::to_string(halfline_max_order));
  const int n = static_cast<int>(f.size());
  const int wc = m % 2 ? m + 4 : m + 3;
  const int hw = wc / 2;
  const int wb = m + 4;
  if (n < std::max(wc, wb) + 1) throw Error(ErrorKind::shape, "too few half-line nodes for this stencil");
  std::valarray<T> out(f.size());

  std::vector<double> nodes(wc);
  for (int j = 0; j < wc; ++j) nodes[j] = (j - hw) * h;
  const auto wi = fornberg_weights(0.0, nodes, m)[m];
  for (int i = hw; i < n - hw; ++i) {
    T acc{};
    for (int j = 0; j < wc; ++j) acc += wi[j] * (f[i - hw + j] - f[i]);
    out[i] = acc;
  }

  std::vector<double> bnodes(wb);
  for (int j = 0; j < wb; ++j) bnodes[j] = j * h;
  for (int i = 0; i < hw; ++i) {
    const auto wl = fornberg_weights(i * h, bnodes, m)[m];
    T left{}, right{};
    for (int j = 0; j < wb; ++j) {
      left += wl[j] * (f[j] - f[i]);
      // Mirror image of the left closure; odd orders flip sign.
      right += wl[j] * (f[n - 1 - j] - f[n - 1 - i]);
    }
    out[i] = left;
    out[n - 1 - i] = m % 2 ? -right : right;
  }
  return out;
}

template <class T>
BasicField<T> derivative_impl(const BasicField<T>& f, int axis, int order) {
  const Grid& g = f.grid();
  check_axis(g, axis);
  if (order < 1) throw Error(ErrorKind::unsupported_order, "derivative order must be positive");
  if (!g.periodic()) {
    if (order > halfline_max_order) throw Error(ErrorKind::unsupported_order, "derivative order exceeds half-line scheme");
    return BasicField<T>(g, halfline_derivative(f.values(), g.spacing(), order));
  }
  if constexpr (std::is_same_v<T, double>) {
    std::valarray<Complex> c(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
    const auto d = spectral_derivative(g, c, axis, order);
    ScalarField out(g);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = d[i].real();
    return out;
  } else {
    return BasicField<T>(g, spectral_derivative(g, f.values(), axis, order));
  }
}

template <class T>
BasicField<T> dealias_impl(const BasicField<T>& f) {
  const Grid& g = f.grid();
  if (!g.periodic()) return f;
  std::valarray<Complex> c(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  auto spec = fft::forward(g, c);
  std::vector<std::vector<long>> idx;
  for (int a = 0; a < g.dim(); ++a) idx.push_back(fft::mode_indices(g.points(a)));
  for (std::size_t i = 0; i < spec.size(); ++i)
    for (int a = 0; a < g.dim(); ++a)
      if (3 * std::abs(idx[a][axis_index(g, i, a)]) > static_cast<long>(g.points(a))) spec[i] = 0.0;
  const auto back = fft::inverse(g, spec);
  BasicField<T> out(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if constexpr (std::is_same_v<T, double>) out[i] = back[i].real();
    else out[i] = back[i];
  }
  return out;
}

double weighted_sum(const Grid& g, const std::valarray<double>& v) {
  double s = v.sum();
  if (!g.periodic()) s -= 0.5 * (v[0] + v[v.size() - 1]);
  return s * g.cell_volume();
}

template <class T>
double sobolev_impl(const BasicField<T>& f, int s) {
  if (s < 0) throw Error(ErrorKind::domain, "Sobolev index must be nonnegative");
  const Grid& g = f.grid();
  if (!g.periodic()) {
    double total = std::pow(l2_norm(f), 2);
    BasicField<T> d = f;
    for (int j = 1; j <= s; ++j) {
      if (j <= halfline_max_order) d = derivative(f, 0, j);
      else d = derivative(d, 0, 1);
      total += std::pow(l2_norm(d), 2);
    }
    return std::sqrt(total);
  }
  std::valarray<Complex> c(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  const auto spec = fft::forward(g, c);
  std::vector<std::vector<double>> xi;
  for (int a = 0; a < g.dim(); ++a) xi.push_back(fft::wavenumbers(g, a));
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) k2 += xi[a][axis_index(g, i, a)] * xi[a][axis_index(g, i, a)];
    acc += std::pow(1.0 + k2, s) * std::norm(spec[i]);
  }
  return std::sqrt(acc * g.cell_volume() / static_cast<double>(g.size()));
}

}  // namespace

ScalarField derivative(const ScalarField& f, int axis, int order) { return derivative_impl(f, axis, order); }
ComplexField derivative(const ComplexField& f, int axis, int order) { return derivative_impl(f, axis, order); }

VectorField gradient(const ScalarField& f) {
  std::vector<ScalarField> c;
  for (int a = 0; a < f.grid().dim(); ++a) c.push_back(derivative(f, a, 1));
  return VectorField(std::move(c));
}

ComplexVectorField gradient(const ComplexField& f) {
  std::vector<ComplexField> c;
  for (int a = 0; a < f.grid().dim(); ++a) c.push_back(derivative(f, a, 1));
  return ComplexVectorField(std::move(c));
}

ScalarField divergence(const VectorField& v) {
  ScalarField out = derivative(v[0], 0, 1);
  for (int a = 1; a < v.dim(); ++a) out += derivative(v[a], a, 1);
  return out;
}

ComplexField divergence(const ComplexVectorField& v) {
  ComplexField out = derivative(v[0], 0, 1);
  for (int a = 1; a < v.dim(); ++a) out += derivative(v[a], a, 1);
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  ScalarField out = derivative(f, 0, 2);
  for (int a = 1; a < f.grid().dim(); ++a) out += derivative(f, a, 2);
  return out;
}

ComplexField laplacian(const ComplexField& f) {
  ComplexField out = derivative(f, 0, 2);
  for (int a = 1; a < f.grid().dim(); ++a) out += derivative(f, a, 2);
  return out;
}

ScalarField curl(const VectorField& v) {
  if (v.dim() != 2) throw Error(ErrorKind::dimension, "curl needs a planar field");
  return derivative(v[1], 0, 1) - derivative(v[0], 1, 1);
}

ScalarField dealias(const ScalarField& f) { return dealias_impl(f); }
ComplexField dealias(const ComplexField& f) { return dealias_impl(f); }

double integrate(const ScalarField& f) { return weighted_sum(f.grid(), f.values()); }

double inner(const ScalarField& a, const ScalarField& b) {
  if (a.grid() != b.grid()) throw Error(ErrorKind::shape, "fields live on different grids");
  return weighted_sum(a.grid(), a.values() * b.values());
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  for (int c = 0; c < a.dim(); ++c) s += inner(a[c], b[c]);
  return s;
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double l2_norm(const ComplexField& f) {
  std::valarray<double> m(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) m[i] = std::norm(f[i]);
  return std::sqrt(weighted_sum(f.grid(), m));
}

double l2_norm(const VectorField& v) { return std::sqrt(inner(v, v)); }

double l2_norm(const ComplexVectorField& v) {
  double s = 0.0;
  for (int c = 0; c < v.dim(); ++c) s += std::pow(l2_norm(v[c]), 2);
  return std::sqrt(s);
}

double spectral_l2_norm(const ComplexField& f) {
  const auto spec = fft::forward(f.grid(), f.values());
  double s = 0.0;
  for (const auto& c : spec) s += std::norm(c);
  return std::sqrt(s * f.grid().cell_volume() / static_cast<double>(f.size()));
}

double sobolev_norm(const ScalarField& f, int s) { return sobolev_impl(f, s); }
double sobolev_norm(const ComplexField& f, int s) { return sobolev_impl(f, s); }

std::pair<VectorField, VectorField> leray_project(const VectorField& u) {
  const Grid& g = u.grid();
  if (g.kind() != GridKind::periodic_2d) throw Error(ErrorKind::dimension, "Leray projection needs a periodic-2d grid");
  std::valarray<Complex> ux(g.size()), uy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    ux[i] = u[0][i];
    uy[i] = u[1][i];
  }
  auto fx = fft::forward(g, ux);
  auto fy = fft::forward(g, uy);
  const auto kx = odd_wavenumbers(g, 0);
  const auto ky = odd_wavenumbers(g, 1);
  std::valarray<Complex> qx(g.size()), qy(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = kx[axis_index(g, i, 0)], b = ky[axis_index(g, i, 1)];
    const double k2 = a * a + b * b;
    if (k2 == 0.0) {
      qx[i] = fx[i];
      qy[i] = fy[i];
      continue;
    }
    const Complex dot = (a * fx[i] + b * fy[i]) / k2;
    qx[i] = a * dot;
    qy[i] = b * dot;
  }
  const auto bx = fft::inverse(g, qx), by = fft::inverse(g, qy);
  VectorField q(g), p(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    q[0][i] = bx[i].real();
    q[1][i] = by[i].real();
  }
  p = u - q;
  return {q, p};
}

std::pair<VectorField, VectorField> helmholtz_split(const VectorField& u) {
  if (u.dim() == 1) return {u, VectorField(u.grid())};
  return leray_project(u);
}

double xn_tangential_norm(const std::vector<ComplexField>& history, double dt, int n, std::size_t index) {
  if (n < 0 || n % 2) throw Error(ErrorKind::domain, "X^n index must be a nonnegative even integer");
  if (index >= history.size()) throw Error(ErrorKind::history_too_short, "time index outside the recorded history");
  const int top = n / 2;
  double total = l2_norm(history[index]);
  for (int a0 = 1; a0 <= top; ++a0) {
    const std::size_t width = static_cast<std::size_t>(a0) + 6;
    if (history.size() < width)
      throw Error(ErrorKind::history_too_short,
                  "need " + std::to_string(width) + " snapshots for time derivative of order " + std::to_string(a0));
    std::size_t s = index >= width / 2 ? index - width / 2 : 0;
    s = std::min(s, history.size() - width);
    std::vector<double> t(width);
    for (std::size_t j = 0; j < width; ++j) t[j] = static_cast<double>(s + j) * dt;
    const auto w = fornberg_weights(static_cast<double>(index) * dt, t, a0)[a0];
    ComplexField d(history[index].grid());
    for (std::size_t j = 0; j < width; ++j) d += (history[s + j] - history[index]) * Complex(w[j], 0.0);
    total += l2_norm(d);
  }
  return total;
}

}  // namespace eklab
