#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <valarray>
#include <vector>

#include "eklab/errors.hpp"
#include "eklab/grid.hpp"

namespace eklab {

using Complex = std::complex<double>;

/// Samples of a scalar quantity on a Grid. Arithmetic is pointwise and
/// requires both operands to live on the same grid.
template <class T>
class BasicField {
 public:
  using value_type = T;

  BasicField() = default;
  explicit BasicField(Grid grid, T fill = T{}) : grid_(std::move(grid)), values_(fill, grid_.size()) {}
  BasicField(Grid grid, std::valarray<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error(ErrorKind::shape, "value count does not match grid");
  }

  template <class F>
  static BasicField from_function(const Grid& grid, F&& f) {
    BasicField out(grid);
    if constexpr (std::is_invocable_v<F&, double>) {
      if (grid.dim() != 1) throw Error(ErrorKind::dimension, "one-argument function on a planar grid");
      for (std::size_t i = 0; i < grid.points(0); ++i) out[i] = f(grid.coordinate(0, i));
    } else {
      if (grid.dim() != 2) throw Error(ErrorKind::dimension, "two-argument function on a 1-d grid");
      const std::size_t ny = grid.points(1);
      for (std::size_t i = 0; i < grid.points(0); ++i)
        for (std::size_t j = 0; j < ny; ++j) out[i * ny + j] = f(grid.coordinate(0, i), grid.coordinate(1, j));
    }
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::valarray<T>& values() const noexcept { return values_; }
  std::valarray<T>& values() noexcept { return values_; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  template <class F>
  auto map(F&& f) const {
    using R = decltype(f(std::declval<T>()));
    BasicField<R> out(grid_);
    for (std::size_t i = 0; i < size(); ++i) out[i] = f(values_[i]);
    return out;
  }

  BasicField& operator+=(const BasicField& o) { check(o); values_ += o.values_; return *this; }
  BasicField& operator-=(const BasicField& o) { check(o); values_ -= o.values_; return *this; }
  BasicField& operator*=(const BasicField& o) { check(o); values_ *= o.values_; return *this; }
  BasicField& operator/=(const BasicField& o) { check(o); values_ /= o.values_; return *this; }
  BasicField& operator*=(T s) { values_ *= s; return *this; }
  BasicField& operator+=(T s) { values_ += s; return *this; }

  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(BasicField a, const BasicField& b) { return a *= b; }
  friend BasicField operator/(BasicField a, const BasicField& b) { return a /= b; }
  friend BasicField operator*(BasicField a, T s) { return a *= s; }
  friend BasicField operator*(T s, BasicField a) { return a *= s; }
  friend BasicField operator+(BasicField a, T s) { return a += s; }
  friend BasicField operator-(BasicField a, T s) { return a += -s; }
  friend BasicField operator-(BasicField a) { a.values_ = -a.values_; return a; }

  bool all_finite() const {
    for (const auto& v : values_)
      if (!finite_value(v)) return false;
    return true;
  }

 private:
  static bool finite_value(double v) { return std::isfinite(v); }
  static bool finite_value(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

  void check(const BasicField& o) const {
    if (grid_ != o.grid_) throw Error(ErrorKind::shape, "fields live on different grids");
  }

  Grid grid_ = Grid::periodic1d(1.0, 2);
  std::valarray<T> values_;
};

using ScalarField = BasicField<double>;
using ComplexField = BasicField<Complex>;

/// d-component field; component count equals the grid dimension.
template <class T>
class BasicVectorField {
 public:
  BasicVectorField() = default;
  explicit BasicVectorField(const Grid& grid, T fill = T{}) {
    for (int a = 0; a < grid.dim(); ++a) comps_.emplace_back(grid, fill);
  }
  explicit BasicVectorField(std::vector<BasicField<T>> comps) : comps_(std::move(comps)) {
    if (comps_.empty()) throw Error(ErrorKind::shape, "vector field without components");
    if (static_cast<int>(comps_.size()) != comps_[0].grid().dim())
      throw Error(ErrorKind::dimension, "component count must equal grid dimension");
  }

  const Grid& grid() const { return comps_.at(0).grid(); }
  int dim() const noexcept { return static_cast<int>(comps_.size()); }
  BasicField<T>& operator[](int a) { return comps_.at(a); }
  const BasicField<T>& operator[](int a) const { return comps_.at(a); }

  BasicVectorField& operator+=(const BasicVectorField& o) { for (int a = 0; a < dim(); ++a) comps_[a] += o[a]; return *this; }
  BasicVectorField& operator-=(const BasicVectorField& o) { for (int a = 0; a < dim(); ++a) comps_[a] -= o[a]; return *this; }
  BasicVectorField& operator*=(T s) { for (auto& c : comps_) c *= s; return *this; }
  friend BasicVectorField operator+(BasicVectorField a, const BasicVectorField& b) { return a += b; }
  friend BasicVectorField operator-(BasicVectorField a, const BasicVectorField& b) { return a -= b; }
  friend BasicVectorField operator*(BasicVectorField a, T s) { return a *= s; }
  friend BasicVectorField operator*(T s, BasicVectorField a) { return a *= s; }

  bool all_finite() const {
    for (const auto& c : comps_)
      if (!c.all_finite()) return false;
    return true;
  }

 private:
  std::vector<BasicField<T>> comps_;
};

using VectorField = BasicVectorField<double>;
using ComplexVectorField = BasicVectorField<Complex>;

template <class T>
BasicVectorField<T> operator*(const BasicField<T>& s, BasicVectorField<T> v) {
  for (int a = 0; a < v.dim(); ++a) v[a] *= s;
  return v;
}
template <class T>
BasicField<T> dot(const BasicVectorField<T>& a, const BasicVectorField<T>& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::dimension, "dot product of fields with different dimension");
  BasicField<T> out = a[0] * b[0];
  for (int c = 1; c < a.dim(); ++c) out += a[c] * b[c];
  return out;
}

inline ComplexField to_complex(const ScalarField& f) {
  return f.map([](double v) { return Complex(v, 0.0); });
}
inline ComplexField make_complex(const ScalarField& re, const ScalarField& im) {
  if (re.grid() != im.grid()) throw Error(ErrorKind::shape, "fields live on different grids");
  ComplexField out(re.grid());
  for (std::size_t i = 0; i < re.size(); ++i) out[i] = Complex(re[i], im[i]);
  return out;
}
inline ScalarField real_part(const ComplexField& f) {
  return f.map([](const Complex& v) { return v.real(); });
}
inline ScalarField imag_part(const ComplexField& f) {
  return f.map([](const Complex& v) { return v.imag(); });
}

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}
inline double max_abs(const ComplexField& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}
inline double min_value(const ScalarField& f) { return f.values().min(); }
inline double max_value(const ScalarField& f) { return f.values().max(); }

}  // namespace eklab
