#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <valarray>
#include <vector>

#include "eklab/field.hpp"
#include "eklab/laws.hpp"

namespace eklab {

namespace detail {
inline bool same_support(const ScalarField& a, const ScalarField& b) { return a.grid() == b.grid(); }
inline bool same_support(const VectorField& a, const VectorField& b) { return a.grid() == b.grid() && a.dim() == b.dim(); }
inline bool same_support(const ComplexField& a, const ComplexField& b) { return a.grid() == b.grid(); }
template <class T>
bool same_support(const std::valarray<T>& a, const std::valarray<T>& b) { return a.size() == b.size(); }
}  // namespace detail

/// Truncated power series c_0 + eps c_1 + ... + eps^N c_N with
/// field-valued coefficients. Arithmetic never produces terms beyond N.
template <class T>
class EpsilonJet {
 public:
  EpsilonJet() = default;
  explicit EpsilonJet(std::vector<T> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw Error(ErrorKind::shape, "jet needs at least one coefficient");
    for (const auto& x : c_)
      if (!detail::same_support(x, c_[0])) throw Error(ErrorKind::shape, "jet coefficients live on different grids");
  }

  /// c0 + 0 eps + ... at the given order.
  static EpsilonJet constant(const T& c0, int order) {
    std::vector<T> c(order + 1, T(c0 * 0.0));
    c[0] = c0;
    return EpsilonJet(std::move(c));
  }
  static EpsilonJet zero(const T& like, int order) { return EpsilonJet(std::vector<T>(order + 1, T(like * 0.0))); }

  int order() const noexcept { return static_cast<int>(c_.size()) - 1; }
  T& operator[](int k) { return c_.at(k); }
  const T& operator[](int k) const { return c_.at(k); }
  const std::vector<T>& coeffs() const noexcept { return c_; }

  template <class F>
  auto map(F&& f) const {
    using R = std::decay_t<decltype(f(c_[0]))>;
    std::vector<R> out;
    out.reserve(c_.size());
    for (const auto& x : c_) out.push_back(f(x));
    return EpsilonJet<R>(std::move(out));
  }

  /// Multiplication by eps^m, dropping terms beyond the order.
  EpsilonJet shift(int m) const {
    EpsilonJet out = zero(c_[0], order());
    for (int k = m; k <= order(); ++k) out.c_[k] = c_[k - m];
    return out;
  }

  /// Same jet at a different order (padding with zeros or truncating).
  EpsilonJet truncate(int order) const {
    std::vector<T> c;
    for (int k = 0; k <= order; ++k) c.push_back(k < static_cast<int>(c_.size()) ? c_[k] : T(c_[0] * 0.0));
    return EpsilonJet(std::move(c));
  }

  T evaluate(double eps) const {
    T acc = c_.back();
    for (int k = order() - 1; k >= 0; --k) acc = T(acc * eps) + c_[k];
    return acc;
  }

  EpsilonJet& operator+=(const EpsilonJet& o) { check(o); for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k]; return *this; }
  EpsilonJet& operator-=(const EpsilonJet& o) { check(o); for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= o.c_[k]; return *this; }
  EpsilonJet& operator*=(double s) { for (auto& x : c_) x *= s; return *this; }
  friend EpsilonJet operator+(EpsilonJet a, const EpsilonJet& b) { return a += b; }
  friend EpsilonJet operator-(EpsilonJet a, const EpsilonJet& b) { return a -= b; }
  friend EpsilonJet operator*(EpsilonJet a, double s) { return a *= s; }
  friend EpsilonJet operator*(double s, EpsilonJet a) { return a *= s; }
  friend EpsilonJet operator-(EpsilonJet a) { return a *= -1.0; }

 private:
  void check(const EpsilonJet& o) const {
    if (o.c_.size() != c_.size()) throw Error(ErrorKind::shape, "jets of different order");
    if (!detail::same_support(o.c_[0], c_[0])) throw Error(ErrorKind::shape, "jets live on different grids");
  }
  std::vector<T> c_;
};

using ScalarJet = EpsilonJet<ScalarField>;
using VectorJet = EpsilonJet<VectorField>;
using NodeJet = EpsilonJet<std::valarray<double>>;

/// Truncated Cauchy product with a custom coefficient product.
template <class A, class B, class Op>
auto jet_product(const EpsilonJet<A>& a, const EpsilonJet<B>& b, Op op) {
  if (a.order() != b.order()) throw Error(ErrorKind::shape, "jets of different order");
  using R = std::decay_t<decltype(op(a[0], b[0]))>;
  std::vector<R> out;
  for (int k = 0; k <= a.order(); ++k) {
    R acc = op(a[0], b[k]);
    for (int i = 1; i <= k; ++i) acc += op(a[i], b[k - i]);
    out.push_back(std::move(acc));
  }
  return EpsilonJet<R>(std::move(out));
}

template <class T>
EpsilonJet<T> jet_mul(const EpsilonJet<T>& a, const EpsilonJet<T>& b) {
  if (a.order() == b.order() && !detail::same_support(a[0], b[0]))
    throw Error(ErrorKind::shape, "jets live on different grids");
  return jet_product(a, b, [](const T& x, const T& y) -> T { return x * y; });
}

inline VectorJet jet_mul(const ScalarJet& a, const VectorJet& b) {
  return jet_product(a, b, [](const ScalarField& x, const VectorField& y) { return x * y; });
}

inline ScalarJet jet_dot(const VectorJet& a, const VectorJet& b) {
  return jet_product(a, b, [](const VectorField& x, const VectorField& y) { return dot(x, y); });
}

/// Taylor expansion of g(a) around the eps^0 coefficient:
/// sum_m g^(m)(a_0) h^m / m! with h = a - a_0, powers by repeated jet_mul.
ScalarJet jet_compose(const SmoothMap& g, const ScalarJet& a);
NodeJet jet_compose(const SmoothMap& g, const NodeJet& a);

/// Coefficientwise spatial derivatives.
ScalarJet jet_derivative(const ScalarJet& a, int axis, int order = 1);
VectorJet jet_gradient(const ScalarJet& a);
ScalarJet jet_divergence(const VectorJet& a);
ScalarJet jet_laplacian(const ScalarJet& a);

struct EkResidual {
  ScalarJet mass;
  VectorJet momentum;
};

/// EK residual collected by powers of eps:
///   mass     = rho_t + div(rho u)
///   momentum = u_t + (u . grad) u + grad g(rho) - eps^2 grad(K Lap rho + K'|grad rho|^2 / 2)
/// The eps^2 in front of the capillary term is a two-slot shift.
EkResidual ek_residual_jet(const ScalarJet& rho, const VectorJet& u, const Laws& laws, const ScalarJet& rho_t,
                           const VectorJet& u_t);

/// Jets on disk: <dir>/jet.txt header ("EKJET 1", order, kind, component count)
/// followed by one field snapshot per coefficient and component.
void write_jet(const std::filesystem::path& dir, const ScalarJet& jet);
void write_jet(const std::filesystem::path& dir, const VectorJet& jet);
ScalarJet read_scalar_jet(const std::filesystem::path& dir);
VectorJet read_vector_jet(const std::filesystem::path& dir);

}  // namespace eklab
