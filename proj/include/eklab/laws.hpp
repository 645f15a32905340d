#pragma once

#include <functional>
#include <memory>
#include <limits>
#include <string>
#include <vector>

namespace eklab {

/// A scalar smooth map with analytic derivatives of every order and an open
/// validity interval (lo, hi).
struct SmoothMap {
  std::function<double(double x, int order)> eval;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::string name;

  double operator()(double x, int order = 0) const { return eval(x, order); }
  bool valid(double x) const { return x > lo && x < hi; }

  /// x -> c * x^s on (0, inf) (s arbitrary real).
  static SmoothMap power(double c, double s, std::string name = "power");
  static SmoothMap exponential();
  /// Polynomial with the given coefficients, constant term first.
  static SmoothMap polynomial(std::vector<double> coeffs);
};

/// Barotropic pressure law through its enthalpy g, normalized so g(1) = 0.
class PressureLaw {
 public:
  enum class Kind { gross_pitaevskii, polytropic, custom };

  static PressureLaw gross_pitaevskii();
  /// g = (rho^gamma - 1) / gamma.
  static PressureLaw polytropic(double gamma);
  /// Any smooth g with g(1) = 0; G by Gauss-Legendre quadrature.
  static PressureLaw custom(SmoothMap g);

  Kind kind() const noexcept { return kind_; }
  double gamma() const noexcept { return gamma_; }
  double g(double rho, int order = 0) const;
  /// Antiderivative G with G(1) = 0.
  double G(double rho) const;
  /// Sound speed squared rho g'(rho).
  double sound_speed2(double rho) const { return rho * g(rho, 1); }
  SmoothMap as_map() const;
  std::string name() const;

 private:
  PressureLaw(Kind kind, double gamma) : kind_(kind), gamma_(gamma) {}
  Kind kind_;
  double gamma_;
  std::shared_ptr<const SmoothMap> map_;
};

enum class CapillarityTag { general, quantum, schrodinger, constant };

/// Capillary coefficient K(rho) = c * rho^s. The quantum, Schrodinger and
/// constant tags are the special cases (1, -1), (1/4, -1) and (c, 0).
class CapillarityLaw {
 public:
  static CapillarityLaw quantum();
  static CapillarityLaw schrodinger();
  static CapillarityLaw constant(double c);
  static CapillarityLaw power_law(double c, double s);

  CapillarityTag tag() const noexcept { return tag_; }
  double coefficient() const noexcept { return c_; }
  double exponent() const noexcept { return s_; }
  double K(double rho, int order = 0) const;
  /// a = sqrt(rho K).
  double a(double rho) const;
  /// l(rho) / eps = int_1^rho sqrt(K/r) dr.
  double ell(double rho) const;
  /// Inverse of ell: the density with ell(rho) = v.
  double ell_inverse(double v) const;
  SmoothMap as_map() const;
  std::string name() const;

 private:
  CapillarityLaw(CapillarityTag tag, double c, double s) : tag_(tag), c_(c), s_(s) {}
  CapillarityTag tag_;
  double c_;
  double s_;
};

struct Laws {
  PressureLaw pressure = PressureLaw::gross_pitaevskii();
  CapillarityLaw capillarity = CapillarityLaw::quantum();
};

const char* to_string(CapillarityTag tag) noexcept;

}  // namespace eklab
