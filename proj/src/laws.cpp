#include "eklab/laws.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "eklab/errors.hpp"

namespace eklab {

namespace {

// d^k/dx^k of x^s.
double power_derivative(double x, double s, int k) {
  double f = 1.0;
  for (int j = 0; j < k; ++j) f *= s - j;
  if (f == 0.0) return 0.0;
  return f * std::pow(x, s - k);
}

void require_positive(double rho, const char* who) {
  if (!(rho > 0.0)) throw Error(ErrorKind::domain, std::string(who) + " needs a positive density");
}

}  // namespace

SmoothMap SmoothMap::power(double c, double s, std::string name) {
  return {[c, s](double x, int k) { return c * power_derivative(x, s, k); }, 0.0,
          std::numeric_limits<double>::infinity(), std::move(name)};
}

SmoothMap SmoothMap::exponential() {
  return {[](double x, int) { return std::exp(x); }, -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), "exp"};
}

SmoothMap SmoothMap::polynomial(std::vector<double> coeffs) {
  SmoothMap m;
  m.name = "polynomial";
  m.eval = [coeffs](double x, int k) {
    double acc = 0.0;
    for (std::size_t p = static_cast<std::size_t>(k); p < coeffs.size(); ++p) {
      double f = coeffs[p];
      for (int j = 0; j < k; ++j) f *= static_cast<double>(p - j);
      acc += f * std::pow(x, static_cast<double>(p - k));
    }
    return acc;
  };
  return m;
}

PressureLaw PressureLaw::gross_pitaevskii() { return {Kind::gross_pitaevskii, 1.0}; }

PressureLaw PressureLaw::polytropic(double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorKind::config, "polytropic exponent must be positive");
  return {Kind::polytropic, gamma};
}

PressureLaw PressureLaw::custom(SmoothMap g) {
  if (!g.eval) throw Error(ErrorKind::config, "custom pressure law without a function");
  if (!g.valid(1.0) || std::abs(g(1.0)) > 1e-12) throw Error(ErrorKind::config, "custom pressure law needs g(1) = 0");
  PressureLaw p(Kind::custom, 0.0);
  p.map_ = std::make_shared<const SmoothMap>(std::move(g));
  return p;
}

double PressureLaw::g(double rho, int k) const {
  if (kind_ == Kind::custom) {
    if (!map_->valid(rho)) throw Error(ErrorKind::domain, "density outside the pressure law's validity interval");
    return (*map_)(rho, k);
  }
  if (kind_ == Kind::gross_pitaevskii) return k == 0 ? rho - 1.0 : (k == 1 ? 1.0 : 0.0);
  require_positive(rho, "polytropic law");
  if (k == 0) return (std::pow(rho, gamma_) - 1.0) / gamma_;
  return power_derivative(rho, gamma_, k) / gamma_;
}

double PressureLaw::G(double rho) const {
  if (kind_ == Kind::custom) {
    static constexpr double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975363};
    static constexpr double w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    // composite over 8 panels of [1, rho]
    double acc = 0.0;
    const double h = (rho - 1.0) / 8.0;
    for (int p = 0; p < 8; ++p)
      for (int q = 0; q < 8; ++q) acc += w[q] * g(1.0 + h * (p + 0.5 * (x[q] + 1.0)));
    return 0.5 * h * acc;
  }
  if (kind_ == Kind::gross_pitaevskii) return 0.5 * (rho - 1.0) * (rho - 1.0);
  require_positive(rho, "polytropic law");
  return (std::pow(rho, gamma_ + 1.0) - 1.0) / (gamma_ * (gamma_ + 1.0)) - (rho - 1.0) / gamma_;
}

SmoothMap PressureLaw::as_map() const {
  const PressureLaw self = *this;
  if (kind_ == Kind::custom) return *map_;
  const double lo = kind_ == Kind::gross_pitaevskii ? -std::numeric_limits<double>::infinity() : 0.0;
  return {[self](double x, int k) { return self.g(x, k); }, lo, std::numeric_limits<double>::infinity(), name()};
}

std::string PressureLaw::name() const {
  if (kind_ == Kind::gross_pitaevskii) return "gross-pitaevskii";
  if (kind_ == Kind::custom) return map_->name;
  std::ostringstream os;
  os << "polytropic(" << gamma_ << ")";
  return os.str();
}

CapillarityLaw CapillarityLaw::quantum() { return {CapillarityTag::quantum, 1.0, -1.0}; }
CapillarityLaw CapillarityLaw::schrodinger() { return {CapillarityTag::schrodinger, 0.25, -1.0}; }

CapillarityLaw CapillarityLaw::constant(double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::config, "capillary coefficient must be positive");
  return {CapillarityTag::constant, c, 0.0};
}

CapillarityLaw CapillarityLaw::power_law(double c, double s) {
  if (!(c > 0.0)) throw Error(ErrorKind::config, "capillary coefficient must be positive");
  return {CapillarityTag::general, c, s};
}

double CapillarityLaw::K(double rho, int k) const {
  require_positive(rho, "capillarity law");
  return c_ * power_derivative(rho, s_, k);
}

double CapillarityLaw::a(double rho) const { return std::sqrt(rho * K(rho)); }

double CapillarityLaw::ell(double rho) const {
  require_positive(rho, "capillarity law");
  const double p = 0.5 * (s_ + 1.0);
  if (std::abs(p) < 1e-14) return std::sqrt(c_) * std::log(rho);
  return std::sqrt(c_) * (std::pow(rho, p) - 1.0) / p;
}

double CapillarityLaw::ell_inverse(double v) const {
  const double p = 0.5 * (s_ + 1.0);
  const double y = v / std::sqrt(c_);
  if (std::abs(p) < 1e-14) return std::exp(y);
  const double base = 1.0 + p * y;
  if (!(base > 0.0)) throw Error(ErrorKind::domain, "value outside the range of l");
  return std::pow(base, 1.0 / p);
}

SmoothMap CapillarityLaw::as_map() const {
  return SmoothMap::power(c_, s_, name());
}

std::string CapillarityLaw::name() const {
  std::ostringstream os;
  switch (tag_) {
    case CapillarityTag::quantum: return "quantum";
    case CapillarityTag::schrodinger: return "schrodinger";
    case CapillarityTag::constant: os << "constant(" << c_ << ")"; return os.str();
    case CapillarityTag::general: os << "power(" << c_ << "," << s_ << ")"; return os.str();
  }
  return "?";
}

const char* to_string(CapillarityTag tag) noexcept {
  switch (tag) {
    case CapillarityTag::general: return "general";
    case CapillarityTag::quantum: return "quantum";
    case CapillarityTag::schrodinger: return "schrodinger";
    case CapillarityTag::constant: return "constant";
  }
  return "?";
}

}  // namespace eklab
