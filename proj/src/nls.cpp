#include <cmath>
#include <numbers>

#include "eklab/ek.hpp"
#include "eklab/fft.hpp"
#include "eklab/ops.hpp"

namespace eklab {

namespace {

void rotate_potential(ComplexField& psi, double eps, const PressureLaw& g, double tau) {
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double phase = -g.g(std::norm(psi[i])) * tau / eps;
    psi[i] *= std::polar(1.0, phase);
  }
}

std::vector<double> squared_wavenumbers(const Grid& g) {
  std::vector<double> k2(g.size(), 0.0);
  const auto kx = fft::wavenumbers(g, 0);
  if (g.dim() == 1) {
    for (std::size_t i = 0; i < g.size(); ++i) k2[i] = kx[i] * kx[i];
  } else {
    const auto ky = fft::wavenumbers(g, 1);
    const std::size_t ny = g.points(1);
    for (std::size_t i = 0; i < g.size(); ++i) k2[i] = kx[i / ny] * kx[i / ny] + ky[i % ny] * ky[i % ny];
  }
  return k2;
}

}  // namespace

ComplexField step_nls(const ComplexField& psi, double eps, const PressureLaw& g, double dt) {
  const Grid& grid = psi.grid();
  if (!grid.periodic()) throw Error(ErrorKind::dimension, "split-step NLS needs a periodic grid");
  ComplexField out = psi;
  rotate_potential(out, eps, g, 0.5 * dt);
  auto spec = fft::forward(grid, out.values());
  const auto k2 = squared_wavenumbers(grid);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= std::polar(1.0, -0.5 * eps * k2[i] * dt);
  out.values() = fft::inverse(grid, spec);
  rotate_potential(out, eps, g, 0.5 * dt);
  return out;
}

ComplexField advance_nls(ComplexField psi, double t_end, double eps, const PressureLaw& g, double dt_max) {
  if (t_end <= 0.0) return psi;
  const long steps = std::max(1L, static_cast<long>(std::ceil(t_end / dt_max - 1e-9)));
  const double dt = t_end / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) psi = step_nls(psi, eps, g, dt);
  return psi;
}

FluidState madelung(const ComplexField& psi, double eps, double vacuum_threshold) {
  const Grid& g = psi.grid();
  FluidState s;
  s.rho = psi.map([](const Complex& v) { return std::norm(v); });
  const double m = min_value(s.rho);
  if (m < vacuum_threshold) throw Error(ErrorKind::vacuum, "|psi|^2 = " + std::to_string(m) + " below vacuum threshold");
  std::vector<ScalarField> u;
  for (int a = 0; a < g.dim(); ++a) {
    const ComplexField d = derivative(psi, a, 1);
    ScalarField ua(g);
    for (std::size_t i = 0; i < g.size(); ++i) ua[i] = eps * (std::conj(psi[i]) * d[i]).imag() / s.rho[i];
    u.push_back(std::move(ua));
  }
  s.u = VectorField(std::move(u));
  return s;
}

ComplexField wavefunction(const FluidState& s, double eps) {
  const Grid& g = s.grid();
  if (!g.periodic()) throw Error(ErrorKind::dimension, "wavefunction needs a periodic grid");
  const int d = g.dim();
  std::vector<double> mean(d);
  std::vector<std::valarray<Complex>> spec;
  for (int a = 0; a < d; ++a) {
    mean[a] = s.u[a].values().sum() / static_cast<double>(g.size());
    const double winding = mean[a] * g.length(a) / (2.0 * std::numbers::pi * eps);
    if (std::abs(winding - std::round(winding)) > 1e-8)
      throw Error(ErrorKind::domain, "mean velocity incompatible with a periodic phase");
    std::valarray<Complex> c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) c[i] = s.u[a][i] - mean[a];
    spec.push_back(fft::forward(g, c));
  }
  std::vector<std::vector<double>> k;
  for (int a = 0; a < d; ++a) k.push_back(fft::wavenumbers(g, a));
  std::valarray<Complex> phi_hat(g.size());
  const std::size_t ny = d == 2 ? g.points(1) : 1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double kx = k[0][d == 2 ? i / ny : i];
    const double ky = d == 2 ? k[1][i % ny] : 0.0;
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) continue;
    Complex dotp = kx * spec[0][i];
    if (d == 2) dotp += ky * spec[1][i];
    phi_hat[i] = Complex(0.0, -1.0) * dotp / k2;
  }
  const auto phi = fft::inverse(g, phi_hat);
  ComplexField psi(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double ph = phi[i].real();
    if (d == 1) ph += mean[0] * g.coordinate(0, i);
    else ph += mean[0] * g.coordinate(0, i / ny) + mean[1] * g.coordinate(1, i % ny);
    psi[i] = std::sqrt(s.rho[i]) * std::polar(1.0, ph / eps);
  }
  return psi;
}

}  // namespace eklab
