#include "eklab/ek.hpp"

#include <cmath>
#include <numbers>

#include "eklab/ops.hpp"

namespace eklab {

namespace {

ScalarField law_field(const ScalarField& rho, const std::function<double(double)>& f) {
  return rho.map([&](double r) { return f(r); });
}

void check_state(const FluidState& s, double threshold) {
  if (!s.rho.all_finite() || !s.u.all_finite()) throw NumericalAbort(ErrorKind::instability, "non-finite values", s.t);
  const double m = min_value(s.rho);
  if (m < threshold)
    throw NumericalAbort(ErrorKind::vacuum, "density " + std::to_string(m) + " below vacuum threshold", s.t);
}

FluidState axpy(const FluidState& s, double h, const Tendency& k) {
  FluidState out = s;
  out.rho += k.drho * h;
  out.u += k.du * h;
  out.t = s.t + h;
  return out;
}

double min_spacing(const Grid& g) {
  double h = g.spacing(0);
  for (int a = 1; a < g.dim(); ++a) h = std::min(h, g.spacing(a));
  return h;
}

double max_speed(const VectorField& u) {
  ScalarField sp = u[0] * u[0];
  for (int a = 1; a < u.dim(); ++a) sp += u[a] * u[a];
  return std::sqrt(max_value(sp));
}

}  // namespace

double stable_dt(const FluidState& s, double eps, const Laws& laws, const SolverConfig& cfg) {
  const double h = min_spacing(s.grid());
  double amax = 0.0, cmax = 0.0;
  for (double r : s.rho.values()) {
    amax = std::max(amax, laws.capillarity.a(r));
    cmax = std::max(cmax, std::sqrt(std::max(0.0, laws.pressure.sound_speed2(r))));
  }
  double dt = cfg.cfl_safety * h / (max_speed(s.u) + cmax);
  if (eps > 0.0) dt = std::min(dt, cfg.cfl_safety * h * h / (std::numbers::pi * eps * amax));
  return dt;
}

Tendency ek_tendency(const FluidState& s, double eps, const Laws& laws, bool use_dealias) {
  const Grid& g = s.grid();
  if (!g.periodic()) throw Error(ErrorKind::dimension, "spectral EK stepper needs a periodic grid");
  const int d = g.dim();
  auto D = [&](const ScalarField& f) { return use_dealias ? dealias(f) : f; };

  Tendency k{ScalarField(g), VectorField(g)};
  for (int a = 0; a < d; ++a) k.drho -= derivative(D(s.rho * s.u[a]), a, 1);

  const ScalarField gr = D(law_field(s.rho, [&](double r) { return laws.pressure.g(r); }));
  ScalarField cap(g);
  if (eps > 0.0) {
    const auto grad = gradient(s.rho);
    const ScalarField K = law_field(s.rho, [&](double r) { return laws.capillarity.K(r); });
    const ScalarField Kp = law_field(s.rho, [&](double r) { return laws.capillarity.K(r, 1); });
    cap = D(K * laplacian(s.rho) + 0.5 * Kp * dot(grad, grad)) * (eps * eps);
  }
  const ScalarField potential = gr - cap;
  for (int j = 0; j < d; ++j) {
    ScalarField adv(g);
    for (int i = 0; i < d; ++i) adv += s.u[i] * derivative(s.u[j], i, 1);
    k.du[j] = -D(adv) - derivative(potential, j, 1);
  }
  return k;
}

FluidState step_ek(const FluidState& s, double eps, const Laws& laws, const SolverConfig& cfg) {
  check_state(s, cfg.vacuum_threshold);
  const double h = cfg.dt != 0.0 ? cfg.dt : stable_dt(s, eps, laws, cfg);
  const Tendency k1 = ek_tendency(s, eps, laws, cfg.dealias);
  const Tendency k2 = ek_tendency(axpy(s, 0.5 * h, k1), eps, laws, cfg.dealias);
  const Tendency k3 = ek_tendency(axpy(s, 0.5 * h, k2), eps, laws, cfg.dealias);
  const Tendency k4 = ek_tendency(axpy(s, h, k3), eps, laws, cfg.dealias);
  FluidState out = s;
  out.rho += (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho + k4.drho) * (h / 6.0);
  out.u += (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du) * (h / 6.0);
  out.t = s.t + h;
  check_state(out, cfg.vacuum_threshold);
  return out;
}

FluidState advance_ek(FluidState s, double t_end, double eps, const Laws& laws, const SolverConfig& cfg,
                      const std::function<void(const FluidState&)>& observer) {
  if (observer) observer(s);
  const double span = t_end - s.t;
  if (span <= 0.0) return s;
  const double dt_max = cfg.dt > 0.0 ? cfg.dt : stable_dt(s, eps, laws, cfg);
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
  SolverConfig c = cfg;
  c.dt = span / static_cast<double>(steps);
  const double t0 = s.t;
  for (long n = 0; n < steps; ++n) {
    s = step_ek(s, eps, laws, c);
    s.t = t0 + static_cast<double>(n + 1) * c.dt;
    if (observer) observer(s);
  }
  return s;
}

ComplexState to_z(const FluidState& s, double eps, const Laws& laws) {
  if (min_value(s.rho) <= 0.0) throw Error(ErrorKind::domain, "nonpositive density");
  const auto grad = gradient(s.rho);
  const ScalarField coef = law_field(s.rho, [&](double r) { return eps * std::sqrt(laws.capillarity.K(r) / r); });
  ComplexState z;
  z.w = coef * grad;
  z.a = law_field(s.rho, [&](double r) { return laws.capillarity.a(r); });
  z.ell = law_field(s.rho, [&](double r) { return eps * laws.capillarity.ell(r); });
  std::vector<ComplexField> comps;
  for (int i = 0; i < s.u.dim(); ++i) comps.push_back(make_complex(s.u[i], z.w[i]));
  z.z = ComplexVectorField(std::move(comps));
  z.eps = eps;
  z.t = s.t;
  return z;
}

FluidState from_z(const ComplexState& z, const Laws& laws) {
  if (!(z.eps > 0.0)) throw Error(ErrorKind::domain, "density is not recoverable from l at eps = 0");
  FluidState s;
  s.rho = law_field(z.ell, [&](double v) { return laws.capillarity.ell_inverse(v / z.eps); });
  std::vector<ScalarField> u;
  for (int i = 0; i < z.z.dim(); ++i) u.push_back(real_part(z.z[i]));
  s.u = VectorField(std::move(u));
  s.t = z.t;
  return s;
}

double z_equation_residual(const FluidState& prev, const FluidState& mid, const FluidState& next, double eps,
                           const Laws& laws) {
  const double dt = next.t - mid.t;
  if (!(dt > 0.0) || std::abs((mid.t - prev.t) - dt) > 1e-12 * std::max(1.0, dt))
    throw Error(ErrorKind::domain, "z residual needs three equally spaced states");
  const auto zp = to_z(prev, eps, laws), zm = to_z(mid, eps, laws), zn = to_z(next, eps, laws);
  const int d = mid.u.dim();
  ComplexField divz = derivative(zm.z[0], 0, 1);
  for (int i = 1; i < d; ++i) divz += derivative(zm.z[i], i, 1);
  const ComplexField adiv = to_complex(zm.a) * divz;
  const ScalarField gp = law_field(mid.rho, [&](double r) { return laws.pressure.g(r, 1); });
  double res2 = 0.0, zt2 = 0.0;
  for (int j = 0; j < d; ++j) {
    const ComplexField zt = (zn.z[j] - zp.z[j]) * Complex(1.0 / (2.0 * dt), 0.0);
    ComplexField r = zt + to_complex(gp * derivative(mid.rho, j, 1)) + Complex(0.0, eps) * derivative(adiv, j, 1);
    for (int i = 0; i < d; ++i) {
      const ComplexField dz = derivative(zm.z[j], i, 1);
      r += to_complex(mid.u[i]) * dz + Complex(0.0, 1.0) * to_complex(zm.w[i]) * dz;
    }
    res2 += std::pow(l2_norm(r), 2);
    zt2 += std::pow(l2_norm(zt), 2);
  }
  return std::sqrt(res2 / std::max(zt2, 1e-300));
}

double energy0(const FluidState& s, double eps, const Laws& laws) {
  const auto z = to_z(s, eps, laws);
  ScalarField dens = law_field(s.rho, [&](double r) { return laws.pressure.G(r); });
  for (int i = 0; i < s.u.dim(); ++i) dens += 0.5 * s.rho * (s.u[i] * s.u[i] + z.w[i] * z.w[i]);
  return integrate(dens);
}

double mass_excess(const FluidState& s) { return integrate(s.rho - 1.0); }

}  // namespace eklab
