#include <cmath>
#include <deque>
#include <numbers>

#include "eklab/ek.hpp"
#include "eklab/ops.hpp"

namespace eklab {

namespace {

double boundary_u(const HalflineConfig& cfg, double t) { return cfg.boundary_velocity ? cfg.boundary_velocity(t) : 0.0; }

double boundary_du(const HalflineConfig& cfg, double t) {
  if (!cfg.boundary_velocity) return 0.0;
  const double h = 1e-5;
  return (cfg.boundary_velocity(t + h) - cfg.boundary_velocity(t - h)) / (2 * h);
}

void extrapolate_last(ScalarField& f) {
  const std::size_t n = f.size();
  f[n - 1] = 4 * f[n - 2] - 6 * f[n - 3] + 4 * f[n - 4] - f[n - 5];
}

void check_halfline(const FluidState& s, const Laws& laws, double threshold) {
  if (s.grid().kind() != GridKind::halfline_1d) throw Error(ErrorKind::dimension, "half-line stepper needs a halfline-1d grid");
  if (laws.capillarity.tag() != CapillarityTag::quantum)
    throw Error(ErrorKind::config, "half-line stepper supports K = 1/rho only");
  if (!s.rho.all_finite() || !s.u.all_finite()) throw NumericalAbort(ErrorKind::instability, "non-finite values", s.t);
  const double m = min_value(s.rho);
  if (m < threshold) throw NumericalAbort(ErrorKind::vacuum, "density below vacuum threshold", s.t);
}

FluidState axpy(const FluidState& s, double h, const Tendency& k) {
  FluidState out = s;
  out.rho += k.drho * h;
  out.u += k.du * h;
  out.t = s.t + h;
  return out;
}

double perturbation_norm(const FluidState& s) {
  return std::sqrt(std::pow(l2_norm(s.rho - 1.0), 2) + std::pow(l2_norm(s.u[0]), 2));
}

}  // namespace

Tendency ek_tendency_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg) {
  const Grid& g = s.grid();
  const ScalarField& rho = s.rho;
  const ScalarField& u = s.u[0];
  Tendency k{ScalarField(g), VectorField(g)};
  k.drho = -derivative(rho * u, 0, 1);
  const ScalarField r1 = derivative(rho, 0, 1);
  const ScalarField r2 = derivative(rho, 0, 2);
  const ScalarField gr = rho.map([&](double r) { return laws.pressure.g(r); });
  const ScalarField cap = r2 / rho - 0.5 * r1 * r1 / (rho * rho);
  k.du[0] = -u * derivative(u, 0, 1) - derivative(gr - (eps * eps) * cap, 0, 1);
  if (cfg.dissipation > 0.0) {
    const double h3 = std::pow(g.spacing(), 3);
    k.drho -= derivative(rho, 0, 4) * (cfg.dissipation * h3);
    k.du[0] -= derivative(u, 0, 4) * (cfg.dissipation * h3);
  }
  k.drho[0] = 0.0;
  k.du[0][0] = boundary_du(cfg, s.t);
  extrapolate_last(k.drho);
  extrapolate_last(k.du[0]);
  return k;
}

double stable_dt_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg) {
  SolverConfig c;
  c.cfl_safety = cfg.cfl_safety;
  const double h = s.grid().spacing();
  double amax = 0.0, cmax = 0.0;
  for (double r : s.rho.values()) {
    amax = std::max(amax, laws.capillarity.a(r));
    cmax = std::max(cmax, std::sqrt(laws.pressure.sound_speed2(r)));
  }
  double dt = cfg.cfl_safety * h / (max_abs(s.u[0]) + cmax);
  if (eps > 0.0) dt = std::min(dt, cfg.cfl_safety * h * h / (std::numbers::pi * eps * amax));
  return dt;
}

FluidState step_ek_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg) {
  check_halfline(s, laws, cfg.vacuum_threshold);
  const double h = cfg.dt != 0.0 ? cfg.dt : stable_dt_halfline(s, eps, laws, cfg);
  const Tendency k1 = ek_tendency_halfline(s, eps, laws, cfg);
  const Tendency k2 = ek_tendency_halfline(axpy(s, 0.5 * h, k1), eps, laws, cfg);
  const Tendency k3 = ek_tendency_halfline(axpy(s, 0.5 * h, k2), eps, laws, cfg);
  const Tendency k4 = ek_tendency_halfline(axpy(s, h, k3), eps, laws, cfg);
  FluidState out = s;
  out.rho += (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho + k4.drho) * (h / 6.0);
  out.u += (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du) * (h / 6.0);
  out.t = s.t + h;
  out.rho[0] = 1.0;
  out.u[0][0] = boundary_u(cfg, out.t);
  check_halfline(out, laws, cfg.vacuum_threshold);
  return out;
}

FluidState advance_ek_halfline(FluidState s, double t_end, double eps, const Laws& laws, const HalflineConfig& cfg,
                               const std::function<void(const FluidState&)>& observer) {
  if (observer) observer(s);
  const double span = t_end - s.t;
  if (span <= 0.0) return s;
  const double dt_max = cfg.dt > 0.0 ? cfg.dt : stable_dt_halfline(s, eps, laws, cfg);
  const long steps = std::max(1L, static_cast<long>(std::ceil(span / dt_max - 1e-9)));
  HalflineConfig c = cfg;
  c.dt = span / static_cast<double>(steps);
  const double t0 = s.t;
  std::deque<double> norms{perturbation_norm(s)};
  for (long n = 0; n < steps; ++n) {
    s = step_ek_halfline(s, eps, laws, c);
    s.t = t0 + static_cast<double>(n + 1) * c.dt;
    norms.push_back(perturbation_norm(s));
    if (norms.size() > 11) norms.pop_front();
    if (norms.size() == 11 && norms.front() > 0.0) {
      bool growing = true;
      for (std::size_t j = 1; j < norms.size(); ++j) growing = growing && norms[j] > norms[j - 1];
      if (growing && norms.back() / norms.front() > cfg.growth_limit)
        throw NumericalAbort(ErrorKind::instability, "perturbation norm grew by factor " +
                                                         std::to_string(norms.back() / norms.front()) + " in 10 steps",
                             s.t);
    }
    if (observer) observer(s);
  }
  return s;
}

}  // namespace eklab
