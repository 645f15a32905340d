#pragma once

#include <functional>
#include <vector>

#include "eklab/field.hpp"
#include "eklab/laws.hpp"

namespace eklab {

struct FluidState {
  ScalarField rho;
  VectorField u;
  double t = 0.0;

  const Grid& grid() const { return rho.grid(); }
  FluidState& operator+=(const FluidState& o) { rho += o.rho; u += o.u; return *this; }
};

/// z = u + i w with w = grad l, a = sqrt(rho K), l = eps int_1^rho sqrt(K/r) dr.
struct ComplexState {
  ComplexVectorField z;
  VectorField w;
  ScalarField a;
  ScalarField ell;
  double eps = 0.0;
  double t = 0.0;
};

struct SolverConfig {
  /// Fixed step; 0 selects the CFL-limited step automatically.
  double dt = 0.0;
  double cfl_safety = 0.5;
  bool dealias = true;
  double vacuum_threshold = 0.1;
};

/// Right-hand side of the semi-discrete system, stored as a state increment.
struct Tendency {
  ScalarField drho;
  VectorField du;
};

/// Largest admissible step: min of the dispersive bound
/// s dx^2 / (pi eps max a) and the hyperbolic bound s dx / (max|u| + max sqrt(g' rho)).
double stable_dt(const FluidState& s, double eps, const Laws& laws, const SolverConfig& cfg);

/// Spectral evaluation of (rho_t, u_t) on a periodic grid.
Tendency ek_tendency(const FluidState& s, double eps, const Laws& laws, bool dealias);

/// One classical RK4 step of size cfg.dt (or the automatic step).
FluidState step_ek(const FluidState& s, double eps, const Laws& laws, const SolverConfig& cfg);

/// Advances to time t_end with uniform steps no larger than the configured
/// step. `observer` is called on the initial state and after every step.
FluidState advance_ek(FluidState s, double t_end, double eps, const Laws& laws, const SolverConfig& cfg,
                      const std::function<void(const FluidState&)>& observer = {});

ComplexState to_z(const FluidState& s, double eps, const Laws& laws);
/// Inverts l to recover rho (needs eps > 0) and takes u = Re z.
FluidState from_z(const ComplexState& z, const Laws& laws);

/// Residual of the z-equation
///   z_t + u.grad z + i (w.grad) z + g' grad rho + i eps grad(a div z)
/// at the middle of three consecutive states (z_t by central differences).
/// Returns ||residual||_2 / ||z_t||_2.
double z_equation_residual(const FluidState& prev, const FluidState& mid, const FluidState& next, double eps,
                           const Laws& laws);

/// E_0 = int rho |z|^2 / 2 + G(rho).
double energy0(const FluidState& s, double eps, const Laws& laws);
/// int (rho - 1).
double mass_excess(const FluidState& s);

// Semiclassical NLS  i eps psi_t + eps^2/2 Lap psi = g(|psi|^2) psi.

/// Strang split step: half potential rotation, exact kinetic multiplier, half rotation.
ComplexField step_nls(const ComplexField& psi, double eps, const PressureLaw& g, double dt);
ComplexField advance_nls(ComplexField psi, double t_end, double eps, const PressureLaw& g, double dt_max);

/// (rho, u) = (|psi|^2, eps Im(conj(psi) grad psi) / |psi|^2).
FluidState madelung(const ComplexField& psi, double eps, double vacuum_threshold = 0.1);
/// psi = sqrt(rho) exp(i phi / eps) with grad phi = u. The mean velocity must
/// make exp(i phi / eps) periodic.
ComplexField wavefunction(const FluidState& s, double eps);

// Half-line QHD (K = 1/rho). Experimental: no convergence theory backs it.

struct HalflineConfig {
  double dt = 0.0;
  double cfl_safety = 0.4;
  /// Prescribed u(0, t); the physical problem has u(0) = 0.
  std::function<double(double)> boundary_velocity;
  /// Kreiss-Oliger dissipation strength (0 disables).
  double dissipation = 0.0;
  double vacuum_threshold = 0.1;
  /// Abort when ||(rho - 1, u)||_2 grows for 10 consecutive steps by a total factor above this.
  double growth_limit = 4.0;
};

Tendency ek_tendency_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg);
FluidState step_ek_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg);
double stable_dt_halfline(const FluidState& s, double eps, const Laws& laws, const HalflineConfig& cfg);
FluidState advance_ek_halfline(FluidState s, double t_end, double eps, const Laws& laws, const HalflineConfig& cfg,
                               const std::function<void(const FluidState&)>& observer = {});

}  // namespace eklab
