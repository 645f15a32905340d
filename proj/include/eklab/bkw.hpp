#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eklab/history.hpp"
#include "eklab/jet.hpp"

namespace eklab {

/// Raised when min g'(rho) drops below alpha; keeps what was computed.
class HyperbolicityLoss : public NumericalAbort {
 public:
  HyperbolicityLoss(const std::string& what, double time, History partial)
      : NumericalAbort(ErrorKind::hyperbolicity_loss, what, time), partial_(std::move(partial)) {}
  const History& partial() const noexcept { return partial_; }

 private:
  History partial_;
};

struct EulerConfig {
  /// Output (and step) spacing; 0 picks 0.5 dx / max(|u| + c).
  double dt = 0.0;
  /// Running bound min g'(rho) >= alpha; 0 uses half the initial minimum.
  double alpha = 0.0;
  /// Kreiss-Oliger strength on half-line grids.
  double dissipation = 0.0;
};

/// Compressible Euler (rank 0). Periodic grids: conservative (rho, rho u)
/// spectral RK4. Half-line: finite differences with the wall u(0) = 0.
History solve_euler(const FluidState& data, double t_end, const PressureLaw& g, const EulerConfig& cfg = {});

/// rank 0 stores rho^0 itself, rank k >= 1 stores (r^k, u^k).
struct BKWExpansion {
  int N = 0;
  Laws laws;
  std::vector<History> interior;
  double T = 0.0;

  const Grid& grid() const { return interior.at(0)[0].rho.grid(); }
  std::size_t steps() const { return interior.at(0).size(); }
  ScalarJet rho_jet(std::size_t i) const;
  VectorJet u_jet(std::size_t i) const;
};

/// Periodic cascade: all ranks advanced together as one jet-valued ODE,
/// d/dt U^k = -S_k(U) with S the eps-expanded spatial operator.
/// data[0] is (rho^0, u^0), data[k] is (r^k_0, u^k_0).
BKWExpansion solve_cascade(const std::vector<FluidState>& data, double t_end, const Laws& laws,
                           const EulerConfig& cfg = {});

/// Rank-k forcing (f1 in rho, f2 in u): minus the order-k residual with rank k zeroed.
History cascade_forcing(int k, const std::vector<History>& lower, const Laws& laws);

struct LinearizedConfig {
  /// Steps per background interval.
  int substeps = 1;
  double dissipation = 0.0;
  /// Half-line only: u(0, t) = b(t).
  std::optional<TimeSeries> boundary;
};

/// r_t + div(r u0 + rho0 u) = f1,  u_t + (u0.grad) u + (u.grad) u0 + grad(g'(rho0) r) = f2,
/// on the time mesh of the background.
History solve_linearized(const History& background, const History* forcing, const FluidState& data,
                         const PressureLaw& g, const LinearizedConfig& cfg = {});

/// Half-line cascade with boundary traces b^k(t) for ranks 1..N supplied by the caller
/// (entries beyond the list default to 0).
BKWExpansion solve_halfline_cascade(const std::vector<FluidState>& data, double t_end, const Laws& laws,
                                    const std::vector<TimeSeries>& boundary, const EulerConfig& cfg = {});
/// Appends rank N+1 driven by its forcing and boundary trace.
void extend_halfline_cascade(BKWExpansion& ex, const FluidState& data, const std::optional<TimeSeries>& boundary,
                             const EulerConfig& cfg = {});

/// phi with grad phi = u, obtained as phi(0, x) = int_0^x u and
/// phi_t = -(|u|^2/2 + g(rho)) at rank 0, -(u0 u + g'(rho0) r) + int f2 at rank k.
std::vector<ScalarField> potential_history(const BKWExpansion& ex, int k);

FluidState assemble_interior(const BKWExpansion& ex, double eps, std::size_t i);

struct InteriorResidual {
  double eps = 0.0;
  double mass = 0.0;      // sup_t ||e1||_2
  double momentum = 0.0;  // sup_t ||e2||_2
};

struct ResidualReport {
  std::vector<InteriorResidual> samples;
  double mass_order = 0.0;
  double momentum_order = 0.0;
};

/// e = equations of motion applied to the assembled solution, time
/// derivatives by finite differences on the rank histories.
InteriorResidual interior_residual(const BKWExpansion& ex, double eps, std::size_t stride = 1);
ResidualReport residual_report(const BKWExpansion& ex, const std::vector<double>& eps, std::size_t stride = 1);

/// max over times of ||coefficient k|| of the jet residual, (mass, momentum) per k.
std::vector<std::pair<double, double>> cascade_residual_coefficients(const BKWExpansion& ex, std::size_t stride = 1);

/// Least-squares slope of log e against log eps. Needs >= 3 pairs with e > 0.
double fit_rate(const std::vector<double>& eps, const std::vector<double>& err);

struct CompatibilityCondition {
  std::string name;
  double violation = 0.0;
  bool pass = true;
};
struct CompatibilityReport {
  std::vector<CompatibilityCondition> conditions;
  bool pass() const;
};

/// Half-line data ranks U_0^k (data[0] holds rho_0 itself). Checks the traces
/// of (rho - 1, u) and of F(U_0) at x = 0 by powers of eps up to `depth`.
CompatibilityReport compatibility_check(const std::vector<FluidState>& data, const Laws& laws, int depth,
                                        double tol = 1e-8);

/// manifest.json plus rank_k/state_i_{rho,u0,...}.ekfs.
void write_expansion(const std::filesystem::path& dir, const BKWExpansion& ex, const ResidualReport* report = nullptr);
BKWExpansion read_expansion(const std::filesystem::path& dir, const Laws& laws);

}  // namespace eklab
