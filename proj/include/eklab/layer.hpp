#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <valarray>
#include <vector>

#include "eklab/errors.hpp"
#include "eklab/laws.hpp"
#include "eklab/stencil.hpp"

namespace eklab {

/// Graded nodes on [0, zeta_max]: zeta_i = zeta_max sinh(beta s_i) / sinh(beta), s uniform.
class StretchedGrid {
 public:
  StretchedGrid(double zeta_max, std::size_t n, double beta = 2.0);
  /// zeta_max = factor / gamma_est; factor below 8 is rejected.
  static StretchedGrid for_decay(double gamma_est, std::size_t n, double factor = 24.0, double beta = 2.0);

  std::size_t size() const noexcept { return nodes_.size(); }
  double zeta_max() const noexcept { return nodes_.back(); }
  double beta() const noexcept { return beta_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  /// d^order/dzeta^order, order <= 4, nine-point stencils.
  std::valarray<double> derivative(const std::valarray<double>& f, int order = 1) const;
  /// int_zeta^zeta_max f (the tail integral, zero at zeta_max).
  std::valarray<double> tail_integral(const std::valarray<double>& f) const;
  std::valarray<double> zeta() const;
  bool operator==(const StretchedGrid& o) const { return nodes_ == o.nodes_; }

 private:
  std::vector<double> nodes_;
  double beta_;
  std::shared_ptr<const NodeDifferentiator> diff_;
};

enum class LayerKind { R, Phi };

struct DecayFit {
  double rate = 0.0;
  double amplitude = 0.0;
};

/// |f| ~ C e^{-gamma zeta}: least squares on log|f| over the tail where
/// |f| lies between 1e-12 and 1e-2 of its maximum.
DecayFit fit_decay(const StretchedGrid& grid, const std::valarray<double>& f);

struct LayerProfile {
  StretchedGrid grid;
  std::valarray<double> values;
  LayerKind kind = LayerKind::R;
  int rank = 0;
  DecayFit decay;

  double operator()(double zeta) const;
  std::valarray<double> derivative(int order = 1) const { return grid.derivative(values, order); }
  void refit();
  /// Fitted envelope with positive rate for the profile and its first
  /// `derivatives` zeta-derivatives (identically zero counts as a member).
  bool decaying(int derivatives = 4, double min_rate = 1e-3) const;
};

void write_profile(const std::filesystem::path& path, const LayerProfile& p);
LayerProfile read_profile(const std::filesystem::path& path);

/// Leading profile A'' = A (g(A^2) - g(rho_bar)) / kappa with A(0) = 1,
/// A(infinity) = sqrt(rho_bar); returns R^0 = A^2 - rho_bar. kappa = 1 is the
/// form of the layer lemma; K = c/rho gives kappa = 2c.
struct LeadingProfile {
  LayerProfile R;
  std::valarray<double> A;
  std::valarray<double> dA;  // analytic first integral slope
  double rho_bar = 1.0;
  double kappa = 1.0;
  /// max over nodes of |A'' - f(A)| with A'' by differentiation of the samples.
  double ode_residual = 0.0;
  /// max over nodes of |(A')^2/2 - (F(A) - F(b))| with A' by differentiation.
  double first_integral_defect = 0.0;
};

LeadingProfile solve_leading_profile(double rho_bar, const PressureLaw& g, const StretchedGrid& grid,
                                     double kappa = 1.0);
/// Predicted decay rate sqrt(2 rho_bar g'(rho_bar) / kappa) of R^0.
double leading_decay_rate(double rho_bar, const PressureLaw& g, double kappa = 1.0);

/// (a X')' = b X + F on the grid, X(0) = trace, X(zeta_max) = 0.
struct LinearLayerReport {
  double residual = 0.0;
  double tail = 0.0;
};
LayerProfile solve_linear_layer(const StretchedGrid& grid, const std::valarray<double>& a,
                                const std::valarray<double>& b, const std::valarray<double>& F, double trace,
                                int rank = 0, LinearLayerReport* report = nullptr);

enum class LayerLinearization {
  /// b = g'(rho0) only, dropping the Bohm-term correction.
  truncated,
  /// b = g'(rho0) + rho0''/rho0^2 - rho0'^2/rho0^3: the full linearization of
  /// the Bohm term around rho0 = rho_bar + R^0.
  full,
};

/// Coefficients a = 1/rho0, b per `mode` (divided by the capillary constant c).
std::pair<std::valarray<double>, std::valarray<double>> linear_layer_coefficients(const LeadingProfile& lead,
                                                                                   const PressureLaw& g,
                                                                                   LayerLinearization mode,
                                                                                   double c = 1.0);

/// d_zeta Phi = rho0^{-1} int_inf^zeta F1, then Phi = -int_zeta^inf d_zeta Phi.
LayerProfile solve_phi_layer(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                             const std::valarray<double>& F1);

/// Coupled form rho0 d_zeta Phi + R0 beta = -I with beta = -d_zeta Phi(0):
/// d_zeta Phi(0) = -I(0) / (rho0(0) - R0(0)).
LayerProfile solve_phi_layer_coupled(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                                     const std::valarray<double>& R0, const std::valarray<double>& I);

/// Uncoupled flux form rho0 d_zeta Phi = -I.
LayerProfile solve_phi_layer_flux(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                                  const std::valarray<double>& I);

/// F1^2 = -d_zeta(R^0 zeta d^2 phi^0(0)).
std::valarray<double> phi2_source(const LayerProfile& R0, double phi0_dd);

}  // namespace eklab
