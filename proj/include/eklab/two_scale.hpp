#pragma once

#include <filesystem>
#include <valarray>
#include <vector>

#include "eklab/bkw.hpp"
#include "eklab/layer.hpp"

namespace eklab {

enum class TwoScaleTruncation {
  /// Ranks <= N inside and in R, Phi up to N+1: traces rho(0) = 1, u(0) = 0 hold exactly.
  traces_exact,
  /// Also Phi^{N+2} (without its rank N+1 interior partner): balances the
  /// mass residual to the next order, leaving u(0) = eps^{N+1} d_zeta Phi^{N+2}(0).
  residual_balanced,
};

struct TwoScaleConfig {
  int N = 1;
  double zeta_max = 45.0;
  std::size_t zeta_points = 600;
  double beta = 2.0;
  EulerConfig interior;
  TwoScaleTruncation truncation = TwoScaleTruncation::residual_balanced;
  LayerLinearization linearization = LayerLinearization::full;
};

/// Half-line expansion sum eps^k (r^k + R^k(x/eps), phi^k + Phi^k(x/eps)).
/// Requires K = c/rho.
struct TwoScaleExpansion {
  int N = 0;
  TwoScaleTruncation truncation = TwoScaleTruncation::residual_balanced;
  double c = 1.0;
  BKWExpansion interior;
  StretchedGrid grid{1.0, 16};
  std::vector<double> rho_bar;                         // rho^0(0, t_i)
  std::vector<std::vector<std::valarray<double>>> R;   // R[k][i], k = 0..N
  std::vector<std::vector<std::valarray<double>>> Phi; // Phi[j][i], j = 0..N+1 or N+2
  std::vector<TimeSeries> boundary;                    // u^k(0, t) = -d_zeta Phi^{k+1}(0, t)

  std::size_t steps() const { return rho_bar.size(); }
  double dt() const { return interior.interior.at(0).dt(); }
  LayerProfile R_profile(int k, std::size_t i) const;
  LayerProfile Phi_profile(int j, std::size_t i) const;
  /// weight rate: half the smallest predicted decay rate of R^0 over the run
  double weight_rate() const;
};

TwoScaleExpansion build_two_scale(const FluidState& data, double t_end, const Laws& laws, const TwoScaleConfig& cfg);

/// Max over times of the order-k layer equations after the solve:
/// momentum coefficients 0..N and scaled-mass coefficients 0..(N+1 or N+2).
struct LayerConsistency {
  std::vector<double> momentum;
  std::vector<double> mass;
};
LayerConsistency layer_consistency(const TwoScaleExpansion& ex, std::size_t stride = 1);

/// (rho_app, u_app) on the interior grid.
FluidState assemble_two_scale(const TwoScaleExpansion& ex, double eps, std::size_t i);

struct TwoScaleResidual {
  double eps = 0.0;
  double e1 = 0.0, e2 = 0.0;  // interior residual, sup_t L2
  double E1 = 0.0, E2 = 0.0;  // layer residual, sup_t sup_zeta e^{gamma zeta} |E|
  double rho_trace = 0.0;     // sup_t |rho_app(0) - 1|
  double u_trace = 0.0;       // sup_t |u_app(0)|
};

struct TwoScaleReport {
  std::vector<TwoScaleResidual> samples;
  double order_e1 = 0.0, order_e2 = 0.0, order_E1 = 0.0, order_E2 = 0.0;
  void write_csv(const std::filesystem::path& path) const;
};

TwoScaleResidual two_scale_residual(const TwoScaleExpansion& ex, double eps, std::size_t stride = 1);
TwoScaleReport two_scale_report(const TwoScaleExpansion& ex, const std::vector<double>& eps, std::size_t stride = 1);

}  // namespace eklab
