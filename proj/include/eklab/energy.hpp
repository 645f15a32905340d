#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "eklab/ek.hpp"

namespace eklab {

/// phi_n = a^{2n} rho, psi_n = a^{2n} g', and theta_n with
/// (theta_n^2)'/2 = phi_n sqrt(K/rho) / a, theta_n(1) = theta_ref.
/// [lo, hi] is the interval around 1 where rho >= alpha, rho < 1/alpha,
/// g' >= alpha and theta_n >= alpha.
struct EnergyWeights {
  int n = 0;
  Laws laws;
  double alpha = 0.1;
  double theta_ref = 1.0;
  double lo = 1.0;
  double hi = 1.0;

  static EnergyWeights build(int n, const Laws& laws, double alpha = 0.1, double theta_ref = 1.0);

  double phi(double rho) const;
  double psi(double rho) const;
  double theta(double rho) const;
  double theta_prime(double rho) const;
  bool valid(double rho) const { return rho >= lo && rho <= hi; }

 private:
  double theta2(double rho) const;
};

/// 1/2 int a^{2n} rho |Q Lap^n z|^2 + |P(theta_n Lap^n z)|^2 + g' a^{2n} |Lap^n(rho - 1)|^2 on a periodic grid.
double modified_energy(const FluidState& s, double eps, const Laws& laws, int n);
double modified_energy(const FluidState& s, double eps, const EnergyWeights& w);
/// int rho |z|^2 / 2 + G(rho).
double physical_energy(const FluidState& s, double eps, const Laws& laws);
/// ||z||^2_{H^{2n}} + ||rho - 1||^2_{H^{2n}}.
double energy_norm2(const FluidState& s, double eps, const Laws& laws, int n);

struct EquivalenceProbe {
  double c_est = 0.0;
  double C_est = 0.0;
  double holdout_min = 0.0;
  double holdout_max = 0.0;
  /// Density range, W^{1,inf} bound and weight interval all respected.
  bool hypotheses_ok = true;
  std::size_t skipped = 0;
  std::vector<double> ratios;
  bool contained(double margin = 0.0) const {
    return holdout_min >= c_est * (1 - margin) && holdout_max <= C_est * (1 + margin);
  }
};

/// Ratio (E_0 + E_n) / (||z||^2_{H^{2n}} + ||rho - 1||^2_{H^{2n}}) along a trajectory.
/// Every holdout_stride-th instant is held out; the rest give c_est and C_est.
EquivalenceProbe norm_equivalence_probe(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n,
                                        std::size_t holdout_stride = 3);

struct RateMonitor {
  std::vector<double> t;
  std::vector<double> ratio;
  double max_abs_ratio = 0.0;
  std::size_t skipped = 0;
};

/// dE_n/dt / [(||z||_{H^{2n}} + ||rho-1||_{H^{2n}})^2 (||u||_{W^{1,inf}} + ||rho||_{W^{2,inf}})],
/// dE_n/dt by 4th-order centered differences on a uniformly sampled trajectory.
RateMonitor energy_rate_monitor(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n);

struct DifferenceMonitor {
  std::vector<double> t;
  std::vector<double> energy;
  /// Gronwall fit energy(t) <= (energy(0) + source) exp(Lambda t).
  double Lambda = 0.0;
  double source = 0.0;
  bool resampled = false;
  /// Estimated error of resampling approx onto the exact mesh (0 if not needed).
  double interpolation_error = 0.0;
};

/// E~_n of the difference (exact - approx), weights at the exact density.
/// approx is resampled in time (and in space on periodic 1-d grids) when the meshes differ.
DifferenceMonitor difference_energy_monitor(const std::vector<FluidState>& exact,
                                            const std::vector<FluidState>& approx, double eps, const Laws& laws,
                                            int n);
/// The Gronwall fit alone: Lambda from the log-slope over the second half, then the smallest source.
std::pair<double, double> gronwall_fit(const std::vector<double>& t, const std::vector<double>& energy);

struct TangentialReport {
  std::vector<double> t;
  std::vector<double> energy;
  /// max over interior instants of ||z_xx(reconstructed) - z_xx|| / ||z||.
  double reconstruction_error = 0.0;
  /// Gain 1 / (eps min a) applied to time-derivative errors by the reconstruction.
  double amplification = 0.0;
};

/// E_alpha(t) = 1/2 int rho |d_t^a0 z|^2 + g' |d_t^a0 rho|^2 (rho - 1 in place of rho when a0 = 0) on a half-line trajectory sampled
/// uniformly in time, with the normal second derivative of z recovered from the z-equation.
TangentialReport tangential_energy(const std::vector<FluidState>& traj, double eps, const Laws& laws, int alpha0);

struct EnergyReport {
  int n = 0;
  double eps = 0.0;
  std::vector<double> t;
  std::vector<double> E0;
  std::vector<double> En;
  std::vector<double> Etilde;
  std::vector<double> Xn;
  /// Rate-monitor ratios live on the interior instants ratio_t.
  std::vector<double> ratio_t;
  std::vector<double> ratio;
  double c_est = 0.0;
  double C_est = 0.0;
  double max_ratio = 0.0;
  double Lambda = 0.0;
  double source = 0.0;

  void write_csv(const std::filesystem::path& path) const;
  /// Fitted constants.
  void write_json(const std::filesystem::path& path) const;
};

EnergyReport energy_audit(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n,
                          const std::vector<FluidState>* approx = nullptr);

}  // namespace eklab
