#pragma once

#include <vector>

#include "eklab/ek.hpp"

namespace eklab {

/// States sampled on the uniform time mesh t0 + i dt.
class History {
 public:
  History() = default;
  History(double t0, double dt) : t0_(t0), dt_(dt) {}

  void push(FluidState s);
  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  const FluidState& operator[](std::size_t i) const { return states_.at(i); }
  FluidState& operator[](std::size_t i) { return states_.at(i); }
  const FluidState& back() const { return states_.back(); }
  const std::vector<FluidState>& states() const noexcept { return states_; }

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  double time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
  double t_end() const { return time(states_.size() - 1); }

  /// Cubic Lagrange interpolation in time (four nearest samples).
  FluidState at(double t) const;
  /// d^order/dt^order of the state at sample i, by finite differences over
  /// order + 4 samples (centered where the mesh allows).
  FluidState time_derivative(std::size_t i, int order = 1) const;

 private:
  double t0_ = 0.0;
  double dt_ = 0.0;
  std::vector<FluidState> states_;
};

/// Scalar time series on a uniform mesh (boundary traces and the like).
struct TimeSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  double at(double t) const;
  /// First derivative of the interpolant at t.
  double rate(double t) const;
  double derivative(std::size_t i, int order = 1) const;
};

}  // namespace eklab
