#include "eklab/history.hpp"

#include <algorithm>
#include <cmath>

#include "eklab/stencil.hpp"

namespace eklab {

namespace {

// Start index and weights of a `width`-point stencil around fractional index s.
std::pair<std::size_t, std::vector<double>> stencil(std::size_t n, double s, int width, int order) {
  if (n < static_cast<std::size_t>(width))
    throw Error(ErrorKind::history_too_short, "need " + std::to_string(width) + " samples, have " + std::to_string(n));
  long start = static_cast<long>(std::floor(s)) - (width - 1) / 2;
  start = std::clamp<long>(start, 0, static_cast<long>(n) - width);
  std::vector<double> nodes(width);
  for (int j = 0; j < width; ++j) nodes[j] = static_cast<double>(start + j);
  auto w = fornberg_weights(s, nodes, order)[order];
  return {static_cast<std::size_t>(start), std::move(w)};
}

}  // namespace

void History::push(FluidState s) {
  if (!states_.empty() && s.rho.grid() != states_.front().rho.grid())
    throw Error(ErrorKind::shape, "history states live on different grids");
  states_.push_back(std::move(s));
}

FluidState History::at(double t) const {
  if (states_.empty()) throw Error(ErrorKind::history_too_short, "empty history");
  if (states_.size() == 1) return states_[0];
  const double s = (t - t0_) / dt_;
  const int width = std::min<int>(4, static_cast<int>(states_.size()));
  const auto [start, w] = stencil(states_.size(), s, width, 0);
  FluidState out = states_[start];
  out.rho *= w[0];
  out.u *= w[0];
  for (int j = 1; j < width; ++j) {
    out.rho += states_[start + j].rho * w[j];
    out.u += states_[start + j].u * w[j];
  }
  out.t = t;
  return out;
}

FluidState History::time_derivative(std::size_t i, int order) const {
  const int width = order + 4;
  const auto [start, w] = stencil(states_.size(), static_cast<double>(i), width, order);
  const FluidState& c = states_.at(i);
  FluidState out{ScalarField(c.rho.grid()), VectorField(c.rho.grid()), c.t};
  const double scale = std::pow(dt_, -order);
  for (int j = 0; j < width; ++j) {
    const FluidState& s = states_[start + j];
    out.rho += (s.rho - c.rho) * (w[j] * scale);
    out.u += (s.u - c.u) * (w[j] * scale);
  }
  return out;
}

double TimeSeries::at(double t) const {
  if (values.size() == 1) return values[0];
  const int width = std::min<int>(4, static_cast<int>(values.size()));
  const auto [start, w] = stencil(values.size(), (t - t0) / dt, width, 0);
  double acc = 0.0;
  for (int j = 0; j < width; ++j) acc += w[j] * values[start + j];
  return acc;
}

double TimeSeries::rate(double t) const {
  if (values.size() < 2) return 0.0;
  const int width = std::min<int>(5, static_cast<int>(values.size()));
  const auto [start, w] = stencil(values.size(), (t - t0) / dt, width, 1);
  double acc = 0.0;
  for (int j = 0; j < width; ++j) acc += w[j] * values[start + j];
  return acc / dt;
}

double TimeSeries::derivative(std::size_t i, int order) const {
  const int width = order + 4;
  const auto [start, w] = stencil(values.size(), static_cast<double>(i), width, order);
  double acc = 0.0;
  for (int j = 0; j < width; ++j) acc += w[j] * (values[start + j] - values[i]);
  return acc * std::pow(dt, -order);
}

}  // namespace eklab
