#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "eklab/two_scale.hpp"

using namespace eklab;

namespace {

// smooth compact bump riding a left-going simple wave; nothing touches the wall at t = 0
FluidState bump(const Grid& g, double centre, double width) {
  auto rho = [=](double x) {
    const double s = (x - centre) / width;
    return std::abs(s) < 1 ? 1.0 + 0.05 * std::exp(1 - 1 / (1 - s * s)) : 1.0;
  };
  return {ScalarField::from_function(g, rho),
          VectorField({ScalarField::from_function(g, [=](double x) { return -2.0 * (std::sqrt(rho(x)) - 1.0); })}),
          0.0};
}

TwoScaleConfig config(TwoScaleTruncation t) {
  TwoScaleConfig cfg;
  cfg.N = 1;
  cfg.truncation = t;
  cfg.interior.dt = 0.02;
  return cfg;
}

const TwoScaleExpansion& reference() {
  static const TwoScaleExpansion ex = [] {
    const auto g = Grid::halfline(40.0, 801);
    return build_two_scale(bump(g, 14.0, 10.0), 20.0, Laws{}, config(TwoScaleTruncation::residual_balanced));
  }();
  return ex;
}

}  // namespace

TEST_CASE("no layer before the wave reaches the wall") {
  const auto g = Grid::halfline(40.0, 801);
  const auto ex = build_two_scale(bump(g, 14.0, 10.0), 2.0, Laws{}, config(TwoScaleTruncation::residual_balanced));
  for (const auto& rank : ex.R)
    for (const auto& v : rank) CHECK(std::abs(v).max() == 0.0);
  for (const auto& rank : ex.Phi)
    for (const auto& v : rank) CHECK(std::abs(v).max() == 0.0);
  const auto r = two_scale_residual(ex, 0.1, 5);
  const auto e = interior_residual(ex.interior, 0.1, 5);
  CHECK(r.E1 == 0.0);
  CHECK(r.E2 == 0.0);
  CHECK(r.e1 == doctest::Approx(e.mass));
  CHECK(r.e2 == doctest::Approx(e.momentum));
}

TEST_CASE("two-scale hierarchy is consistent") {
  const auto& ex = reference();
  CHECK(ex.Phi.size() == 4);
  CHECK(ex.boundary.size() == 1);
  for (const auto& v : ex.Phi[1]) CHECK(std::abs(v).max() == 0.0);
  const auto lc = layer_consistency(ex, 10);
  for (double m : lc.momentum) CHECK(m < 1e-6);
  for (double m : lc.mass) CHECK(m < 1e-6);
  double peak = 0.0;
  for (const auto& v : ex.R[0]) peak = std::max(peak, std::abs(v).max());
  CHECK(peak > 0.05);
}

TEST_CASE("two-scale residual orders") {
  const auto& ex = reference();
  const auto r = two_scale_report(ex, {0.2, 0.1, 0.05}, 5);
  const double N = ex.N;
  CHECK(r.order_e1 == doctest::Approx(N + 1).epsilon(0.3 / (N + 1)));
  CHECK(r.order_e2 == doctest::Approx(N + 1).epsilon(0.3 / (N + 1)));
  CHECK(r.order_E1 == doctest::Approx(N + 1).epsilon(0.3 / (N + 1)));
  CHECK(r.order_E2 == doctest::Approx(N).epsilon(0.3 / N));
  for (const auto& s : r.samples) CHECK(s.rho_trace < 1e-12);
  CHECK(r.samples[0].u_trace > r.samples[2].u_trace * 10);

  const auto path = std::filesystem::temp_directory_path() / "eklab_two_scale.csv";
  r.write_csv(path);
  std::ifstream is(path);
  std::string header, line;
  std::getline(is, header);
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(header.rfind("eps,", 0) == 0);
  CHECK(rows == 3);
  std::filesystem::remove(path);
}

TEST_CASE("exact-trace truncation") {
  const auto g = Grid::halfline(40.0, 801);
  const auto ex = build_two_scale(bump(g, 14.0, 10.0), 20.0, Laws{}, config(TwoScaleTruncation::traces_exact));
  CHECK(ex.Phi.size() == 3);
  const auto r = two_scale_residual(ex, 0.1, 5);
  CHECK(r.u_trace < 1e-10);
  CHECK(r.rho_trace < 1e-12);
}

TEST_CASE("assembled two-scale state") {
  const auto& ex = reference();
  const std::size_t i = ex.steps() - 1;
  const FluidState s = assemble_two_scale(ex, 0.1, i);
  CHECK(s.rho[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(s.u[0][0]) < 1e-3);
  CHECK_THROWS_AS(assemble_two_scale(ex, 1.0, i), Error);
  try {
    two_scale_residual(ex, 1.0, 5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::scale_separation);
  }
}

TEST_CASE("two-scale needs K = c / rho") {
  const auto g = Grid::halfline(40.0, 801);
  Laws laws;
  laws.capillarity = CapillarityLaw::constant(1.0);
  CHECK_THROWS_AS(build_two_scale(bump(g, 14.0, 10.0), 1.0, laws, config(TwoScaleTruncation::residual_balanced)),
                  Error);
}
