#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "eklab/layer.hpp"

using namespace eklab;

namespace {

double max_diff(const std::valarray<double>& a, const std::valarray<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::valarray<double> sample(const StretchedGrid& g, const std::function<double(double)>& f) {
  std::valarray<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g[i]);
  return v;
}

}  // namespace

TEST_CASE("stretched grid") {
  const StretchedGrid g(20.0, 200);
  CHECK(g[0] == 0.0);
  CHECK(g.zeta_max() == 20.0);
  CHECK(g[1] - g[0] < g[199] - g[198]);
  CHECK_THROWS_AS(StretchedGrid::for_decay(1.0, 200, 6.0), Error);
  const auto e = sample(g, [](double z) { return std::exp(-z); });
  CHECK(max_diff(g.derivative(e, 1), -e) < 1e-8);
  CHECK(max_diff(g.tail_integral(e), e - std::exp(-20.0)) < 1e-11);
  const auto fit = fit_decay(g, e);
  CHECK(fit.rate == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.amplitude == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("leading profile") {
  const auto gp = PressureLaw::gross_pitaevskii();
  const StretchedGrid grid(30.0, 600);

  SUBCASE("compatible trace gives no layer") {
    const auto p = solve_leading_profile(1.0, gp, grid);
    CHECK(max_diff(p.R.values, std::valarray<double>(0.0, grid.size())) == 0.0);
    CHECK(max_diff(p.A, std::valarray<double>(1.0, grid.size())) == 0.0);
  }
  SUBCASE("tanh closed form") {
    const double rb = 1.21, b = std::sqrt(rb);
    const auto p = solve_leading_profile(rb, gp, grid);
    const double c = std::atanh(1 / b);
    const auto exact = sample(grid, [&](double z) { return b * std::tanh(std::sqrt(rb / 2) * z + c); });
    CHECK(max_diff(p.A, exact) < 1e-8);
    CHECK(p.A[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.R.values[0] == doctest::Approx(1 - rb).epsilon(1e-12));
    CHECK(p.ode_residual < 1e-8);
    CHECK(p.first_integral_defect < 1e-10);
    CHECK(p.R.decay.rate == doctest::Approx(std::sqrt(2 * rb)).epsilon(0.01));
    CHECK(leading_decay_rate(rb, gp) == doctest::Approx(1.5556).epsilon(1e-4));
    CHECK(p.R.decaying());
  }
  SUBCASE("linearization at infinity") {
    for (const auto& law : {gp, PressureLaw::polytropic(1.5)}) {
      const double rb = 0.85;
      const auto p = solve_leading_profile(rb, law, grid);
      const double gamma = p.R.decay.rate;
      CHECK(gamma * gamma == doctest::Approx(2 * rb * law.g(rb, 1)).epsilon(0.02));
      CHECK(p.ode_residual < 1e-8);
    }
  }
  SUBCASE("kappa scales the rate") {
    const auto p = solve_leading_profile(1.1, gp, grid, 2.0);
    CHECK(p.R.decay.rate == doctest::Approx(leading_decay_rate(1.1, gp, 2.0)).epsilon(0.01));
    CHECK(p.ode_residual < 1e-8);
  }
  SUBCASE("no connecting orbit") {
    // g = (rho - 1)(rho - 1.3)(rho - 0.8): g' < 0 at rho_bar = 1.1, and for
    // rho_bar = 1.5 the enthalpy changes sign between the endpoints
    const auto bad = PressureLaw::custom(SmoothMap::polynomial({-1.04, 3.14, -3.1, 1.0}));
    for (double rb : {1.1, 1.18}) {
      try {
        solve_leading_profile(rb, bad, grid);
        FAIL("expected profile-existence error");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::profile_existence);
      }
    }
    CHECK_THROWS_AS(solve_leading_profile(-0.5, gp, grid), Error);
  }
}

TEST_CASE("linear layer") {
  const StretchedGrid grid(30.0, 500);
  const std::size_t n = grid.size();
  const std::valarray<double> one(1.0, n), zero(0.0, n);

  SUBCASE("zero forcing and trace") {
    const auto p = solve_linear_layer(grid, one, one * 4.0, zero, 0.0);
    CHECK(max_diff(p.values, zero) == 0.0);
  }
  SUBCASE("constant coefficients") {
    LinearLayerReport rep;
    const auto p = solve_linear_layer(grid, one, one * 4.0, zero, 1.0, 1, &rep);
    CHECK(max_diff(p.values, sample(grid, [](double z) { return std::exp(-2 * z); })) < 1e-9);
    CHECK(rep.residual < 1e-9);
    CHECK(p.decay.rate == doctest::Approx(2.0).epsilon(1e-4));
  }
  SUBCASE("manufactured solution with the leading-profile coefficients") {
    const StretchedGrid grid(45.0, 700);
    const auto gp = PressureLaw::gross_pitaevskii();
    const auto lead = solve_leading_profile(1.21, gp, grid, 2.0);
    for (auto mode : {LayerLinearization::truncated, LayerLinearization::full}) {
      const auto [a, b] = linear_layer_coefficients(lead, gp, mode);
      const auto X = sample(grid, [](double z) { return std::exp(-z) * (1 + z); });
      const auto dX = sample(grid, [](double z) { return -z * std::exp(-z); });
      const std::valarray<double> F = grid.derivative(a * dX, 1) - b * X;
      const auto p = solve_linear_layer(grid, a, b, F, 1.0);
      CHECK(max_diff(p.values, X) < 1e-8);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(solve_linear_layer(grid, one, one * -1.0, zero, 1.0), Error);
    try {
      solve_linear_layer(grid, one, one * -1.0, zero, 1.0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::coercivity);
    }
    try {
      solve_linear_layer(StretchedGrid(5.0, 100), std::valarray<double>(1.0, 100), std::valarray<double>(0.25, 100),
                         std::valarray<double>(0.0, 100), 1.0);
      FAIL("expected enlarge-domain error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::enlarge_domain);
    }
  }
}

TEST_CASE("phi layer") {
  const StretchedGrid grid(40.0, 800);
  const std::size_t n = grid.size();
  const std::valarray<double> one(1.0, n), zero(0.0, n);

  SUBCASE("zero source") {
    const auto p = solve_phi_layer(1, grid, one, zero);
    CHECK(max_diff(p.values, zero) == 0.0);
    CHECK(p.kind == LayerKind::Phi);
  }
  SUBCASE("exponential source") {
    const auto e = sample(grid, [](double z) { return std::exp(-z); });
    const auto p = solve_phi_layer(2, grid, one, e);
    CHECK(max_diff(p.values, e) < 1e-11);
    CHECK(max_diff(p.derivative(1), -e) < 1e-8);
  }
  SUBCASE("the Phi^2 source is nonzero") {
    const auto lead = solve_leading_profile(1.21, PressureLaw::gross_pitaevskii(), grid, 2.0);
    const auto F1 = phi2_source(lead.R, 0.3);
    const auto p = solve_phi_layer(2, grid, lead.A * lead.A, F1);
    double m = 0;
    for (double v : p.derivative(1)) m = std::max(m, std::abs(v));
    CHECK(m > 1e-3);
    CHECK(p.decaying());
    // rho0 Phi' = -R0 zeta phi_dd exactly
    const std::valarray<double> flux = lead.A * lead.A * p.derivative(1) + lead.R.values * grid.zeta() * 0.3;
    double fm = 0;
    for (double v : flux) fm = std::max(fm, std::abs(v));
    CHECK(fm < 1e-8);
  }
  SUBCASE("coupled form fixes the boundary slope") {
    const auto lead = solve_leading_profile(1.21, PressureLaw::gross_pitaevskii(), grid, 2.0);
    const auto I = sample(grid, [](double z) { return std::exp(-z) * (0.2 + z); });
    const auto p = solve_phi_layer_coupled(2, grid, lead.A * lead.A, lead.R.values, I);
    const auto d = p.derivative(1);
    // rho0 Phi' + R0 beta = -I with beta = -Phi'(0)
    const std::valarray<double> res = lead.A * lead.A * d - lead.R.values * d[0] + I;
    double m = 0;
    for (double v : res) m = std::max(m, std::abs(v));
    CHECK(m < 1e-8);
    CHECK(d[0] == doctest::Approx(-0.2 / 1.21).epsilon(1e-8));
  }
  SUBCASE("non-decaying source") {
    try {
      solve_phi_layer(2, grid, one, one);
      FAIL("expected decay error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::decay);
    }
  }
}

TEST_CASE("profile serialization") {
  const StretchedGrid grid(30.0, 300);
  const auto lead = solve_leading_profile(0.9, PressureLaw::gross_pitaevskii(), grid);
  const auto path = std::filesystem::temp_directory_path() / "eklab_profile_test.json";
  write_profile(path, lead.R);
  const auto back = read_profile(path);
  CHECK(back.grid == grid);
  CHECK(max_diff(back.values, lead.R.values) == 0.0);
  CHECK(back.decay.rate == lead.R.decay.rate);
  std::filesystem::remove(path);
}
