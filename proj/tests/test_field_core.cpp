#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eklab/fft.hpp"
#include "eklab/ops.hpp"
#include "eklab/snapshot.hpp"
#include "eklab/stencil.hpp"

using namespace eklab;
using std::numbers::pi;

namespace {

// Five-point second derivative on a periodic sample vector.
std::vector<double> fd4_second(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto at = [&](long o) { return f[(i + n + o) % n]; };
    d[i] = (-at(-2) + 16 * at(-1) - 30 * at(0) + 16 * at(1) - at(2)) / (12 * h * h);
  }
  return d;
}

VectorField smooth_random_field(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  VectorField u(g);
  for (int c = 0; c < 2; ++c) {
    for (int kx = -3; kx <= 3; ++kx)
      for (int ky = -3; ky <= 3; ++ky) {
        const double a = U(rng), b = U(rng);
        u[c] += ScalarField::from_function(g, [&](double x, double y) {
          return a * std::cos(kx * x + ky * y) + b * std::sin(kx * x + ky * y);
        });
      }
  }
  return u;
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid::periodic1d(1.0, 100), Error);
  const auto g = Grid::periodic1d(2.0, 64);
  CHECK(g.spacing() == doctest::Approx(2.0 / 64));
  const auto h = Grid::halfline(3.0, 31);
  CHECK(h.spacing() == doctest::Approx(0.1));
  CHECK(h.coordinate(0, 0) == 0.0);
  CHECK(h.coordinate(0, 30) == doctest::Approx(3.0));
}

TEST_CASE("fields reject mismatched grids and wrong component counts") {
  const auto g1 = Grid::periodic1d(1.0, 16), g2 = Grid::periodic1d(2.0, 16);
  const ScalarField a(g1, 1.0), b(g2, 1.0);
  CHECK_THROWS_AS(a + b, Error);
  const auto g = Grid::periodic2d(1.0, 1.0, 8, 8);
  CHECK_THROWS_AS(VectorField(std::vector<ScalarField>{ScalarField(g)}), Error);
}

TEST_CASE("spectral derivative of a resolved mode") {
  const double L = 3.0;
  const auto g = Grid::periodic1d(L, 64);
  const auto f = ScalarField::from_function(g, [&](double x) { return std::sin(2 * pi * x / L); });
  const auto d = derivative(f, 0, 1);
  const auto exact = ScalarField::from_function(g, [&](double x) { return 2 * pi / L * std::cos(2 * pi * x / L); });
  CHECK(max_abs(d - exact) <= 1e-12 * max_abs(exact));
}

TEST_CASE("derivative of a constant vanishes") {
  const auto g = Grid::periodic2d(2 * pi, 4.0, 32, 16);
  const ScalarField c(g, 3.5);
  for (int order = 1; order <= 4; ++order) {
    CHECK(max_abs(derivative(c, 0, order)) < 1e-12);
    CHECK(max_abs(derivative(c, 1, order)) < 1e-12);
  }
  const ScalarField h(Grid::halfline(2.0, 41), 3.5);
  for (int order = 1; order <= halfline_max_order; ++order) CHECK(max_abs(derivative(h, 0, order)) < 1e-8);
}

TEST_CASE("spectral second derivative agrees with a refined finite-difference oracle") {
  auto f = [](double x) { return std::exp(std::sin(x)); };
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto d = derivative(ScalarField::from_function(g, f), 0, 2);
  double prev = 0;
  for (std::size_t m : {256u, 512u}) {
    std::vector<double> s(m);
    const double h = 2 * pi / m;
    for (std::size_t i = 0; i < m; ++i) s[i] = f(i * h);
    const auto fd = fd4_second(s, h);
    double err = 0;
    for (std::size_t i = 0; i < 64; ++i) err = std::max(err, std::abs(d[i] - fd[i * (m / 64)]));
    CHECK(err < 2.0 * std::pow(h, 4));
    if (prev > 0) CHECK(prev / err > 12.0);
    prev = err;
  }
}

TEST_CASE("derivative is linear") {
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto a = ScalarField::from_function(g, [](double x) { return std::cos(3 * x); });
  const auto b = ScalarField::from_function(g, [](double x) { return std::exp(std::cos(x)); });
  CHECK(max_abs(derivative(a + 2.0 * b, 0, 3) - derivative(a, 0, 3) - 2.0 * derivative(b, 0, 3)) < 1e-9);
}

TEST_CASE("half-line stencils are fourth order with one-sided closures") {
  auto f = [](double x) { return std::exp(-x) * std::cos(2 * x); };
  auto d1 = [](double x) { return -std::exp(-x) * (std::cos(2 * x) + 2 * std::sin(2 * x)); };
  auto d2 = [](double x) { return std::exp(-x) * (-3 * std::cos(2 * x) + 4 * std::sin(2 * x)); };
  double e1prev = 0, e2prev = 0;
  for (std::size_t n : {81u, 161u, 321u}) {
    const auto g = Grid::halfline(4.0, n);
    const auto F = ScalarField::from_function(g, f);
    const double e1 = max_abs(derivative(F, 0, 1) - ScalarField::from_function(g, d1));
    const double e2 = max_abs(derivative(F, 0, 2) - ScalarField::from_function(g, d2));
    if (e1prev > 0) {
      CHECK(std::log2(e1prev / e1) > 3.7);
      CHECK(std::log2(e2prev / e2) > 3.7);
    }
    e1prev = e1;
    e2prev = e2;
  }
  const ScalarField F(Grid::halfline(1.0, 64), 1.0);
  CHECK_THROWS_AS(derivative(F, 0, 5), Error);
  try {
    (void)derivative(F, 0, 5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::unsupported_order);
  }
}

TEST_CASE("Fornberg weights reproduce polynomials") {
  const std::vector<double> x{0.0, 0.3, 0.7, 1.2, 2.0};
  const auto w = fornberg_weights(0.5, x, 2);
  double s0 = 0, s1 = 0, s2 = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    s0 += w[0][j] * x[j] * x[j] * x[j];
    s1 += w[1][j] * x[j] * x[j] * x[j];
    s2 += w[2][j] * x[j] * x[j] * x[j];
  }
  CHECK(s0 == doctest::Approx(0.125));
  CHECK(s1 == doctest::Approx(0.75));
  CHECK(s2 == doctest::Approx(3.0));
}

TEST_CASE("Sobolev norms") {
  const auto g = Grid::periodic1d(2 * pi, 64);
  CHECK(sobolev_norm(ScalarField(g), 3) == 0.0);
  for (int k : {1, 3, 7}) {
    const auto f = ComplexField::from_function(g, [&](double x) { return std::exp(Complex(0, k * x)); });
    for (int s : {0, 1, 2, 4}) {
      // Direct quadrature of (1 + k^2)^s |f|^2 over one period.
      double q = 0;
      for (std::size_t i = 0; i < g.size(); ++i) q += std::pow(1.0 + k * k, s) * std::norm(f[i]) * g.spacing();
      CHECK(sobolev_norm(f, s) == doctest::Approx(std::sqrt(q)).epsilon(1e-12));
      CHECK(sobolev_norm(f, s) == doctest::Approx(std::sqrt(2 * pi) * std::pow(1.0 + k * k, s / 2.0)).epsilon(1e-12));
    }
  }
  const auto a = ScalarField::from_function(g, [](double x) { return std::exp(std::sin(x)); });
  const auto b = ScalarField::from_function(g, [](double x) { return std::cos(5 * x) - 0.3; });
  CHECK(sobolev_norm(a, 0) == doctest::Approx(l2_norm(a)).epsilon(1e-12));
  for (int s = 0; s < 5; ++s) {
    CHECK(sobolev_norm(a, s) <= sobolev_norm(a, s + 1));
    CHECK(sobolev_norm(a + b, s) <= sobolev_norm(a, s) + sobolev_norm(b, s) + 1e-12);
    CHECK(sobolev_norm(-2.5 * a, s) == doctest::Approx(2.5 * sobolev_norm(a, s)));
  }
  const auto h = Grid::halfline(5.0, 201);
  const auto e = ScalarField::from_function(h, [](double x) { return std::exp(-x * x); });
  CHECK(sobolev_norm(e, 0) == doctest::Approx(l2_norm(e)));
  for (int s = 0; s < 6; ++s) CHECK(sobolev_norm(e, s) <= sobolev_norm(e, s + 1));
  // ||e||^2 = sqrt(pi/2)/2, ||e'||^2 = sqrt(pi/2)/2 on the half line.
  CHECK(sobolev_norm(e, 1) == doctest::Approx(std::sqrt(std::sqrt(pi / 2))).epsilon(1e-6));
}

TEST_CASE("Parseval") {
  const auto g = Grid::periodic2d(2 * pi, 3.0, 32, 16);
  const auto f = ComplexField::from_function(
      g, [](double x, double y) { return Complex(std::exp(std::cos(x)) * std::sin(2 * pi * y / 3), std::sin(x)); });
  CHECK(spectral_l2_norm(f) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("Leray projection") {
  const auto g = Grid::periodic2d(2 * pi, 2 * pi, 32, 32);
  const auto phi = ScalarField::from_function(g, [](double x, double y) { return std::exp(std::sin(x) * std::cos(y)); });
  const auto grad = gradient(phi);
  auto [q1, p1] = leray_project(grad);
  CHECK(l2_norm(q1 - grad) < 1e-12 * l2_norm(grad));
  CHECK(l2_norm(p1) < 1e-12 * l2_norm(grad));

  const auto psi = ScalarField::from_function(g, [](double x, double y) { return std::cos(x + 2 * y) + std::sin(3 * x); });
  VectorField rot(std::vector<ScalarField>{-derivative(psi, 1), derivative(psi, 0)});
  auto [q2, p2] = leray_project(rot);
  CHECK(l2_norm(q2) < 1e-12 * l2_norm(rot));
  CHECK(l2_norm(p2 - rot) < 1e-12 * l2_norm(rot));

  const auto u = smooth_random_field(g, 7);
  auto [q, p] = leray_project(u);
  const double h1 = std::sqrt(std::pow(sobolev_norm(u[0], 1), 2) + std::pow(sobolev_norm(u[1], 1), 2));
  CHECK(l2_norm(divergence(p)) <= 1e-10 * h1);
  CHECK(l2_norm(curl(q)) <= 1e-10 * h1);
  CHECK(l2_norm(q + p - u) < 1e-13 * l2_norm(u));
  CHECK(std::abs(inner(q, p)) <= 1e-10 * std::pow(l2_norm(u), 2));
  auto [qq, qp] = leray_project(q);
  CHECK(l2_norm(qq - q) < 1e-12 * l2_norm(u));
  CHECK(l2_norm(qp) < 1e-12 * l2_norm(u));

  // Constant flows belong to the gradient part.
  const VectorField mean(g, 1.25);
  auto [qc, pc] = leray_project(mean);
  CHECK(l2_norm(qc - mean) < 1e-12);
  CHECK(l2_norm(pc) < 1e-12);
}

TEST_CASE("Leray projection needs a planar grid") {
  const auto g = Grid::periodic1d(2 * pi, 32);
  const VectorField u(std::vector<ScalarField>{ScalarField::from_function(g, [](double x) { return std::sin(x); })});
  try {
    (void)leray_project(u);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension);
  }
  auto [q, p] = helmholtz_split(u);
  CHECK(l2_norm(q - u) == 0.0);
  CHECK(l2_norm(p) == 0.0);
}

TEST_CASE("tangential X^n norm") {
  const auto g = Grid::halfline(4.0, 81);
  const auto z0 = ComplexField::from_function(g, [](double x) { return Complex(std::exp(-x), std::exp(-2 * x)); });
  const double dt = 1e-2;
  std::vector<ComplexField> steady(12, z0);
  for (int n : {0, 2, 4, 6}) CHECK(xn_tangential_norm(steady, dt, n, 5) == doctest::Approx(l2_norm(z0)).epsilon(1e-10));

  const double omega = 1.7;
  std::vector<ComplexField> osc;
  for (int k = 0; k < 40; ++k) osc.push_back(z0 * std::exp(Complex(0, omega * k * dt)));
  CHECK(xn_tangential_norm(osc, dt, 0, 20) == doctest::Approx(l2_norm(z0)).epsilon(1e-12));
  for (int n : {2, 4, 6}) {
    double closed = 0;
    for (int a = 0; a <= n / 2; ++a) closed += std::pow(omega, a) * l2_norm(z0);
    CHECK(xn_tangential_norm(osc, dt, n, 20) == doctest::Approx(closed).epsilon(1e-7));
  }
  std::vector<ComplexField> short_hist(3, z0);
  try {
    (void)xn_tangential_norm(short_hist, dt, 4, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::history_too_short);
  }
}

TEST_CASE("dealiasing removes the upper third of the spectrum") {
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto low = ScalarField::from_function(g, [](double x) { return std::cos(21 * x); });
  const auto high = ScalarField::from_function(g, [](double x) { return std::cos(22 * x); });
  CHECK(max_abs(dealias(low + high) - low) < 1e-13);
}

TEST_CASE("snapshot round trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto g = Grid::periodic2d(2.0, 3.0, 8, 4);
  const auto f = ScalarField::from_function(g, [](double x, double y) { return x * 10 + y; });
  write_snapshot(dir / "ekfs_test.bin", f);
  const auto back = std::get<ScalarField>(read_snapshot(dir / "ekfs_test.bin"));
  CHECK(back.grid() == g);
  CHECK(max_abs(back - f) == 0.0);
  const auto h = Grid::halfline(1.0, 11);
  const auto z = ComplexField::from_function(h, [](double x) { return Complex(x, -x); });
  write_snapshot(dir / "ekfs_test_c.bin", z);
  const auto zb = std::get<ComplexField>(read_snapshot(dir / "ekfs_test_c.bin"));
  CHECK(max_abs(zb - z) == 0.0);
  write_csv(dir / "ekfs_test.csv", z);
  CHECK(std::filesystem::file_size(dir / "ekfs_test.csv") > 0);
}
