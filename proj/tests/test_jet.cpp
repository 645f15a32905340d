#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "eklab/jet.hpp"
#include "eklab/ops.hpp"

using namespace eklab;

namespace {

const Grid grid = Grid::periodic1d(2 * std::numbers::pi, 32);

ScalarJet random_jet(std::mt19937& rng, int order, double base = 0.0) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<ScalarField> c;
  for (int k = 0; k <= order; ++k) {
    const double a = U(rng), b = U(rng), p = U(rng);
    c.push_back(ScalarField::from_function(grid, [&](double x) { return (k == 0 ? base : 0.0) + a * std::sin(x + p) + b; }));
  }
  return ScalarJet(std::move(c));
}

double jet_diff(const ScalarJet& a, const ScalarJet& b) {
  double m = 0;
  for (int k = 0; k <= a.order(); ++k) m = std::max(m, max_abs(a[k] - b[k]));
  return m;
}

// Solves the Vandermonde system for the interpolating polynomial through (x_i, y_i).
std::vector<double> interpolating_poly(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) A[i][j] = std::pow(x[i], static_cast<double>(j));
    A[i][n] = y[i];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t j = c; j <= n; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = A[i][n] / A[i][i];
  return out;
}

}  // namespace

TEST_CASE("jet_mul truncates") {
  const auto a = ScalarField::from_function(grid, [](double x) { return std::cos(x); });
  const ScalarField one(grid, 1.0);
  const ScalarJet p({one, a}), m({one, -a});
  const auto r = jet_mul(p, m);
  CHECK(max_abs(r[0] - one) == 0.0);
  CHECK(max_abs(r[1]) == 0.0);
  const auto id = jet_mul(p, ScalarJet::constant(one, 1));
  CHECK(jet_diff(id, p) == 0.0);
}

TEST_CASE("jet_mul rejects mismatched jets") {
  const ScalarField one(grid, 1.0), other(Grid::periodic1d(1.0, 32), 1.0);
  CHECK_THROWS_AS(jet_mul(ScalarJet::constant(one, 1), ScalarJet::constant(one, 2)), Error);
  CHECK_THROWS_AS(jet_mul(ScalarJet::constant(one, 1), ScalarJet::constant(other, 1)), Error);
  CHECK_THROWS_AS(ScalarJet({one, other}), Error);
}

TEST_CASE("jet_mul agrees with the evaluate-and-refit oracle") {
  std::mt19937 rng(3);
  const int N = 2;
  const auto a = random_jet(rng, N), b = random_jet(rng, N);
  const auto p = jet_mul(a, b);
  const std::vector<double> eps{-0.4, -0.2, 0.1, 0.3, 0.5};
  std::vector<ScalarField> prod;
  for (double e : eps) prod.push_back(a.evaluate(e) * b.evaluate(e));
  double err = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> y;
    for (const auto& f : prod) y.push_back(f[i]);
    const auto c = interpolating_poly(eps, y);
    for (int k = 0; k <= N; ++k) err = std::max(err, std::abs(c[k] - p[k][i]));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("ring axioms at fixed truncation") {
  std::mt19937 rng(11);
  const auto a = random_jet(rng, 3), b = random_jet(rng, 3), c = random_jet(rng, 3);
  CHECK(jet_diff(jet_mul(jet_mul(a, b), c), jet_mul(a, jet_mul(b, c))) < 1e-12);
  CHECK(jet_diff(jet_mul(a, b + c), jet_mul(a, b) + jet_mul(a, c)) < 1e-12);
  CHECK(jet_diff(jet_mul(a, b), jet_mul(b, a)) < 1e-12);
}

TEST_CASE("jet_compose basics") {
  const ScalarField one(grid, 1.0);
  const auto sq = SmoothMap::polynomial({0, 0, 1});
  const auto r = jet_compose(sq, ScalarJet({one, one, ScalarField(grid)}));
  CHECK(max_abs(r[0] - 1.0) < 1e-15);
  CHECK(max_abs(r[1] - 2.0) < 1e-15);
  CHECK(max_abs(r[2] - 1.0) < 1e-15);

  const auto e = SmoothMap::exponential();
  const auto c = jet_compose(e, ScalarJet::constant(ScalarField(grid, 0.7), 3));
  CHECK(max_abs(c[0] - std::exp(0.7)) < 1e-15);
  for (int k = 1; k <= 3; ++k) CHECK(max_abs(c[k]) == 0.0);
}

TEST_CASE("jet_compose matches finite differences in eps") {
  std::mt19937 rng(5);
  const auto a = random_jet(rng, 2);
  const auto e = SmoothMap::exponential();
  const auto c = jet_compose(e, a);
  const double h = 1e-3;
  auto G = [&](double eps) { return a.evaluate(eps).map([](double v) { return std::exp(v); }); };
  const auto gp = G(h), g0 = G(0), gm = G(-h);
  const auto d1 = (gp - gm) * (1 / (2 * h));
  const auto d2 = (gp - 2.0 * g0 + gm) * (0.5 / (h * h));
  CHECK(max_abs(c[0] - g0) < 1e-12);
  CHECK(max_abs(c[1] - d1) < 1e-6 * std::max(1.0, max_abs(d1)));
  CHECK(max_abs(c[2] - d2) < 1e-6 * std::max(1.0, max_abs(d2)));
}

TEST_CASE("jet_compose respects composition") {
  std::mt19937 rng(9);
  const auto a = random_jet(rng, 4);
  const auto cube = SmoothMap::power(1.0, 3.0);
  SmoothMap e3 = SmoothMap::exponential();
  e3.eval = [](double x, int k) { return std::pow(3.0, k) * std::exp(3 * x); };
  CHECK(jet_diff(jet_compose(e3, a), jet_compose(cube, jet_compose(SmoothMap::exponential(), a))) < 1e-10);
}

TEST_CASE("jet_compose reports nodes outside the validity interval") {
  const auto a = ScalarJet::constant(ScalarField::from_function(grid, [](double x) { return std::sin(x); }), 2);
  try {
    (void)jet_compose(CapillarityLaw::quantum().as_map(), a);
    FAIL("expected domain error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::domain);
    CHECK(std::string(err.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("EK residual of the constant state vanishes") {
  const auto g2 = Grid::periodic2d(2 * std::numbers::pi, 2 * std::numbers::pi, 16, 16);
  const int N = 3;
  const auto rho = ScalarJet::constant(ScalarField(g2, 1.0), N);
  const auto u = VectorJet::zero(VectorField(g2), N);
  const auto r = ek_residual_jet(rho, u, Laws{}, ScalarJet::zero(ScalarField(g2), N), u);
  for (int k = 0; k <= N; ++k) {
    CHECK(max_abs(r.mass[k]) < 1e-14);
    CHECK(max_abs(r.momentum[k][0]) < 1e-14);
    CHECK(max_abs(r.momentum[k][1]) < 1e-14);
  }
}

TEST_CASE("EK residual on an Euler state isolates the capillary operator") {
  using std::cos, std::sin;
  const int N = 2;
  auto rho0 = [](double x) { return 1 + 0.2 * sin(x); };
  auto r1 = [](double x) { return 0.2 * cos(x); };
  auto r2 = [](double x) { return -0.2 * sin(x); };
  auto r3 = [](double x) { return -0.2 * cos(x); };
  auto u0 = [](double x) { return 0.1 * cos(x); };
  auto u1 = [](double x) { return -0.1 * sin(x); };
  const auto rho = ScalarJet::constant(ScalarField::from_function(grid, rho0), N);
  const auto u = VectorJet::constant(VectorField({ScalarField::from_function(grid, u0)}), N);
  const auto rho_t = ScalarJet::constant(
      ScalarField::from_function(grid, [&](double x) { return -(r1(x) * u0(x) + rho0(x) * u1(x)); }), N);
  const auto u_t = VectorJet::constant(
      VectorField({ScalarField::from_function(grid, [&](double x) { return -u0(x) * u1(x) - r1(x); })}), N);
  const auto r = ek_residual_jet(rho, u, Laws{}, rho_t, u_t);
  CHECK(max_abs(r.mass[0]) < 1e-12);
  CHECK(max_abs(r.momentum[0][0]) < 1e-12);
  CHECK(max_abs(r.mass[1]) + max_abs(r.momentum[1][0]) < 1e-12);
  // d/dx (rho''/rho - rho'^2 / (2 rho^2)) for K = 1/rho.
  const auto cap = ScalarField::from_function(grid, [&](double x) {
    const double p = rho0(x);
    return r3(x) / p - 2 * r1(x) * r2(x) / (p * p) + std::pow(r1(x), 3) / (p * p * p);
  });
  CHECK(max_abs(r.momentum[2][0] + cap) < 1e-11);
}

TEST_CASE("EK residual is linear in the time-derivative inputs") {
  std::mt19937 rng(2);
  const int N = 2;
  const auto rho = random_jet(rng, N, 2.0);
  const auto uj = random_jet(rng, N);
  const auto u = uj.map([](const ScalarField& f) { return VectorField({f}); });
  const auto a = random_jet(rng, N), b = random_jet(rng, N);
  const auto va = a.map([](const ScalarField& f) { return VectorField({f}); });
  const auto vb = b.map([](const ScalarField& f) { return VectorField({f}); });
  const auto zs = ScalarJet::zero(a[0], N);
  const auto zv = VectorJet::zero(va[0], N);
  const Laws laws{PressureLaw::polytropic(2.0), CapillarityLaw::quantum()};
  const auto r0 = ek_residual_jet(rho, u, laws, zs, zv);
  const auto ra = ek_residual_jet(rho, u, laws, a, va);
  const auto rab = ek_residual_jet(rho, u, laws, a + 2.0 * b, va + 2.0 * vb);
  const auto rb = ek_residual_jet(rho, u, laws, b, vb);
  for (int k = 0; k <= N; ++k) {
    CHECK(max_abs(rab.mass[k] - ra.mass[k] - 2.0 * (rb.mass[k] - r0.mass[k])) < 1e-12);
    CHECK(max_abs(rab.momentum[k][0] - ra.momentum[k][0] - 2.0 * (rb.momentum[k][0] - r0.momentum[k][0])) < 1e-12);
  }
}

TEST_CASE("jet serialization round trip") {
  std::mt19937 rng(1);
  const auto a = random_jet(rng, 3);
  const auto dir = std::filesystem::temp_directory_path() / "eklab_jet_test";
  write_jet(dir, a);
  CHECK(jet_diff(read_scalar_jet(dir), a) == 0.0);
  const auto v = a.map([](const ScalarField& f) { return VectorField({f}); });
  write_jet(dir / "v", v);
  const auto back = read_vector_jet(dir / "v");
  CHECK(back.order() == 3);
  CHECK(max_abs(back[2][0] - v[2][0]) == 0.0);
}
