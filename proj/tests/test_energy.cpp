#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "doctest.h"
#include "eklab/energy.hpp"
#include "eklab/ops.hpp"
#include "eklab/trajectory.hpp"

using namespace eklab;
using std::numbers::pi;

namespace {

FluidState make_state(const Grid& g, const std::function<double(double)>& rho, const std::function<double(double)>& u) {
  return {ScalarField::from_function(g, rho), VectorField({ScalarField::from_function(g, u)}), 0.0};
}

std::vector<FluidState> run(const FluidState& s0, double T, double eps, const Laws& laws, double dt) {
  std::vector<FluidState> out;
  SolverConfig cfg;
  cfg.dt = dt;
  (void)advance_ek(s0, T, eps, laws, cfg, [&](const FluidState& s) { out.push_back(s); });
  return out;
}

std::vector<FluidState> run_halfline(const FluidState& s0, double T, double eps, const Laws& laws, double dt) {
  std::vector<FluidState> out;
  HalflineConfig cfg;
  cfg.dt = dt;
  (void)advance_ek_halfline(s0, T, eps, laws, cfg, [&](const FluidState& s) { out.push_back(s); });
  return out;
}

std::string state_hash(const FluidState& s) {
  std::string bytes;
  auto add = [&](const ScalarField& f) {
    bytes.append(reinterpret_cast<const char*>(&f.values()[0]), f.size() * sizeof(double));
  };
  add(s.rho);
  for (int i = 0; i < s.u.dim(); ++i) add(s.u[i]);
  return git_blob_hash(bytes);
}

const std::vector<Laws>& sample_laws() {
  static const std::vector<Laws> laws = {
      Laws{},
      Laws{PressureLaw::polytropic(2.0), CapillarityLaw::constant(0.5)},
      Laws{PressureLaw::polytropic(3.0), CapillarityLaw::schrodinger()},
      Laws{PressureLaw::gross_pitaevskii(), CapillarityLaw::power_law(1.0, 0.5)},
  };
  return laws;
}

}  // namespace

TEST_CASE("energy weights") {
  for (const auto& laws : sample_laws()) {
    for (int n : {0, 1, 2}) {
      const auto w = EnergyWeights::build(n, laws);
      CHECK(w.lo >= w.alpha);
      CHECK(w.hi < 1.0 / w.alpha);
      CHECK(w.lo < 1.0);
      CHECK(w.hi > 1.0);
      CHECK(w.theta(1.0) == doctest::Approx(1.0).epsilon(1e-15));
      for (int j = 0; j <= 40; ++j) {
        const double r = w.lo + (w.hi - w.lo) * j / 40.0;
        const double gp = laws.pressure.g(r, 1);
        CHECK(std::abs(-w.phi(r) * gp + w.psi(r) * r) <= 1e-14 * std::max(1.0, w.psi(r) * r));
        const double K = laws.capillarity.K(r), a = laws.capillarity.a(r);
        CHECK(std::abs(w.theta(r) * w.theta_prime(r) * a * std::sqrt(r / K) - w.phi(r)) <= 1e-12 * std::max(1.0, w.phi(r)));
        CHECK(w.theta(r) >= w.alpha - 1e-12);
        CHECK(gp >= w.alpha);
        const double h = 1e-5;
        if (r - h > w.lo && r + h < w.hi)
          CHECK(w.theta_prime(r) == doctest::Approx((w.theta(r + h) - w.theta(r - h)) / (2 * h)).epsilon(1e-7));
      }
    }
  }
  SUBCASE("closed forms of theta") {
    // a = 1 for K = 1/rho; a^2 = c rho for constant K.
    const auto q = EnergyWeights::build(2, Laws{});
    for (double r : {0.6, 0.9, 1.4, 3.0}) CHECK(q.theta(r) == doctest::Approx(std::sqrt(2 * r - 1)).epsilon(1e-13));
    const double c = 0.5;
    const auto k = EnergyWeights::build(1, Laws{PressureLaw::polytropic(2.0), CapillarityLaw::constant(c)});
    for (double r : {0.7, 1.3, 2.5})
      CHECK(k.theta(r) == doctest::Approx(std::sqrt(1 + 2 * c * (r * r - 1) / 2)).epsilon(1e-13));
  }
  SUBCASE("interval edges") {
    // GP with n = 0: theta^2 = 2 rho - 1 >= alpha^2 and g' = 1.
    const auto w = EnergyWeights::build(0, Laws{});
    CHECK(w.lo == doctest::Approx((1 + 0.01) / 2).epsilon(1e-10));
    CHECK(w.hi == doctest::Approx(10.0).epsilon(1e-10));
    CHECK_THROWS_AS(EnergyWeights::build(-1, Laws{}), Error);
  }
}

TEST_CASE("modified energy") {
  const double eps = 0.3;
  const auto g = Grid::periodic1d(2 * pi, 64);
  SUBCASE("equilibrium") {
    const auto rest = make_state(g, [](double) { return 1.0; }, [](double) { return 0.0; });
    for (const auto& laws : sample_laws())
      for (int n : {0, 1, 2}) CHECK(modified_energy(rest, eps, laws, n) == 0.0);
    const auto g2 = Grid::periodic2d(2 * pi, 2 * pi, 16, 16);
    FluidState r2{ScalarField(g2, 1.0), VectorField(g2), 0.0};
    CHECK(modified_energy(r2, eps, Laws{}, 1) == 0.0);
  }
  SUBCASE("n = 0 against direct quadrature") {
    const Laws laws{PressureLaw::polytropic(2.0), CapillarityLaw::constant(0.5)};
    auto rho = [](double x) { return 1 + 0.2 * std::cos(x) + 0.1 * std::sin(2 * x); };
    auto drho = [](double x) { return -0.2 * std::sin(x) + 0.2 * std::cos(2 * x); };
    auto u = [](double x) { return 0.3 * std::sin(x); };
    const auto s = make_state(g, rho, u);
    double ref = 0;
    for (std::size_t i = 0; i < g.points(); ++i) {
      const double x = g.coordinate(0, i), r = rho(x);
      const double w = eps * std::sqrt(0.5 / r) * drho(x);
      ref += 0.5 * (r * (u(x) * u(x) + w * w) + std::pow(r, 1.0) * (r - 1) * (r - 1));
    }
    ref *= g.spacing();
    CHECK(modified_energy(s, eps, laws, 0) == doctest::Approx(ref).epsilon(1e-12));
  }
  SUBCASE("single mode with frozen coefficients") {
    const double d = 1e-5;
    for (int k : {1, 3})
      for (int n : {0, 1, 2}) {
        const auto s = make_state(g, [&](double x) { return 1 + d * std::cos(k * x); },
                                  [&](double x) { return d * std::sin(k * x); });
        const double ref = 0.5 * std::pow(k, 4 * n) * pi * d * d * (2 + eps * eps * k * k);
        CHECK(modified_energy(s, eps, Laws{}, n) == doctest::Approx(ref).epsilon(1e-4));
      }
  }
  SUBCASE("solenoidal part in 2-d") {
    const auto g2 = Grid::periodic2d(2 * pi, 2 * pi, 16, 16);
    const double d = 1e-3;
    FluidState s{ScalarField(g2, 1.0),
                 VectorField({ScalarField::from_function(g2, [&](double, double y) { return d * std::sin(y); }),
                              ScalarField(g2)}),
                 0.0};
    for (int n : {0, 1}) CHECK(modified_energy(s, eps, Laws{}, n) == doctest::Approx(d * d * pi * pi).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const auto low = make_state(g, [](double x) { return 0.45 + 0.01 * std::cos(x); }, [](double) { return 0.0; });
    CHECK_THROWS_AS(modified_energy(low, eps, Laws{}, 0), Error);
    try {
      (void)modified_energy(low, eps, Laws{}, 0);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
    const auto h = make_state(Grid::halfline(10, 101), [](double) { return 1.0; }, [](double) { return 0.0; });
    CHECK_THROWS_AS(modified_energy(h, eps, Laws{}, 0), Error);
  }
  SUBCASE("nonnegative and zero only at rest") {
    for (double amp : {1e-3, 0.1, 0.3}) {
      const auto s = make_state(g, [&](double x) { return 1 + amp * std::cos(x); }, [](double) { return 0.0; });
      for (int n : {0, 1, 2}) CHECK(modified_energy(s, eps, Laws{}, n) > 0.0);
    }
  }
}

TEST_CASE("physical energy") {
  const double eps = 0.5;
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto rest = make_state(g, [](double) { return 1.0; }, [](double) { return 0.0; });
  CHECK(physical_energy(rest, eps, Laws{}) == 0.0);
  const auto gp = PressureLaw::gross_pitaevskii();
  for (double r : {0.3, 0.9, 1.0, 1.7, 4.0}) CHECK(gp.G(r) == doctest::Approx((r - 1) * (r - 1) / 2).epsilon(1e-14));

  const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x); }, [](double x) { return 0.1 * std::sin(x); });
  const auto traj = run(s0, 1.0, eps, Laws{}, 2e-3);
  const double e0 = physical_energy(traj.front(), eps, Laws{});
  double drift = 0;
  for (const auto& s : traj) drift = std::max(drift, std::abs(physical_energy(s, eps, Laws{}) - e0) / e0);
  CHECK(drift <= 1e-7);
}

TEST_CASE("norm equivalence probe") {
  const double eps = 0.3;
  const auto g = Grid::periodic1d(2 * pi, 64);
  SUBCASE("constant-coefficient limit") {
    for (int k : {1, 2})
      for (int n : {1, 2}) {
        const double d = 1e-5;
        const auto s0 = make_state(g, [&](double x) { return 1 + d * std::cos(k * x); }, [](double) { return 0.0; });
        const auto traj = run(s0, 0.2, eps, Laws{}, 0.01);
        const auto p = norm_equivalence_probe(traj, eps, Laws{}, n);
        const double ref = (1 + std::pow(k, 4 * n)) / (2 * std::pow(1 + k * k, 2 * n));
        CHECK(p.c_est == doctest::Approx(ref).epsilon(1e-4));
        CHECK(p.C_est == doctest::Approx(ref).epsilon(1e-4));
        CHECK(p.hypotheses_ok);
      }
  }
  SUBCASE("holdout containment") {
    const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x) + 0.05 * std::sin(2 * x); },
                               [](double x) { return 0.1 * std::cos(3 * x); });
    const auto traj = run(s0, 2.0, eps, Laws{}, 0.005);
    const auto p = norm_equivalence_probe(traj, eps, Laws{}, 1);
    CHECK(p.c_est > 0.0);
    CHECK(std::isfinite(p.C_est));
    CHECK(p.c_est <= p.C_est);
    CHECK(p.contained(0.01));
    CHECK(p.ratios.size() == traj.size());
  }
  SUBCASE("zero-norm instants are skipped") {
    const auto rest = make_state(g, [](double) { return 1.0; }, [](double) { return 0.0; });
    const auto p = norm_equivalence_probe({rest, rest, rest}, eps, Laws{}, 1);
    CHECK(p.skipped == 3);
    CHECK(p.ratios.empty());
  }
  SUBCASE("hypothesis violation is flagged") {
    const auto steep = make_state(g, [](double x) { return 1 + 0.4 * std::cos(30 * x); }, [](double) { return 0.0; });
    const auto p = norm_equivalence_probe({steep}, eps, Laws{}, 1);
    CHECK_FALSE(p.hypotheses_ok);
    CHECK(p.c_est > 0.0);
  }
}

TEST_CASE("energy rate monitor") {
  const auto g = Grid::periodic1d(2 * pi, 128);
  const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x); }, [](double x) { return 0.1 * std::sin(2 * x); });
  SUBCASE("equilibrium") {
    const auto rest = make_state(g, [](double) { return 1.0; }, [](double) { return 0.0; });
    std::vector<FluidState> traj;
    for (int i = 0; i < 6; ++i) {
      traj.push_back(rest);
      traj.back().t = 0.1 * i;
    }
    const auto m = energy_rate_monitor(traj, 0.1, Laws{}, 1);
    CHECK(m.skipped == 2);
    CHECK(m.ratio.empty());
  }
  SUBCASE("eps sweep") {
    std::vector<double> peaks;
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto m = energy_rate_monitor(run(s0, 0.5, eps, Laws{}, 1e-3), eps, Laws{}, 1);
      CHECK(m.skipped == 0);
      peaks.push_back(m.max_abs_ratio);
    }
    const double hi = *std::max_element(peaks.begin(), peaks.end());
    const double lo = *std::min_element(peaks.begin(), peaks.end());
    CHECK(lo > 0.0);
    CHECK(hi / lo < 3.0);
    const auto euler = energy_rate_monitor(run(s0, 0.5, 0.0, Laws{}, 1e-3), 0.0, Laws{}, 1);
    CHECK(std::isfinite(euler.max_abs_ratio));
    CHECK(euler.max_abs_ratio < 3.0 * hi);
  }
  SUBCASE("short or uneven history") {
    CHECK_THROWS_AS(energy_rate_monitor({s0, s0}, 0.1, Laws{}, 1), Error);
  }
}

TEST_CASE("difference energy") {
  const double eps = 0.2;
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x); }, [](double x) { return 0.05 * std::sin(x); });
  const auto exact = run(s0, 0.5, eps, Laws{}, 5e-3);
  SUBCASE("identical trajectories") {
    const auto m = difference_energy_monitor(exact, exact, eps, Laws{}, 1);
    for (double e : m.energy) CHECK(e == 0.0);
    CHECK(m.Lambda == 0.0);
    CHECK(m.source == 0.0);
    CHECK_FALSE(m.resampled);
  }
  SUBCASE("fixed perturbation") {
    auto shifted = [&](double d) {
      auto a = exact;
      for (auto& s : a) s.u[0] += ScalarField::from_function(g, [&](double x) { return d * std::cos(x); });
      return a;
    };
    const double d = 1e-3;
    const auto m = difference_energy_monitor(exact, shifted(d), eps, Laws{}, 0);
    for (std::size_t i = 0; i < exact.size(); i += 10) {
      double ref = 0;
      for (std::size_t j = 0; j < g.points(); ++j) ref += exact[i].rho[j] * std::pow(d * std::cos(g.coordinate(0, j)), 2);
      ref *= 0.5 * g.spacing();
      CHECK(m.energy[i] == doctest::Approx(ref).epsilon(1e-10));
    }
    const auto m2 = difference_energy_monitor(exact, shifted(2 * d), eps, Laws{}, 1);
    const auto m1 = difference_energy_monitor(exact, shifted(d), eps, Laws{}, 1);
    CHECK(m2.energy.back() / m1.energy.back() == doctest::Approx(4.0).epsilon(1e-10));
  }
  SUBCASE("resampling") {
    std::vector<FluidState> coarse;
    for (std::size_t i = 0; i < exact.size(); i += 2) coarse.push_back(exact[i]);
    const auto m = difference_energy_monitor(exact, coarse, eps, Laws{}, 0);
    CHECK(m.resampled);
    CHECK(m.interpolation_error > 0.0);
    CHECK(m.interpolation_error < 1e-6);
    double peak = 0;
    for (double e : m.energy) peak = std::max(peak, e);
    CHECK(peak < 1e-10);

    const auto fine = run(FluidState{ScalarField::from_function(Grid::periodic1d(2 * pi, 128), [](double x) { return 1 + 0.1 * std::cos(x); }),
                                     VectorField({ScalarField::from_function(Grid::periodic1d(2 * pi, 128), [](double x) { return 0.05 * std::sin(x); })}),
                                     0.0},
                          0.5, eps, Laws{}, 5e-3);
    const auto ms = difference_energy_monitor(exact, fine, eps, Laws{}, 0);
    CHECK(ms.resampled);
    CHECK(ms.interpolation_error < 1e-8);
    CHECK(ms.energy.back() < 1e-12);
  }
  SUBCASE("gronwall fit") {
    std::vector<double> t, e;
    for (int i = 0; i <= 20; ++i) {
      t.push_back(0.1 * i);
      e.push_back(2.0 * std::exp(0.5 * t.back()));
    }
    auto [lam, src] = gronwall_fit(t, e);
    CHECK(lam == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(src == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    for (auto& v : e) v = 3.0 - 0.1 * v;
    std::tie(lam, src) = gronwall_fit(t, e);
    CHECK(lam == 0.0);
    CHECK(src == 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = 1.0 + t[i];
    std::tie(lam, src) = gronwall_fit(t, e);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] <= (e[0] + src) * std::exp(lam * t[i]) * (1 + 1e-12));
  }
}

TEST_CASE("tangential energy on the half-line") {
  const Laws laws;
  const auto g = Grid::halfline(20.0, 401);
  auto bump = [](double x) { return 1 + 0.05 * std::exp(-std::pow(x - 10.0, 2)); };
  SUBCASE("equilibrium") {
    const auto rest = make_state(g, [](double) { return 1.0; }, [](double) { return 0.0; });
    std::vector<FluidState> traj(8, rest);
    for (std::size_t i = 0; i < traj.size(); ++i) traj[i].t = 1e-3 * static_cast<double>(i);
    for (int a0 : {0, 1}) {
      const auto r = tangential_energy(traj, 0.5, laws, a0);
      for (double e : r.energy) CHECK(e == 0.0);
    }
  }
  SUBCASE("alpha = 0 is the quadratic energy") {
    const auto s = make_state(g, bump, [](double x) { return 0.02 * std::exp(-std::pow(x - 10.0, 2)); });
    const auto r = tangential_energy({s}, 0.5, laws, 0);
    const auto z = to_z(s, 0.5, laws);
    const ScalarField dens = 0.5 * (s.rho * (s.u[0] * s.u[0] + z.w[0] * z.w[0]) + (s.rho - 1.0) * (s.rho - 1.0));
    CHECK(r.energy[0] == doctest::Approx(integrate(dens)).epsilon(1e-13));
  }
  SUBCASE("normal derivative reconstruction") {
    std::vector<double> amp;
    for (double eps : {0.5, 0.25}) {
      const auto s0 = make_state(g, bump, [](double) { return 0.0; });
      const auto traj = run_halfline(s0, 0.02, eps, laws, 1e-3);
      const auto r = tangential_energy(traj, eps, laws, 1);
      CHECK(r.reconstruction_error <= 1e-4);
      CHECK(r.energy.size() == traj.size());
      amp.push_back(r.amplification);
    }
    CHECK(amp[1] / amp[0] == doctest::Approx(2.0).epsilon(1e-2));
  }
  SUBCASE("history too short") {
    const auto s0 = make_state(g, bump, [](double) { return 0.0; });
    const auto traj = run_halfline(s0, 0.004, 0.5, laws, 1e-3);
    try {
      (void)tangential_energy(traj, 0.5, laws, 2);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::history_too_short);
    }
  }
}

TEST_CASE("monitors are pure observers") {
  const double eps = 0.2;
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x); }, [](double x) { return 0.05 * std::sin(x); });
  SolverConfig cfg;
  cfg.dt = 5e-3;
  const auto bare = advance_ek(s0, 0.2, eps, Laws{}, cfg);
  std::vector<FluidState> seen;
  const auto watched = advance_ek(s0, 0.2, eps, Laws{}, cfg, [&](const FluidState& s) {
    seen.push_back(s);
    (void)modified_energy(s, eps, Laws{}, 1);
    (void)physical_energy(s, eps, Laws{});
  });
  const auto before = state_hash(seen.back());
  (void)energy_audit(seen, eps, Laws{}, 1, &seen);
  CHECK(state_hash(bare) == state_hash(watched));
  CHECK(state_hash(seen.back()) == before);
}

TEST_CASE("energy report output") {
  const double eps = 0.2;
  const auto g = Grid::periodic1d(2 * pi, 64);
  const auto s0 = make_state(g, [](double x) { return 1 + 0.1 * std::cos(x); }, [](double) { return 0.0; });
  const auto traj = run(s0, 0.1, eps, Laws{}, 5e-3);
  const auto rep = energy_audit(traj, eps, Laws{}, 1, &traj);
  CHECK(rep.t.size() == traj.size());
  CHECK(rep.Xn.size() == traj.size());
  CHECK(rep.ratio.size() == traj.size() - 4);
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    CHECK(std::isfinite(rep.E0[i]));
    CHECK(std::isfinite(rep.En[i]));
    if (i) CHECK(rep.t[i] > rep.t[i - 1]);
  }
  const auto dir = std::filesystem::temp_directory_path() / "eklab_energy_test";
  std::filesystem::create_directories(dir);
  rep.write_csv(dir / "energy.csv");
  rep.write_json(dir / "energy.json");
  std::ifstream csv(dir / "energy.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,E0,En,Etilde,Xn,ratio");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == traj.size());
  std::ifstream js(dir / "energy.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j.at("c_est").get<double>() == doctest::Approx(rep.c_est));
  CHECK(j.at("n").get<int>() == 1);
}
