#include "eklab/bkw.hpp"

#include <algorithm>
#include <cmath>

#include "eklab/ops.hpp"
#include "eklab/stencil.hpp"

namespace eklab {

namespace {

bool is_halfline(const Grid& g) { return g.kind() == GridKind::halfline_1d; }

double min_gprime(const ScalarField& rho, const PressureLaw& g) {
  double m = std::numeric_limits<double>::infinity();
  for (double r : rho.values()) m = std::min(m, g.g(r, 1));
  return m;
}

double hyperbolic_dt(const FluidState& s, const PressureLaw& g, double safety) {
  double vmax = 0.0;
  for (int a = 0; a < s.u.dim(); ++a) vmax = std::max(vmax, max_abs(s.u[a]));
  double cmax = 0.0;
  for (double r : s.rho.values()) cmax = std::max(cmax, std::sqrt(std::max(g.sound_speed2(r), 0.0)));
  double h = s.grid().spacing();
  for (int a = 1; a < s.grid().dim(); ++a) h = std::min(h, s.grid().length(a) / static_cast<double>(s.grid().points(a)));
  return safety * h / (vmax + cmax);
}

void check_state(const FluidState& s, const PressureLaw& g, double alpha, const History& partial) {
  if (!s.rho.all_finite() || !s.u.all_finite()) throw NumericalAbort(ErrorKind::instability, "non-finite values", s.t);
  if (min_value(s.rho) <= 0.0) throw NumericalAbort(ErrorKind::vacuum, "nonpositive density", s.t);
  const double m = min_gprime(s.rho, g);
  if (m < alpha)
    throw HyperbolicityLoss("min g'(rho) = " + std::to_string(m) + " below alpha = " + std::to_string(alpha), s.t,
                            partial);
}

void add_dissipation(ScalarField& df, const ScalarField& f, double sigma) {
  if (sigma <= 0.0) return;
  df -= derivative(f, 0, 4) * (sigma * std::pow(f.grid().spacing(), 3));
}

VectorField advect(const VectorField& by, const VectorField& v) {
  VectorField out(v.grid());
  for (int a = 0; a < v.dim(); ++a)
    for (int b = 0; b < v.dim(); ++b) out[a] += by[b] * derivative(v[a], b, 1);
  return out;
}

FluidState combine(const FluidState& s, const std::vector<std::pair<double, const FluidState*>>& terms, double t) {
  FluidState out = s;
  for (const auto& [c, k] : terms) {
    out.rho += k->rho * c;
    out.u += k->u * c;
  }
  out.t = t;
  return out;
}

template <class Rhs, class Fix>
FluidState rk4(const FluidState& s, double h, Rhs&& rhs, Fix&& fix) {
  const FluidState k1 = rhs(s);
  FluidState s2 = combine(s, {{0.5 * h, &k1}}, s.t + 0.5 * h);
  fix(s2);
  const FluidState k2 = rhs(s2);
  FluidState s3 = combine(s, {{0.5 * h, &k2}}, s.t + 0.5 * h);
  fix(s3);
  const FluidState k3 = rhs(s3);
  FluidState s4 = combine(s, {{h, &k3}}, s.t + h);
  fix(s4);
  const FluidState k4 = rhs(s4);
  FluidState out = combine(s, {{h / 6, &k1}, {h / 3, &k2}, {h / 3, &k3}, {h / 6, &k4}}, s.t + h);
  fix(out);
  return out;
}

FluidState euler_rhs_periodic(const FluidState& q, const PressureLaw& g) {
  // q.u holds the momentum m = rho u.
  const Grid& grid = q.grid();
  const int d = grid.dim();
  FluidState k{ScalarField(grid), VectorField(grid), q.t};
  k.rho = -divergence(q.u);
  const ScalarField p = q.rho.map([&](double r) { return r * g.g(r) - g.G(r); });
  for (int a = 0; a < d; ++a) {
    ScalarField acc = -derivative(p, a, 1);
    for (int b = 0; b < d; ++b) acc -= derivative(q.u[a] * q.u[b] / q.rho, b, 1);
    k.u[a] = acc;
  }
  return k;
}

// Diagonal-norm SBP first derivative, 4th order inside and 2nd order in the closures.
ScalarField sbp_dx(const ScalarField& f) {
  static constexpr double D[4][6] = {{-24.0 / 17, 59.0 / 34, -4.0 / 17, -3.0 / 34, 0, 0},
                                     {-0.5, 0, 0.5, 0, 0, 0},
                                     {4.0 / 43, -59.0 / 86, 0, 59.0 / 86, -4.0 / 43, 0},
                                     {3.0 / 98, 0, -59.0 / 98, 0, 32.0 / 49, -4.0 / 49}};
  const std::size_t n = f.size();
  if (n < 12) throw Error(ErrorKind::shape, "too few half-line nodes");
  const double ih = 1.0 / f.grid().spacing();
  ScalarField out(f.grid());
  for (std::size_t i = 4; i + 4 < n; ++i)
    out[i] = ih * ((f[i - 2] - f[i + 2]) / 12.0 + 2.0 * (f[i + 1] - f[i - 1]) / 3.0);
  for (std::size_t i = 0; i < 4; ++i) {
    double l = 0.0, r = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      l += D[i][j] * f[j];
      r += D[i][j] * f[n - 1 - j];
    }
    out[i] = ih * l;
    out[n - 1 - i] = -ih * r;
  }
  return out;
}

// Centred derivative with ghost values f(-x) = parity f(x) at the wall.
ScalarField reflect_dx(const ScalarField& f, double parity) {
  ScalarField out = sbp_dx(f);
  const double ih = 1.0 / f.grid().spacing();
  auto at = [&](long j) { return j < 0 ? parity * f[static_cast<std::size_t>(-j)] : f[static_cast<std::size_t>(j)]; };
  for (long i = 0; i < 4; ++i) out[i] = ih * ((at(i - 2) - at(i + 2)) / 12.0 + 2.0 * (at(i + 1) - at(i - 1)) / 3.0);
  return out;
}

// Ghost values keep the dominant parity of f at the wall and add the
// Taylor terms of the other parity up to x^max_m. The lowest such term is
// given exactly when known, the rest come from one-sided stencils.
ScalarField ghost_dx(const ScalarField& f, double parity, std::optional<double> lowest, int max_m) {
  ScalarField out = sbp_dx(f);
  const double h = f.grid().spacing();
  constexpr int width = 8;
  std::vector<double> nodes(width);
  for (int j = 0; j < width; ++j) nodes[j] = j * h;
  const auto w = fornberg_weights(0.0, nodes, max_m);
  const int first = parity > 0 ? 1 : 0;
  std::vector<double> d(max_m + 1, 0.0);
  for (int m = first; m <= max_m; m += 2) {
    if (m == first && lowest) {
      d[m] = *lowest;
      continue;
    }
    for (int j = 0; j < width; ++j) d[m] += w[m][j] * f[j];
  }
  auto ghost = [&](int j) {
    const double x = j * h;
    double corr = 0.0;
    for (int m = first; m <= max_m; m += 2) corr += -2.0 * parity * d[m] * std::pow(x, m) / std::tgamma(m + 1.0);
    return parity * f[j] + corr;
  };
  auto at = [&](long j) { return j < 0 ? ghost(static_cast<int>(-j)) : f[static_cast<std::size_t>(j)]; };
  for (long i = 0; i < 4; ++i) out[i] = ((at(i - 2) - at(i + 2)) / 12.0 + 2.0 * (at(i + 1) - at(i - 1)) / 3.0) / h;
  return out;
}

FluidState euler_rhs_halfline(const FluidState& s, const PressureLaw& g, double sigma) {
  const Grid& grid = s.grid();
  FluidState k{ScalarField(grid), VectorField(grid), s.t};
  const ScalarField& u = s.u[0];
  k.rho = -reflect_dx(s.rho * u, -1.0);
  k.u[0] = -reflect_dx(u * u * 0.5 + s.rho.map([&](double r) { return g.g(r); }), 1.0);
  add_dissipation(k.rho, s.rho, sigma);
  add_dissipation(k.u[0], u, sigma);
  k.u[0][0] = 0.0;
  return k;
}

long step_count(double span, double dt) { return std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9))); }

}  // namespace

History solve_euler(const FluidState& data, double t_end, const PressureLaw& g, const EulerConfig& cfg) {
  const double span = t_end - data.t;
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 0.5 * min_gprime(data.rho, g);
  if (min_gprime(data.rho, g) < 2 * alpha * (1 - 1e-12))
    throw Error(ErrorKind::domain, "data violates g'(rho_0) >= 2 alpha");
  const double dt0 = cfg.dt > 0.0 ? cfg.dt : hyperbolic_dt(data, g, 0.5);
  const long n = step_count(span, dt0);
  const double h = span / static_cast<double>(n);
  History hist(data.t, h);
  hist.push(data);
  check_state(data, g, alpha, hist);
  const bool half = is_halfline(data.grid());
  if (half && data.grid().dim() != 1) throw Error(ErrorKind::dimension, "half-line Euler is 1-d");

  FluidState s = data;
  if (!half) {
    FluidState q = data;
    for (int a = 0; a < q.u.dim(); ++a) q.u[a] = data.rho * data.u[a];
    for (long i = 0; i < n; ++i) {
      q = rk4(q, h, [&](const FluidState& x) { return euler_rhs_periodic(x, g); }, [](FluidState&) {});
      q.t = data.t + static_cast<double>(i + 1) * h;
      s = q;
      for (int a = 0; a < s.u.dim(); ++a) s.u[a] = q.u[a] / q.rho;
      check_state(s, g, alpha, hist);
      hist.push(s);
    }
  } else {
    for (long i = 0; i < n; ++i) {
      s = rk4(s, h, [&](const FluidState& x) { return euler_rhs_halfline(x, g, cfg.dissipation); },
              [](FluidState& x) { x.u[0][0] = 0.0; });
      s.t = data.t + static_cast<double>(i + 1) * h;
      check_state(s, g, alpha, hist);
      hist.push(s);
    }
  }
  return hist;
}

ScalarJet BKWExpansion::rho_jet(std::size_t i) const {
  std::vector<ScalarField> c;
  for (const auto& h : interior) c.push_back(h[i].rho);
  return ScalarJet(std::move(c));
}

VectorJet BKWExpansion::u_jet(std::size_t i) const {
  std::vector<VectorField> c;
  for (const auto& h : interior) c.push_back(h[i].u);
  return VectorJet(std::move(c));
}

BKWExpansion solve_cascade(const std::vector<FluidState>& data, double t_end, const Laws& laws,
                           const EulerConfig& cfg) {
  if (data.empty()) throw Error(ErrorKind::shape, "cascade needs rank-0 data");
  const Grid& grid = data[0].grid();
  if (is_halfline(grid)) throw Error(ErrorKind::dimension, "solve_cascade is periodic; use solve_halfline_cascade");
  const int N = static_cast<int>(data.size()) - 1;
  const double t0 = data[0].t;
  const PressureLaw& g = laws.pressure;
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 0.5 * min_gprime(data[0].rho, g);
  const double dt0 = cfg.dt > 0.0 ? cfg.dt : hyperbolic_dt(data[0], g, 0.5);
  const long n = step_count(t_end - t0, dt0);
  const double h = (t_end - t0) / static_cast<double>(n);

  std::vector<ScalarField> rc;
  std::vector<VectorField> uc;
  for (const auto& d : data) {
    if (d.grid() != grid) throw Error(ErrorKind::shape, "cascade data on different grids");
    rc.push_back(d.rho);
    uc.push_back(d.u);
  }
  ScalarJet rho(rc);
  VectorJet u(uc);
  const ScalarJet zr = ScalarJet::zero(rc[0], N);
  const VectorJet zu = VectorJet::zero(uc[0], N);

  BKWExpansion ex;
  ex.N = N;
  ex.laws = laws;
  ex.T = t_end;
  ex.interior.assign(N + 1, History(t0, h));
  auto record = [&](double t) {
    for (int k = 0; k <= N; ++k) ex.interior[k].push(FluidState{rho[k], u[k], t});
    check_state(ex.interior[0].back(), g, alpha, ex.interior[0]);
  };
  auto rhs = [&](const ScalarJet& r, const VectorJet& v) {
    EkResidual res = ek_residual_jet(r, v, laws, zr, zu);
    return std::pair{-res.mass, -res.momentum};
  };
  record(t0);
  for (long i = 0; i < n; ++i) {
    const auto [a1, b1] = rhs(rho, u);
    const auto [a2, b2] = rhs(rho + a1 * (0.5 * h), u + b1 * (0.5 * h));
    const auto [a3, b3] = rhs(rho + a2 * (0.5 * h), u + b2 * (0.5 * h));
    const auto [a4, b4] = rhs(rho + a3 * h, u + b3 * h);
    rho += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6);
    u += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6);
    record(t0 + static_cast<double>(i + 1) * h);
  }
  return ex;
}

History cascade_forcing(int k, const std::vector<History>& lower, const Laws& laws) {
  if (k < 1) throw Error(ErrorKind::shape, "forcing is defined for ranks k >= 1");
  if (static_cast<int>(lower.size()) < k)
    throw Error(ErrorKind::dependency, "rank " + std::to_string(k) + " needs ranks 0.." + std::to_string(k - 1) +
                                           ", have " + std::to_string(lower.size()));
  const std::size_t n = lower[0].size();
  for (int j = 1; j < k; ++j)
    if (lower[j].size() != n) throw Error(ErrorKind::dependency, "lower ranks have different time meshes");
  History out(lower[0].t0(), lower[0].dt());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ScalarField> rc;
    std::vector<VectorField> uc;
    for (int j = 0; j < k; ++j) {
      rc.push_back(lower[j][i].rho);
      uc.push_back(lower[j][i].u);
    }
    rc.push_back(rc[0] * 0.0);
    uc.push_back(uc[0] * 0.0);
    const ScalarJet rho(rc);
    const VectorJet u(uc);
    const EkResidual res = ek_residual_jet(rho, u, laws, ScalarJet::zero(rc[0], k), VectorJet::zero(uc[0], k));
    FluidState f{res.mass[k] * -1.0, res.momentum[k] * -1.0, lower[0].time(i)};
    out.push(std::move(f));
  }
  return out;
}

History solve_linearized(const History& background, const History* forcing, const FluidState& data,
                         const PressureLaw& g, const LinearizedConfig& cfg) {
  if (background.empty()) throw Error(ErrorKind::dependency, "missing background history");
  if (data.grid() != background[0].grid()) throw Error(ErrorKind::shape, "data and background on different grids");
  if (forcing && forcing->size() != background.size())
    throw Error(ErrorKind::dependency, "forcing and background on different time meshes");
  const bool half = is_halfline(data.grid());
  if (cfg.boundary && !half) throw Error(ErrorKind::config, "boundary trace given on a periodic grid");
  const int sub = std::max(1, cfg.substeps);
  const double h = background.dt() / sub;
  const double t0 = background.t0();

  auto rhs = [&](const FluidState& s) {
    const FluidState b = background.at(s.t);
    const ScalarField gp = b.rho.map([&](double r) { return g.g(r, 1); });
    FluidState k{ScalarField(s.grid()), VectorField(s.grid()), s.t};
    if (half) {
      // the wall velocity equation fixes the slope of the momentum flux
      const double f2 = forcing ? forcing->at(s.t).u[0][0] : 0.0;
      const double bt = cfg.boundary ? cfg.boundary->rate(s.t) : 0.0;
      k.rho = -ghost_dx(s.rho * b.u[0] + b.rho * s.u[0], -1.0, std::nullopt, 2);
      k.u[0] = -ghost_dx(b.u[0] * s.u[0] + gp * s.rho, 1.0, f2 - bt, 3);
    } else {
      k.rho = -divergence(s.rho * b.u + b.rho * s.u);
      k.u = (advect(b.u, s.u) + advect(s.u, b.u)) * -1.0 - gradient(gp * s.rho);
    }
    if (forcing) {
      const FluidState f = forcing->at(s.t);
      k.rho += f.rho;
      k.u += f.u;
    }
    if (half) {
      add_dissipation(k.rho, s.rho, cfg.dissipation);
      add_dissipation(k.u[0], s.u[0], cfg.dissipation);
    }
    return k;
  };
  auto fix = [&](FluidState& s) {
    if (half) s.u[0][0] = cfg.boundary ? cfg.boundary->at(s.t) : 0.0;
  };

  FluidState s = data;
  s.t = t0;
  fix(s);
  History hist(t0, background.dt());
  hist.push(s);
  for (std::size_t i = 1; i < background.size(); ++i) {
    for (int j = 0; j < sub; ++j) {
      s = rk4(s, h, rhs, fix);
      s.t = t0 + (static_cast<double>(i - 1) + static_cast<double>(j + 1) / sub) * background.dt();
    }
    if (!s.rho.all_finite() || !s.u.all_finite())
      throw NumericalAbort(ErrorKind::instability, "linearized solve produced non-finite values", s.t);
    hist.push(s);
  }
  return hist;
}

BKWExpansion solve_halfline_cascade(const std::vector<FluidState>& data, double t_end, const Laws& laws,
                                    const std::vector<TimeSeries>& boundary, const EulerConfig& cfg) {
  if (data.empty()) throw Error(ErrorKind::shape, "cascade needs rank-0 data");
  if (!is_halfline(data[0].grid())) throw Error(ErrorKind::dimension, "solve_halfline_cascade needs a half-line grid");
  BKWExpansion ex;
  ex.N = 0;
  ex.laws = laws;
  ex.T = t_end;
  ex.interior.push_back(solve_euler(data[0], t_end, laws.pressure, cfg));
  for (std::size_t k = 1; k < data.size(); ++k) {
    std::optional<TimeSeries> b;
    if (k - 1 < boundary.size()) b = boundary[k - 1];
    extend_halfline_cascade(ex, data[k], b, cfg);
  }
  return ex;
}

void extend_halfline_cascade(BKWExpansion& ex, const FluidState& data, const std::optional<TimeSeries>& boundary,
                             const EulerConfig& cfg) {
  const int k = ex.N + 1;
  const History f = cascade_forcing(k, ex.interior, ex.laws);
  LinearizedConfig lc;
  lc.dissipation = cfg.dissipation;
  lc.boundary = boundary;
  ex.interior.push_back(solve_linearized(ex.interior[0], &f, data, ex.laws.pressure, lc));
  ex.N = k;
}

std::vector<ScalarField> potential_history(const BKWExpansion& ex, int k) {
  if (ex.grid().dim() != 1) throw Error(ErrorKind::dimension, "potentials are built in 1-d");
  if (k < 0 || k > ex.N) throw Error(ErrorKind::dependency, "rank not present");
  const Grid& grid = ex.grid();
  const std::size_t nx = grid.points(0);
  std::vector<double> x(nx);
  for (std::size_t j = 0; j < nx; ++j) x[j] = grid.coordinate(0, j);
  auto antiderivative = [&](const ScalarField& f) {
    std::vector<double> v(std::begin(f.values()), std::end(f.values()));
    const auto F = cumulative_integral(x, v);
    ScalarField out(grid);
    for (std::size_t j = 0; j < nx; ++j) out[j] = F[j];
    return out;
  };
  const History& rank = ex.interior[k];
  const History& bg = ex.interior[0];
  std::optional<History> forcing;
  if (k >= 1) forcing = cascade_forcing(k, std::vector<History>(ex.interior.begin(), ex.interior.begin() + k), ex.laws);
  const PressureLaw& g = ex.laws.pressure;

  const std::size_t nt = rank.size();
  std::vector<ScalarField> rate;
  for (std::size_t i = 0; i < nt; ++i) {
    const ScalarField& r0 = bg[i].rho;
    const ScalarField& u0 = bg[i].u[0];
    if (k == 0) {
      rate.push_back((u0 * u0 * 0.5 + r0.map([&](double r) { return g.g(r); })) * -1.0);
    } else {
      ScalarField gp = r0.map([&](double r) { return g.g(r, 1); });
      rate.push_back((u0 * rank[i].u[0] + gp * rank[i].rho) * -1.0 + antiderivative((*forcing)[i].u[0]));
    }
  }
  std::vector<double> tn(nt);
  for (std::size_t i = 0; i < nt; ++i) tn[i] = rank.time(i);
  std::vector<ScalarField> phi(nt, antiderivative(rank[0].u[0]));
  std::vector<double> col(nt);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t i = 0; i < nt; ++i) col[i] = rate[i][j];
    const auto F = cumulative_integral(tn, col);
    for (std::size_t i = 0; i < nt; ++i) phi[i][j] += F[i];
  }
  return phi;
}

FluidState assemble_interior(const BKWExpansion& ex, double eps, std::size_t i) {
  return FluidState{ex.rho_jet(i).evaluate(eps), ex.u_jet(i).evaluate(eps), ex.interior[0].time(i)};
}

namespace {

std::pair<ScalarField, VectorField> ek_residual_fields(const FluidState& s, const FluidState& dt, double eps,
                                                       const Laws& laws) {
  const ScalarField& rho = s.rho;
  ScalarField e1 = dt.rho + divergence(rho * s.u);
  const ScalarField K = rho.map([&](double r) { return laws.capillarity.K(r); });
  const ScalarField K1 = rho.map([&](double r) { return laws.capillarity.K(r, 1); });
  const VectorField gr = gradient(rho);
  const ScalarField cap = K * laplacian(rho) + 0.5 * K1 * dot(gr, gr);
  VectorField e2 = dt.u + advect(s.u, s.u) + gradient(rho.map([&](double r) { return laws.pressure.g(r); })) -
                   gradient(cap) * (eps * eps);
  return {std::move(e1), std::move(e2)};
}

}  // namespace

InteriorResidual interior_residual(const BKWExpansion& ex, double eps, std::size_t stride) {
  InteriorResidual out;
  out.eps = eps;
  stride = std::max<std::size_t>(1, stride);
  for (std::size_t i = 0; i < ex.steps(); i += stride) {
    const FluidState s = assemble_interior(ex, eps, i);
    FluidState d = ex.interior[0].time_derivative(i);
    double p = eps;
    for (int k = 1; k <= ex.N; ++k, p *= eps) {
      const FluidState dk = ex.interior[k].time_derivative(i);
      d.rho += dk.rho * p;
      d.u += dk.u * p;
    }
    const auto [e1, e2] = ek_residual_fields(s, d, eps, ex.laws);
    out.mass = std::max(out.mass, l2_norm(e1));
    out.momentum = std::max(out.momentum, l2_norm(e2));
  }
  return out;
}

ResidualReport residual_report(const BKWExpansion& ex, const std::vector<double>& eps, std::size_t stride) {
  ResidualReport r;
  std::vector<double> m, q;
  for (double e : eps) {
    r.samples.push_back(interior_residual(ex, e, stride));
    m.push_back(r.samples.back().mass);
    q.push_back(r.samples.back().momentum);
  }
  auto safe = [&](const std::vector<double>& v) {
    try {
      return fit_rate(eps, v);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  r.mass_order = safe(m);
  r.momentum_order = safe(q);
  return r;
}

std::vector<std::pair<double, double>> cascade_residual_coefficients(const BKWExpansion& ex, std::size_t stride) {
  std::vector<std::pair<double, double>> out(ex.N + 1, {0.0, 0.0});
  stride = std::max<std::size_t>(1, stride);
  for (std::size_t i = 0; i < ex.steps(); i += stride) {
    std::vector<ScalarField> rt;
    std::vector<VectorField> ut;
    for (const auto& h : ex.interior) {
      const FluidState d = h.time_derivative(i);
      rt.push_back(d.rho);
      ut.push_back(d.u);
    }
    const EkResidual res = ek_residual_jet(ex.rho_jet(i), ex.u_jet(i), ex.laws, ScalarJet(rt), VectorJet(ut));
    for (int k = 0; k <= ex.N; ++k) {
      out[k].first = std::max(out[k].first, l2_norm(res.mass[k]));
      out[k].second = std::max(out[k].second, l2_norm(res.momentum[k]));
    }
  }
  return out;
}

double fit_rate(const std::vector<double>& eps, const std::vector<double>& err) {
  if (eps.size() != err.size()) throw Error(ErrorKind::shape, "fit_rate: eps and errors differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (eps[i] > 0.0 && err[i] > 0.0 && std::isfinite(err[i])) {
      x.push_back(std::log(eps[i]));
      y.push_back(std::log(err[i]));
    }
  if (x.size() < 3) throw Error(ErrorKind::domain, "fit_rate needs at least three positive samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

bool CompatibilityReport::pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
}

CompatibilityReport compatibility_check(const std::vector<FluidState>& data, const Laws& laws, int depth, double tol) {
  if (data.empty()) throw Error(ErrorKind::shape, "no data ranks");
  if (!is_halfline(data[0].grid())) throw Error(ErrorKind::dimension, "compatibility is checked on half-line data");
  const int order = std::max(depth, static_cast<int>(data.size()) - 1);
  std::vector<ScalarField> rc;
  std::vector<VectorField> uc;
  for (int k = 0; k <= order; ++k) {
    if (k < static_cast<int>(data.size())) {
      rc.push_back(data[k].rho);
      uc.push_back(data[k].u);
    } else {
      rc.push_back(data[0].rho * 0.0);
      uc.push_back(data[0].u * 0.0);
    }
  }
  const ScalarJet rho(rc);
  const VectorJet u(uc);
  const EkResidual S = ek_residual_jet(rho, u, laws, ScalarJet::zero(rc[0], order), VectorJet::zero(uc[0], order));
  CompatibilityReport rep;
  auto add = [&](std::string name, double v) { rep.conditions.push_back({std::move(name), v, v <= tol}); };
  for (int k = 0; k <= depth; ++k) {
    const std::string e = " eps^" + std::to_string(k);
    add("order0 rho" + e, std::abs(rho[k][0] - (k == 0 ? 1.0 : 0.0)));
    add("order0 u" + e, std::abs(u[k][0][0]));
    add("order1 mass" + e, std::abs(S.mass[k][0]));
    add("order1 momentum" + e, std::abs(S.momentum[k][0][0]));
  }
  return rep;
}

}  // namespace eklab
