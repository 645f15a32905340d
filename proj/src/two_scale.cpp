#include "eklab/two_scale.hpp"

#include <cmath>
#include <fstream>

#include "eklab/ops.hpp"

namespace eklab {

namespace {

using V = std::valarray<double>;

V time_derivative(const std::vector<V>& h, std::size_t i, double dt) {
  constexpr int width = 5;
  if (h.size() < width) throw Error(ErrorKind::history_too_short, "layer history shorter than the time stencil");
  long s = static_cast<long>(i) - width / 2;
  s = std::clamp<long>(s, 0, static_cast<long>(h.size()) - width);
  std::vector<double> nodes(width);
  for (int j = 0; j < width; ++j) nodes[j] = static_cast<double>(s + j);
  const auto w = fornberg_weights(static_cast<double>(i), nodes, 1)[1];
  V out(0.0, h[i].size());
  for (int j = 0; j < width; ++j) out += (h[s + j] - h[i]) * (w[j] / dt);
  return out;
}

std::vector<double> coordinates(const Grid& g) {
  std::vector<double> x(g.points(0));
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = g.coordinate(0, j);
  return x;
}

double boundary_derivative(const ScalarField& f, const std::vector<double>& x, int m) {
  return interpolate(x, std::span<const double>(std::begin(f.values()), f.size()), 0.0, m, 8);
}

NodeJet down(const NodeJet& a, int m) {
  std::vector<V> c;
  for (int n = 0; n <= a.order(); ++n) c.push_back(n + m <= a.order() ? a[n + m] : V(0.0, a[0].size()));
  return NodeJet(std::move(c));
}

double sup_abs(const V& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Jets on the layer nodes at one time, built from the ranks known so far.
struct LayerJets {
  const TwoScaleExpansion& ex;
  std::size_t i;
  int order;
  V zeta;
  std::vector<double> x;

  LayerJets(const TwoScaleExpansion& e, std::size_t idx, int ord)
      : ex(e), i(idx), order(ord), zeta(e.grid.zeta()), x(coordinates(e.interior.grid())) {}

  V zero() const { return V(0.0, zeta.size()); }

  // sum_k eps^k f^k(eps zeta) expanded: coefficient n = sum_{k+m=n} zeta^m/m! d^m f^k(0).
  NodeJet taylor(int known, bool velocity) const {
    std::vector<V> c(order + 1, zero());
    for (int k = 0; k < known && k <= order; ++k) {
      const ScalarField& f = velocity ? ex.interior.interior[k][i].u[0] : ex.interior.interior[k][i].rho;
      V zm(1.0, zeta.size());
      double fact = 1.0;
      for (int m = 0; k + m <= order; ++m) {
        if (m > 0) {
          zm *= zeta;
          fact *= m;
        }
        c[k + m] += zm * (boundary_derivative(f, x, m) / fact);
      }
    }
    return NodeJet(std::move(c));
  }

  NodeJet profiles(const std::vector<std::vector<V>>& p, int known, int deriv, bool dt_flag) const {
    std::vector<V> c(order + 1, zero());
    for (int k = 0; k < known && k <= order && k < static_cast<int>(p.size()); ++k) {
      V v = dt_flag ? time_derivative(p[k], i, ex.dt()) : p[k][i];
      c[k] = deriv > 0 ? ex.grid.derivative(v, deriv) : v;
    }
    return NodeJet(std::move(c));
  }

  NodeJet d(const NodeJet& a, int m) const {
    return a.map([&](const V& v) -> V { return ex.grid.derivative(v, m); });
  }

  NodeJet bohm(const NodeJet& rho) const {
    const NodeJet inv = jet_compose(SmoothMap::power(1.0, -1.0), rho);
    const NodeJet r1 = d(rho, 1), r2 = d(rho, 2);
    return (jet_mul(r2, inv) - jet_mul(jet_mul(r1, r1), jet_mul(inv, inv)) * 0.5) * ex.c;
  }

  // eps^2 times the layer mass residual, as eps^2 R_t + d_zeta J.
  NodeJet flux(int ranks, int Rknown, int Phiknown) const {
    const NodeJet rho = taylor(ranks, false), u = taylor(ranks, true);
    const NodeJet R = profiles(ex.R, Rknown, 0, false);
    const NodeJet Pz = profiles(ex.Phi, Phiknown, 1, false);
    return jet_mul(R.shift(1), u) + jet_mul(rho + R, Pz);
  }

  // Layer part of phi_t + u^2/2 + g(rho) - Bohm(rho).
  NodeJet momentum(int ranks, int Rknown, int Phiknown, const PressureLaw& g) const {
    const NodeJet rho = taylor(ranks, false), u = taylor(ranks, true);
    const NodeJet R = profiles(ex.R, Rknown, 0, false);
    const NodeJet Pz = profiles(ex.Phi, Phiknown, 1, false);
    const NodeJet Pt = profiles(ex.Phi, Phiknown, 0, true);
    const SmoothMap gm = g.as_map();
    const NodeJet tot = rho + R;
    return Pt + down(jet_mul(u, Pz), 1) + down(jet_mul(Pz, Pz), 2) * 0.5 + jet_compose(gm, tot) -
           jet_compose(gm, rho) - (bohm(tot) - bohm(rho));
  }
};

double capillary_constant(const CapillarityLaw& K) {
  if (K.exponent() != -1.0) throw Error(ErrorKind::config, "two-scale expansion needs K = c / rho");
  return K.coefficient();
}

}  // namespace

LayerProfile TwoScaleExpansion::R_profile(int k, std::size_t i) const {
  LayerProfile p{grid, R.at(k).at(i), LayerKind::R, k, {}};
  p.refit();
  return p;
}

LayerProfile TwoScaleExpansion::Phi_profile(int j, std::size_t i) const {
  LayerProfile p{grid, Phi.at(j).at(i), LayerKind::Phi, j, {}};
  p.refit();
  return p;
}

double TwoScaleExpansion::weight_rate() const {
  double m = std::numeric_limits<double>::infinity();
  for (double rb : rho_bar) m = std::min(m, leading_decay_rate(rb, interior.laws.pressure, 2 * c));
  return 0.5 * m;
}

TwoScaleExpansion build_two_scale(const FluidState& data, double t_end, const Laws& laws, const TwoScaleConfig& cfg) {
  if (cfg.N < 0) throw Error(ErrorKind::config, "order N must be nonnegative");
  TwoScaleExpansion ex;
  ex.N = cfg.N;
  ex.truncation = cfg.truncation;
  ex.c = capillary_constant(laws.capillarity);
  ex.grid = StretchedGrid(cfg.zeta_max, cfg.zeta_points, cfg.beta);
  ex.interior = solve_halfline_cascade({data}, t_end, laws, {}, cfg.interior);
  const PressureLaw& g = laws.pressure;
  const std::size_t nt = ex.interior.steps();
  const double kappa = 2 * ex.c;
  const std::size_t nz = ex.grid.size();

  std::vector<LeadingProfile> lead;
  for (std::size_t i = 0; i < nt; ++i) {
    ex.rho_bar.push_back(ex.interior.interior[0][i].rho[0]);
    lead.push_back(solve_leading_profile(ex.rho_bar.back(), g, ex.grid, kappa));
  }
  const int top = cfg.N + (cfg.truncation == TwoScaleTruncation::residual_balanced ? 2 : 1);
  ex.R.assign(cfg.N + 1, std::vector<V>(nt, V(0.0, nz)));
  ex.Phi.assign(top + 1, std::vector<V>(nt, V(0.0, nz)));
  for (std::size_t i = 0; i < nt; ++i) ex.R[0][i] = lead[i].R.values;

  auto solve_phi = [&](int j, bool coupled) {
    for (std::size_t i = 0; i < nt; ++i) {
      const LayerJets J(ex, i, j);
      const NodeJet F = J.flux(j - 1, j - 1, j);
      const V I = F[j] - ex.grid.tail_integral(time_derivative(ex.R[j - 2], i, ex.dt()));
      const V rho0 = lead[i].A * lead[i].A;
      ex.Phi[j][i] = (coupled ? solve_phi_layer_coupled(j, ex.grid, rho0, ex.R[0][i], I)
                              : solve_phi_layer_flux(j, ex.grid, rho0, I))
                         .values;
    }
  };
  auto solve_R = [&](int k) {
    for (std::size_t i = 0; i < nt; ++i) {
      const LayerJets J(ex, i, k + 2);
      const NodeJet L = J.momentum(k + 1, k, k + 2, g);
      const auto [a, b] = linear_layer_coefficients(lead[i], g, cfg.linearization, ex.c);
      const double trace = -ex.interior.interior[k][i].rho[0];
      ex.R[k][i] = solve_linear_layer(ex.grid, a, b, L[k] / ex.c, trace, k).values;
    }
  };

  for (int k = 1; k <= cfg.N; ++k) {
    solve_phi(k + 1, true);
    TimeSeries b{ex.interior.interior[0].t0(), ex.dt(), {}};
    for (std::size_t i = 0; i < nt; ++i) b.values.push_back(-ex.grid.derivative(ex.Phi[k + 1][i], 1)[0]);
    ex.boundary.push_back(b);
    FluidState zero{data.rho * 0.0, data.u * 0.0, data.t};
    extend_halfline_cascade(ex.interior, zero, b, cfg.interior);
    solve_R(k);
  }
  if (cfg.truncation == TwoScaleTruncation::residual_balanced) solve_phi(cfg.N + 2, false);
  return ex;
}

LayerConsistency layer_consistency(const TwoScaleExpansion& ex, std::size_t stride) {
  const int top = static_cast<int>(ex.Phi.size()) - 1;
  LayerConsistency out{std::vector<double>(ex.N + 1, 0.0), std::vector<double>(top + 1, 0.0)};
  const PressureLaw& g = ex.interior.laws.pressure;
  stride = std::max<std::size_t>(1, stride);
  for (std::size_t i = 0; i < ex.steps(); i += stride) {
    const LayerJets J(ex, i, top + 2);
    const NodeJet L = J.momentum(ex.N + 1, ex.N + 1, top + 1, g);
    for (int k = 0; k <= ex.N; ++k) out.momentum[k] = std::max(out.momentum[k], sup_abs(L[k]));
    const NodeJet M = J.d(J.flux(ex.N + 1, ex.N + 1, top + 1), 1) + J.profiles(ex.R, ex.N + 1, 0, true).shift(2);
    for (int j = 0; j <= top; ++j) out.mass[j] = std::max(out.mass[j], sup_abs(M[j]));
  }
  return out;
}

namespace {

void check_separation(const TwoScaleExpansion& ex, double eps) {
  const double L = ex.interior.grid().length(0);
  if (!(eps > 0.0)) throw Error(ErrorKind::domain, "eps must be positive");
  if (eps * ex.grid.zeta_max() > 0.9 * L)
    throw Error(ErrorKind::scale_separation, "layer width eps*zeta_max = " + std::to_string(eps * ex.grid.zeta_max()) +
                                                 " exceeds the interior domain");
}

V layer_sum(const std::vector<std::vector<V>>& p, std::size_t i, double eps, int shift) {
  V acc(0.0, p.at(0).at(i).size());
  for (std::size_t k = 0; k < p.size(); ++k) acc += p[k][i] * std::pow(eps, static_cast<double>(k) - shift);
  return acc;
}

}  // namespace

FluidState assemble_two_scale(const TwoScaleExpansion& ex, double eps, std::size_t i) {
  check_separation(ex, eps);
  FluidState s = assemble_interior(ex.interior, eps, i);
  const V R = layer_sum(ex.R, i, eps, 0);
  const V Uz = ex.grid.derivative(layer_sum(ex.Phi, i, eps, 1), 1);
  const auto& z = ex.grid.nodes();
  for (std::size_t j = 0; j < s.rho.size(); ++j) {
    const double zeta = s.grid().coordinate(0, j) / eps;
    if (zeta >= ex.grid.zeta_max()) break;
    s.rho[j] += interpolate(z, std::span<const double>(std::begin(R), R.size()), zeta);
    s.u[0][j] += interpolate(z, std::span<const double>(std::begin(Uz), Uz.size()), zeta);
  }
  return s;
}

TwoScaleResidual two_scale_residual(const TwoScaleExpansion& ex, double eps, std::size_t stride) {
  check_separation(ex, eps);
  TwoScaleResidual out;
  out.eps = eps;
  const InteriorResidual e = interior_residual(ex.interior, eps, stride);
  out.e1 = e.mass;
  out.e2 = e.momentum;

  const PressureLaw& g = ex.interior.laws.pressure;
  const Grid& grid = ex.interior.grid();
  const std::vector<double> x = coordinates(grid);
  const std::size_t nz = ex.grid.size();
  // interpolation stencils from the interior grid to x = eps zeta
  constexpr int width = 8;
  std::vector<std::size_t> start(nz);
  std::vector<std::vector<double>> w(nz);
  for (std::size_t l = 0; l < nz; ++l) {
    const double xl = eps * ex.grid[l];
    long s = static_cast<long>(std::floor(xl / grid.spacing())) - width / 2 + 1;
    s = std::clamp<long>(s, 0, static_cast<long>(x.size()) - width);
    start[l] = static_cast<std::size_t>(s);
    w[l] = fornberg_weights(xl, std::span<const double>(x).subspan(start[l], width), 0)[0];
  }
  auto sample = [&](const ScalarField& f) {
    V v(nz);
    for (std::size_t l = 0; l < nz; ++l) {
      double acc = 0.0;
      for (int j = 0; j < width; ++j) acc += w[l][j] * f[start[l] + j];
      v[l] = acc;
    }
    return v;
  };
  const double weight_rate = ex.weight_rate();
  V weight(nz);
  for (std::size_t l = 0; l < nz; ++l) weight[l] = std::exp(weight_rate * ex.grid[l]);
  const double c = ex.c;

  stride = std::max<std::size_t>(1, stride);
  for (std::size_t i = 0; i < ex.steps(); i += stride) {
    const FluidState I = assemble_interior(ex.interior, eps, i);
    FluidState It = ex.interior.interior[0].time_derivative(i);
    for (int k = 1; k <= ex.interior.N; ++k) {
      const FluidState d = ex.interior.interior[k].time_derivative(i);
      It.rho += d.rho * std::pow(eps, k);
      It.u += d.u * std::pow(eps, k);
    }
    const V rI = sample(I.rho), rIx = sample(derivative(I.rho, 0, 1)), rIxx = sample(derivative(I.rho, 0, 2));
    const V uI = sample(I.u[0]), uIx = sample(derivative(I.u[0], 0, 1));

    std::vector<V> Rt_k, Pt_k;
    for (const auto& h : ex.R) Rt_k.push_back(time_derivative(h, i, ex.dt()));
    for (const auto& h : ex.Phi) Pt_k.push_back(time_derivative(h, i, ex.dt()));
    V R(0.0, nz), Rt(0.0, nz), P(0.0, nz), Pt(0.0, nz);
    for (std::size_t k = 0; k < ex.R.size(); ++k) {
      R += ex.R[k][i] * std::pow(eps, k);
      Rt += Rt_k[k] * std::pow(eps, k);
    }
    for (std::size_t j = 0; j < ex.Phi.size(); ++j) {
      P += ex.Phi[j][i] * std::pow(eps, j);
      Pt += Pt_k[j] * std::pow(eps, j);
    }
    const V Rz = ex.grid.derivative(R, 1), Rzz = ex.grid.derivative(R, 2);
    const V Pz = ex.grid.derivative(P, 1), Pzz = ex.grid.derivative(P, 2);
    const double ie = 1.0 / eps;

    const V E1 = Rt + ie * Rz * uI + R * uIx + ie * (rIx + ie * Rz) * Pz + (rI + R) * (ie * ie) * Pzz;
    const V rT = rI + R, rTx = rIx + ie * Rz, rTxx = rIxx + (ie * ie) * Rzz;
    V L2(nz);
    for (std::size_t l = 0; l < nz; ++l) {
      const double QT = rTxx[l] / rT[l] - 0.5 * rTx[l] * rTx[l] / (rT[l] * rT[l]);
      const double QI = rIxx[l] / rI[l] - 0.5 * rIx[l] * rIx[l] / (rI[l] * rI[l]);
      L2[l] = Pt[l] + ie * uI[l] * Pz[l] + 0.5 * ie * ie * Pz[l] * Pz[l] + g.g(rT[l]) - g.g(rI[l]) -
              eps * eps * c * (QT - QI);
    }
    const V E2 = ex.grid.derivative(L2, 1) * ie;
    out.E1 = std::max(out.E1, sup_abs(E1 * weight));
    out.E2 = std::max(out.E2, sup_abs(E2 * weight));
    out.rho_trace = std::max(out.rho_trace, std::abs(I.rho[0] + R[0] - 1.0));
    out.u_trace = std::max(out.u_trace, std::abs(I.u[0][0] + ie * Pz[0]));
  }
  return out;
}

TwoScaleReport two_scale_report(const TwoScaleExpansion& ex, const std::vector<double>& eps, std::size_t stride) {
  TwoScaleReport r;
  std::vector<double> a, b, c, d;
  for (double e : eps) {
    r.samples.push_back(two_scale_residual(ex, e, stride));
    a.push_back(r.samples.back().e1);
    b.push_back(r.samples.back().e2);
    c.push_back(r.samples.back().E1);
    d.push_back(r.samples.back().E2);
  }
  auto fit = [&](const std::vector<double>& v) {
    try {
      return fit_rate(eps, v);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  r.order_e1 = fit(a);
  r.order_e2 = fit(b);
  r.order_E1 = fit(c);
  r.order_E2 = fit(d);
  return r;
}

void TwoScaleReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
  os << "eps,e1,e2,E1_weighted,E2_weighted,rho_trace,u_trace,order_e1,order_e2,order_E1,order_E2\n";
  os.precision(10);
  for (const auto& s : samples)
    os << s.eps << ',' << s.e1 << ',' << s.e2 << ',' << s.E1 << ',' << s.E2 << ',' << s.rho_trace << ','
       << s.u_trace << ',' << order_e1 << ',' << order_e2 << ',' << order_E1 << ',' << order_E2 << '\n';
}

}  // namespace eklab
