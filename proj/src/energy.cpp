#include "eklab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "eklab/fft.hpp"
#include "eklab/ops.hpp"
#include "eklab/stencil.hpp"

namespace eklab {

namespace {

constexpr double kGL8x[] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGL8w[] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double sq(double x) { return x * x; }

ScalarField lap_power(ScalarField f, int n) {
  for (int k = 0; k < n; ++k) f = laplacian(f);
  return f;
}

ComplexField lap_power(ComplexField f, int n) {
  for (int k = 0; k < n; ++k) f = laplacian(f);
  return f;
}

VectorField reals(const ComplexVectorField& z) {
  std::vector<ScalarField> c;
  for (int i = 0; i < z.dim(); ++i) c.push_back(real_part(z[i]));
  return VectorField(std::move(c));
}

VectorField imags(const ComplexVectorField& z) {
  std::vector<ScalarField> c;
  for (int i = 0; i < z.dim(); ++i) c.push_back(imag_part(z[i]));
  return VectorField(std::move(c));
}

ScalarField norm2(const VectorField& v) {
  ScalarField out(v.grid());
  for (int i = 0; i < v.dim(); ++i) out += v[i] * v[i];
  return out;
}

bool within(const EnergyWeights& w, const ScalarField& rho) { return w.valid(min_value(rho)) && w.valid(max_value(rho)); }

void require_valid(const EnergyWeights& w, const ScalarField& rho) {
  const double lo = min_value(rho), hi = max_value(rho);
  if (!w.valid(lo) || !w.valid(hi))
    throw Error(ErrorKind::domain, "density range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                       "] leaves the weight interval [" + std::to_string(w.lo) + ", " +
                                       std::to_string(w.hi) + "]");
}

// Quadratic form with weights frozen at rho_w, applied to (dz, dr).
double quadratic_form(const ScalarField& rho_w, const ComplexVectorField& dz, const ScalarField& dr,
                      const EnergyWeights& w) {
  const int n = w.n;
  std::vector<ComplexField> lz;
  for (int i = 0; i < dz.dim(); ++i) lz.push_back(lap_power(dz[i], n));
  const ComplexVectorField L(std::move(lz));
  const ScalarField lr = lap_power(dr, n);

  const ScalarField phi = rho_w.map([&](double r) { return w.phi(r); });
  const ScalarField psi = rho_w.map([&](double r) { return w.psi(r); });
  const ScalarField theta = rho_w.map([&](double r) { return w.theta(r); });

  const auto re = reals(L);
  const auto im = imags(L);
  const ScalarField q2 = norm2(helmholtz_split(re).first) + norm2(helmholtz_split(im).first);
  const ScalarField p2 = norm2(helmholtz_split(theta * re).second) + norm2(helmholtz_split(theta * im).second);
  return 0.5 * integrate(phi * q2 + p2 + psi * lr * lr);
}

double modified_energy_unchecked(const FluidState& s, double eps, const EnergyWeights& w) {
  if (!s.grid().periodic()) throw Error(ErrorKind::dimension, "modified energies need a periodic grid");
  const auto z = to_z(s, eps, w.laws);
  return quadratic_form(s.rho, z.z, s.rho - 1.0, w);
}

double w1inf(const ScalarField& f) {
  double m = max_abs(f);
  for (int a = 0; a < f.grid().dim(); ++a) m += max_abs(derivative(f, a, 1));
  return m;
}

double w2inf(const ScalarField& f) {
  double m = w1inf(f);
  const int d = f.grid().dim();
  for (int a = 0; a < d; ++a) m += max_abs(derivative(f, a, 2));
  if (d == 2) m += max_abs(derivative(derivative(f, 0, 1), 1, 1));
  return m;
}

double uniform_dt(const std::vector<FluidState>& traj) {
  if (traj.size() < 2) return 0.0;
  const double dt = traj[1].t - traj[0].t;
  if (!(dt > 0.0)) throw Error(ErrorKind::domain, "time stamps must increase");
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (std::abs(traj[i].t - traj[i - 1].t - dt) > 1e-9 * std::max(1.0, std::abs(traj[i].t)))
      throw Error(ErrorKind::domain, "trajectory is not uniformly sampled in time");
  return dt;
}

double sobolev2(const ComplexVectorField& z, const ScalarField& r, int s) {
  double out = sq(sobolev_norm(r, s));
  for (int i = 0; i < z.dim(); ++i) out += sq(sobolev_norm(z[i], s));
  return out;
}

// Weights of the width-point stencil for d^order/dt^order at sample idx, centered where possible.
std::pair<std::size_t, std::vector<double>> time_stencil(std::size_t count, std::size_t idx, double dt, int order,
                                                         std::size_t width) {
  if (count < width)
    throw Error(ErrorKind::history_too_short,
                "need " + std::to_string(width) + " snapshots for time derivative of order " + std::to_string(order));
  std::size_t s = idx >= width / 2 ? idx - width / 2 : 0;
  s = std::min(s, count - width);
  std::vector<double> t(width);
  for (std::size_t j = 0; j < width; ++j) t[j] = static_cast<double>(s + j) * dt;
  return {s, fornberg_weights(static_cast<double>(idx) * dt, t, order)[order]};
}

// Fourier resampling of a periodic 1-d field onto `target`; tail receives the dropped-mode norm.
ScalarField resample_space(const ScalarField& f, const Grid& target, double& tail) {
  const Grid& src = f.grid();
  const std::size_t ns = src.points(), nt = target.points();
  std::valarray<Complex> data(ns);
  for (std::size_t i = 0; i < ns; ++i) data[i] = f[i];
  const auto spec = fft::forward(src, data);
  const auto ks = fft::mode_indices(ns);
  const long kmax = static_cast<long>(std::min(ns, nt) / 2) - 1;
  std::valarray<Complex> out(Complex{}, nt);
  double dropped = 0.0, total = 0.0;
  for (std::size_t j = 0; j < ns; ++j) {
    const double m2 = std::norm(spec[j]);
    total += m2;
    if (std::abs(ks[j]) > kmax) {
      dropped += m2;
      continue;
    }
    const long k = ks[j];
    out[k >= 0 ? static_cast<std::size_t>(k) : nt - static_cast<std::size_t>(-k)] =
        spec[j] * (static_cast<double>(nt) / static_cast<double>(ns));
  }
  tail = std::max(tail, total > 0.0 ? std::sqrt(dropped / total) : 0.0);
  const auto back = fft::inverse(target, out);
  ScalarField g(target);
  for (std::size_t i = 0; i < nt; ++i) g[i] = back[i].real();
  return g;
}

FluidState combine(const std::vector<FluidState>& traj, std::size_t start, const std::vector<double>& w, double t) {
  FluidState out = traj[start];
  out.rho *= w[0];
  out.u *= w[0];
  for (std::size_t j = 1; j < w.size(); ++j) {
    out.rho += traj[start + j].rho * w[j];
    out.u += traj[start + j].u * w[j];
  }
  out.t = t;
  return out;
}

FluidState interpolate_time(const std::vector<FluidState>& traj, double t, std::size_t width) {
  width = std::min(width, traj.size());
  auto it = std::lower_bound(traj.begin(), traj.end(), t, [](const FluidState& s, double v) { return s.t < v; });
  std::size_t idx = static_cast<std::size_t>(it - traj.begin());
  std::size_t s = idx >= width / 2 ? idx - width / 2 : 0;
  s = std::min(s, traj.size() - width);
  std::vector<double> nodes(width);
  for (std::size_t j = 0; j < width; ++j) nodes[j] = traj[s + j].t;
  return combine(traj, s, fornberg_weights(t, nodes, 0)[0], t);
}

double state_distance(const FluidState& a, const FluidState& b) {
  double d = max_abs(a.rho - b.rho);
  for (int i = 0; i < a.u.dim(); ++i) d = std::max(d, max_abs(a.u[i] - b.u[i]));
  return d;
}

}  // namespace

EnergyWeights EnergyWeights::build(int n, const Laws& laws, double alpha, double theta_ref) {
  if (n < 0) throw Error(ErrorKind::domain, "energy order must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::domain, "alpha must lie in (0, 1)");
  if (!(theta_ref > 0.0)) throw Error(ErrorKind::domain, "theta_ref must be positive");
  EnergyWeights w;
  w.n = n;
  w.laws = laws;
  w.alpha = alpha;
  w.theta_ref = theta_ref;
  const auto ok = [&](double r) {
    return r >= alpha && r < 1.0 / alpha && laws.pressure.g(r, 1) >= alpha && w.theta2(r) >= alpha * alpha;
  };
  if (!ok(1.0)) throw Error(ErrorKind::domain, "weights are invalid at the equilibrium rho = 1");
  const auto edge = [&](double far) {
    const double step = 0.01 * (far > 1.0 ? 1.0 : -1.0);
    double in = 1.0;
    double out = far;
    for (double r = 1.0 + step; (step > 0 ? r < far : r > far); r += step) {
      if (!ok(r)) {
        out = r;
        break;
      }
      in = r;
    }
    if (ok(out)) return out;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (in + out);
      (ok(mid) ? in : out) = mid;
    }
    return in;
  };
  w.lo = edge(alpha);
  // 1/alpha itself is excluded.
  w.hi = edge(std::nextafter(1.0 / alpha, 0.0));
  return w;
}

double EnergyWeights::phi(double rho) const { return std::pow(laws.capillarity.a(rho), 2 * n) * rho; }

double EnergyWeights::psi(double rho) const {
  return std::pow(laws.capillarity.a(rho), 2 * n) * laws.pressure.g(rho, 1);
}

double EnergyWeights::theta2(double rho) const {
  const auto f = [&](double s) { return phi(s) * std::sqrt(laws.capillarity.K(s) / s) / laws.capillarity.a(s); };
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(rho - 1.0) / 0.05)));
  const double h = (rho - 1.0) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = 1.0 + (p + 0.5) * h;
    for (int j = 0; j < 8; ++j) acc += kGL8w[j] * f(c + 0.5 * h * kGL8x[j]);
  }
  return theta_ref * theta_ref + acc * h;
}

double EnergyWeights::theta(double rho) const { return std::sqrt(std::max(theta2(rho), 0.0)); }

double EnergyWeights::theta_prime(double rho) const {
  return phi(rho) * std::sqrt(laws.capillarity.K(rho) / rho) / laws.capillarity.a(rho) / theta(rho);
}

double modified_energy(const FluidState& s, double eps, const EnergyWeights& w) {
  require_valid(w, s.rho);
  return modified_energy_unchecked(s, eps, w);
}

double modified_energy(const FluidState& s, double eps, const Laws& laws, int n) {
  return modified_energy(s, eps, EnergyWeights::build(n, laws));
}

double physical_energy(const FluidState& s, double eps, const Laws& laws) { return energy0(s, eps, laws); }

double energy_norm2(const FluidState& s, double eps, const Laws& laws, int n) {
  return sobolev2(to_z(s, eps, laws).z, s.rho - 1.0, 2 * n);
}

EquivalenceProbe norm_equivalence_probe(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n,
                                        std::size_t holdout_stride) {
  if (holdout_stride < 2) throw Error(ErrorKind::domain, "holdout stride must be at least 2");
  const auto w = EnergyWeights::build(n, laws);
  EquivalenceProbe p;
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
  double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    if (!within(w, s.rho) || w1inf(s.rho) > 1.0 / w.alpha) p.hypotheses_ok = false;
    const double den = energy_norm2(s, eps, laws, n);
    if (!(den > 1e-300)) {
      ++p.skipped;
      continue;
    }
    const double r = (energy0(s, eps, laws) + modified_energy_unchecked(s, eps, w)) / den;
    if (!std::isfinite(r)) {
      ++p.skipped;
      continue;
    }
    p.ratios.push_back(r);
    if (i % holdout_stride == holdout_stride - 1) {
      hmin = std::min(hmin, r);
      hmax = std::max(hmax, r);
    } else {
      cmin = std::min(cmin, r);
      cmax = std::max(cmax, r);
    }
  }
  if (p.ratios.empty()) return p;
  if (!std::isfinite(cmin)) cmin = cmax = hmin;
  if (!std::isfinite(hmin)) hmin = cmin, hmax = cmax;
  p.c_est = cmin;
  p.C_est = cmax;
  p.holdout_min = hmin;
  p.holdout_max = hmax;
  return p;
}

RateMonitor energy_rate_monitor(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n) {
  if (traj.size() < 5) throw Error(ErrorKind::history_too_short, "rate monitor needs at least 5 snapshots");
  const double dt = uniform_dt(traj);
  const auto w = EnergyWeights::build(n, laws);
  std::vector<double> E(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) E[i] = modified_energy_unchecked(traj[i], eps, w);
  RateMonitor m;
  for (std::size_t i = 2; i + 2 < traj.size(); ++i) {
    const double rate = (-E[i + 2] + 8.0 * E[i + 1] - 8.0 * E[i - 1] + E[i - 2]) / (12.0 * dt);
    const auto& s = traj[i];
    double wu = 0.0;
    for (int a = 0; a < s.u.dim(); ++a) wu = std::max(wu, w1inf(s.u[a]));
    const double nz = std::sqrt(energy_norm2(s, eps, laws, n));
    const double den = nz * nz * (wu + w2inf(s.rho));
    if (!(den > 1e-300)) {
      ++m.skipped;
      continue;
    }
    m.t.push_back(s.t);
    m.ratio.push_back(rate / den);
    m.max_abs_ratio = std::max(m.max_abs_ratio, std::abs(rate / den));
  }
  return m;
}

std::pair<double, double> gronwall_fit(const std::vector<double>& t, const std::vector<double>& energy) {
  if (t.size() != energy.size() || t.empty()) throw Error(ErrorKind::shape, "time and energy series differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t i = t.size() / 2; i < t.size(); ++i) {
    if (!(energy[i] > 0.0)) continue;
    const double x = t[i] - t[0], y = std::log(energy[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
    ++cnt;
  }
  double lambda = 0.0;
  if (cnt >= 2) {
    const double d = cnt * sxx - sx * sx;
    if (d > 0.0) lambda = std::max(0.0, (cnt * sxy - sx * sy) / d);
  }
  double peak = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) peak = std::max(peak, energy[i] * std::exp(-lambda * (t[i] - t[0])));
  return {lambda, std::max(0.0, peak - energy[0])};
}

DifferenceMonitor difference_energy_monitor(const std::vector<FluidState>& exact,
                                            const std::vector<FluidState>& approx, double eps, const Laws& laws,
                                            int n) {
  if (exact.empty() || approx.empty()) throw Error(ErrorKind::history_too_short, "empty trajectory");
  const auto w = EnergyWeights::build(n, laws);
  DifferenceMonitor m;
  const double tol = 1e-9;
  for (const auto& s : exact) {
    require_valid(w, s.rho);
    FluidState a;
    auto it = std::find_if(approx.begin(), approx.end(),
                           [&](const FluidState& x) { return std::abs(x.t - s.t) <= tol * std::max(1.0, s.t); });
    if (it != approx.end()) {
      a = *it;
    } else {
      if (s.t < approx.front().t - tol || s.t > approx.back().t + tol)
        throw Error(ErrorKind::domain, "approximate trajectory does not cover t = " + std::to_string(s.t));
      m.resampled = true;
      a = interpolate_time(approx, s.t, 4);
      if (approx.size() >= 6)
        m.interpolation_error = std::max(m.interpolation_error, state_distance(a, interpolate_time(approx, s.t, 6)));
    }
    if (a.grid() != s.grid()) {
      if (s.grid().kind() != GridKind::periodic_1d || a.grid().kind() != GridKind::periodic_1d ||
          a.grid().length() != s.grid().length())
        throw Error(ErrorKind::shape, "spatial resampling needs periodic 1-d grids of equal length");
      m.resampled = true;
      double tail = 0.0;
      FluidState b;
      b.rho = resample_space(a.rho, s.grid(), tail);
      b.u = VectorField(std::vector<ScalarField>{resample_space(a.u[0], s.grid(), tail)});
      b.t = a.t;
      a = std::move(b);
      m.interpolation_error = std::max(m.interpolation_error, tail);
    }
    const auto z = to_z(s, eps, laws);
    const auto z1 = to_z(a, eps, laws);
    m.t.push_back(s.t);
    m.energy.push_back(quadratic_form(s.rho, z.z - z1.z, s.rho - a.rho, w));
  }
  std::tie(m.Lambda, m.source) = gronwall_fit(m.t, m.energy);
  return m;
}

TangentialReport tangential_energy(const std::vector<FluidState>& traj, double eps, const Laws& laws, int alpha0) {
  if (alpha0 < 0) throw Error(ErrorKind::domain, "tangential index must be nonnegative");
  if (traj.empty()) throw Error(ErrorKind::history_too_short, "empty trajectory");
  if (traj.front().grid().kind() != GridKind::halfline_1d)
    throw Error(ErrorKind::dimension, "tangential energies live on the half-line");
  const double dt = traj.size() > 1 ? uniform_dt(traj) : 0.0;
  const std::size_t width = static_cast<std::size_t>(alpha0) + 6;
  if (alpha0 > 0 && traj.size() < width)
    throw Error(ErrorKind::history_too_short,
                "need " + std::to_string(width) + " snapshots for time derivative of order " + std::to_string(alpha0));

  std::vector<ComplexState> zs;
  for (const auto& s : traj) zs.push_back(to_z(s, eps, laws));

  TangentialReport rep;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    ComplexField dz = zs[i].z[0];
    ScalarField dr = s.rho - 1.0;
    if (alpha0 > 0) {
      const auto [st, wt] = time_stencil(traj.size(), i, dt, alpha0, width);
      dz = ComplexField(s.grid());
      dr = ScalarField(s.grid());
      for (std::size_t j = 0; j < width; ++j) {
        dz += (zs[st + j].z[0] - zs[i].z[0]) * Complex(wt[j], 0.0);
        dr += (traj[st + j].rho - s.rho) * wt[j];
      }
    }
    const ScalarField gp = s.rho.map([&](double r) { return laws.pressure.g(r, 1); });
    const ScalarField mod = dz.map([](Complex c) { return std::norm(c); });
    rep.t.push_back(s.t);
    rep.energy.push_back(0.5 * integrate(s.rho * mod + gp * dr * dr));
  }

  double amin = std::numeric_limits<double>::infinity();
  for (const auto& z : zs) amin = std::min(amin, min_value(z.a));
  rep.amplification = eps > 0.0 ? 1.0 / (eps * amin) : std::numeric_limits<double>::infinity();
  if (!(eps > 0.0) || traj.size() < 7) return rep;

  // z_xx = [i (z_t + u z_x + i w z_x + g' rho_x) / eps - a_x z_x] / a
  for (std::size_t i = 3; i + 3 < traj.size(); ++i) {
    const auto [st, wt] = time_stencil(traj.size(), i, dt, 1, 7);
    ComplexField zt(traj[i].grid());
    for (std::size_t j = 0; j < 7; ++j) zt += (zs[st + j].z[0] - zs[i].z[0]) * Complex(wt[j], 0.0);
    const auto& s = traj[i];
    const auto& z = zs[i];
    const ComplexField zx = derivative(z.z[0], 0, 1);
    const ComplexField zxx = derivative(z.z[0], 0, 2);
    const ScalarField gp = s.rho.map([&](double r) { return laws.pressure.g(r, 1); });
    const ComplexField rhs = zt + to_complex(s.u[0]) * zx + make_complex(ScalarField(s.grid()), z.w[0]) * zx +
                             to_complex(gp * derivative(s.rho, 0, 1));
    const ComplexField ax = to_complex(derivative(z.a, 0, 1));
    ComplexField rec = rhs * Complex(0.0, 1.0 / eps) - ax * zx;
    rec /= to_complex(z.a);
    const double nz = l2_norm(z.z[0]);
    if (nz > 0.0) rep.reconstruction_error = std::max(rep.reconstruction_error, l2_norm(rec - zxx) / nz);
  }
  return rep;
}

void EnergyReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.precision(12);
  out << "t,E0,En,Etilde,Xn,ratio\n";
  std::size_t r = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t[i] << ',' << E0[i] << ',' << En[i] << ',';
    if (i < Etilde.size()) out << Etilde[i];
    out << ',';
    if (i < Xn.size()) out << Xn[i];
    out << ',';
    while (r < ratio_t.size() && ratio_t[r] < t[i] - 1e-12) ++r;
    if (r < ratio_t.size() && std::abs(ratio_t[r] - t[i]) <= 1e-12) out << ratio[r];
    out << '\n';
  }
}

void EnergyReport::write_json(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  nlohmann::json j = {{"n", n},         {"eps", eps},       {"c_est", c_est},   {"C_est", C_est},
                      {"max_ratio", max_ratio}, {"Lambda", Lambda}, {"source", source}, {"samples", t.size()}};
  out << j.dump(2) << '\n';
}

EnergyReport energy_audit(const std::vector<FluidState>& traj, double eps, const Laws& laws, int n,
                          const std::vector<FluidState>* approx) {
  EnergyReport rep;
  rep.n = n;
  rep.eps = eps;
  const auto w = EnergyWeights::build(n, laws);
  const double dt = uniform_dt(traj);
  std::vector<ComplexField> zh;
  for (const auto& s : traj) {
    rep.t.push_back(s.t);
    rep.E0.push_back(energy0(s, eps, laws));
    rep.En.push_back(modified_energy(s, eps, w));
    zh.push_back(to_z(s, eps, laws).z[0]);
  }
  if (traj.size() >= static_cast<std::size_t>(n) + 6)
    for (std::size_t i = 0; i < traj.size(); ++i) rep.Xn.push_back(xn_tangential_norm(zh, dt, 2 * n, i));
  const auto probe = norm_equivalence_probe(traj, eps, laws, n);
  rep.c_est = probe.c_est;
  rep.C_est = probe.C_est;
  if (traj.size() >= 5) {
    const auto rate = energy_rate_monitor(traj, eps, laws, n);
    rep.ratio_t = rate.t;
    rep.ratio = rate.ratio;
    rep.max_ratio = rate.max_abs_ratio;
  }
  if (approx) {
    const auto d = difference_energy_monitor(traj, *approx, eps, laws, n);
    rep.Etilde = d.energy;
    rep.Lambda = d.Lambda;
    rep.source = d.source;
  }
  return rep;
}

}  // namespace eklab
