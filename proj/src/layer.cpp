#include "eklab/layer.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace eklab {

StretchedGrid::StretchedGrid(double zeta_max, std::size_t n, double beta) : beta_(beta) {
  if (!(zeta_max > 0.0) || n < 16) throw Error(ErrorKind::domain, "stretched grid needs zeta_max > 0 and n >= 16");
  if (!(beta >= 0.0)) throw Error(ErrorKind::domain, "stretching parameter must be nonnegative");
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    nodes_[i] = beta > 1e-12 ? zeta_max * std::sinh(beta * s) / std::sinh(beta) : zeta_max * s;
  }
  nodes_.back() = zeta_max;
  diff_ = std::make_shared<NodeDifferentiator>(nodes_, 4, 9);
}

StretchedGrid StretchedGrid::for_decay(double gamma_est, std::size_t n, double factor, double beta) {
  if (!(gamma_est > 0.0)) throw Error(ErrorKind::domain, "decay estimate must be positive");
  if (factor < 8.0) throw Error(ErrorKind::domain, "zeta_max must cover at least 8 decay lengths");
  return StretchedGrid(factor / gamma_est, n, beta);
}

std::valarray<double> StretchedGrid::derivative(const std::valarray<double>& f, int order) const {
  if (f.size() != size()) throw Error(ErrorKind::shape, "profile does not match the stretched grid");
  return diff_->apply(f, order);
}

std::valarray<double> StretchedGrid::tail_integral(const std::valarray<double>& f) const {
  if (f.size() != size()) throw Error(ErrorKind::shape, "profile does not match the stretched grid");
  const auto c = cumulative_integral(nodes_, std::span<const double>(std::begin(f), f.size()), 8);
  std::valarray<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = c.back() - c[i];
  return out;
}

std::valarray<double> StretchedGrid::zeta() const { return std::valarray<double>(nodes_.data(), nodes_.size()); }

DecayFit fit_decay(const StretchedGrid& grid, const std::valarray<double>& f) {
  const std::size_t n = f.size();
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(f[i]) > std::abs(f[imax])) imax = i;
  const double m = std::abs(f[imax]);
  if (m == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  auto collect = [&](double lo, double hi) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = imax; i < n; ++i) {
      const double v = std::abs(f[i]) / m;
      if (v > lo && v < hi) pts.emplace_back(grid[i], std::log(std::abs(f[i])));
    }
    return pts;
  };
  auto pts = collect(1e-12, 1e-2);
  if (pts.size() < 4) pts = collect(1e-15, 1.0 + 1e-12);
  if (pts.size() < 2) return {0.0, m};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(pts.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  const double icept = (sy - slope * sx) / k;
  return {-slope, std::exp(icept)};
}

double LayerProfile::operator()(double zeta) const {
  if (zeta >= grid.zeta_max()) return 0.0;
  return interpolate(grid.nodes(), std::span<const double>(std::begin(values), values.size()), zeta);
}

void LayerProfile::refit() { decay = fit_decay(grid, values); }

bool LayerProfile::decaying(int derivatives, double min_rate) const {
  for (int j = 0; j <= derivatives; ++j) {
    const std::valarray<double> f = j == 0 ? values : derivative(j);
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    if (m < 1e-300) continue;
    if (!(fit_decay(grid, f).rate > min_rate)) return false;
  }
  return true;
}

void write_profile(const std::filesystem::path& path, const LayerProfile& p) {
  nlohmann::json j;
  j["grid"] = {{"zeta_max", p.grid.zeta_max()}, {"n", p.grid.size()}, {"beta", p.grid.beta()}};
  j["kind"] = p.kind == LayerKind::R ? "R" : "Phi";
  j["rank"] = p.rank;
  j["decay"] = {{"rate", p.decay.rate}, {"amplitude", p.decay.amplitude}};
  j["values"] = std::vector<double>(std::begin(p.values), std::end(p.values));
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
  os << j.dump() << '\n';
}

LayerProfile read_profile(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::io, "cannot read " + path.string());
  try {
    nlohmann::json j;
    is >> j;
    const auto& g = j.at("grid");
    StretchedGrid grid(g.at("zeta_max").get<double>(), g.at("n").get<std::size_t>(), g.at("beta").get<double>());
    const auto v = j.at("values").get<std::vector<double>>();
    if (v.size() != grid.size()) throw Error(ErrorKind::io, "profile length does not match its grid");
    const double rate = j.at("decay").at("rate").is_null() ? std::numeric_limits<double>::infinity()
                                                            : j.at("decay").at("rate").get<double>();
    return LayerProfile{grid, std::valarray<double>(v.data(), v.size()),
                        j.at("kind").get<std::string>() == "R" ? LayerKind::R : LayerKind::Phi,
                        j.at("rank").get<int>(), DecayFit{rate, j.at("decay").at("amplitude").get<double>()}};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad profile file: ") + e.what());
  }
}

namespace {

struct LeadingOde {
  const PressureLaw& g;
  double rho_bar, b, kappa;

  double f(double A) const { return A * (g.g(A * A) - g.g(rho_bar)) / kappa; }
  double f1() const { return 2 * rho_bar * g.g(rho_bar, 1) / kappa; }
  double f2() const { return (6 * b * g.g(rho_bar, 1) + 4 * b * rho_bar * g.g(rho_bar, 2)) / kappa; }

  // (F(b + D) - F(b)) / D^2
  double dF_over_D2(double D) const {
    if (std::abs(D) < 1e-6 * b) return 0.5 * f1() + f2() * D / 6.0;
    static constexpr double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    static constexpr double w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    double acc = 0.0;
    for (int q = 0; q < 8; ++q) {
      const double tau = 0.5 * (x[q] + 1.0);
      acc += 0.5 * w[q] * f(b + tau * D) / D;
    }
    return acc;
  }
  double dF(double A) const { return dF_over_D2(A - b) * (A - b) * (A - b); }
};

}  // namespace

double leading_decay_rate(double rho_bar, const PressureLaw& g, double kappa) {
  return std::sqrt(2 * rho_bar * g.g(rho_bar, 1) / kappa);
}

LeadingProfile solve_leading_profile(double rho_bar, const PressureLaw& g, const StretchedGrid& grid, double kappa) {
  if (!(rho_bar > 0.0) || !(kappa > 0.0)) throw Error(ErrorKind::domain, "need rho_bar > 0 and kappa > 0");
  const std::size_t n = grid.size();
  LeadingProfile out{LayerProfile{grid, std::valarray<double>(0.0, n), LayerKind::R, 0, {}},
                     std::valarray<double>(1.0, n), std::valarray<double>(0.0, n), rho_bar, kappa, 0.0, 0.0};
  const double b = std::sqrt(rho_bar);
  if (std::abs(b - 1.0) < 1e-14) {
    out.R.decay = {std::numeric_limits<double>::infinity(), 0.0};
    return out;
  }
  const LeadingOde ode{g, rho_bar, b, kappa};
  if (!(ode.f1() > 0.0))
    throw Error(ErrorKind::profile_existence, "f'(sqrt(rho_bar)) = 2 rho_bar g'(rho_bar) is not positive");
  const double lo = std::min(1.0, b), hi = std::max(1.0, b);
  for (int j = 1; j < 400; ++j) {
    const double A = lo + (hi - lo) * j / 400.0;
    if (!(ode.dF_over_D2(A - b) > 0.0))
      throw Error(ErrorKind::profile_existence,
                  "no connecting orbit: F(A) - F(sqrt(rho_bar)) <= 0 at A = " + std::to_string(A));
  }
  if (!(ode.dF_over_D2(1.0 - b) > 0.0)) throw Error(ErrorKind::profile_existence, "no connecting orbit from A = 1");

  // y = log|b - A| obeys y' = -sqrt(2 (F(A) - F(b)) / (A - b)^2), regular down to A = b.
  const double s = b > 1.0 ? 1.0 : -1.0;
  auto A_of = [&](double y) { return b - s * std::exp(y); };
  auto h = [&](double y) { return std::sqrt(2.0 * ode.dF_over_D2(A_of(y) - b)); };
  double y = std::log(std::abs(b - 1.0));
  std::valarray<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double span = grid[i] - grid[i - 1];
      const int sub = std::max(1, static_cast<int>(std::ceil(span / 2e-3)));
      const double dz = span / sub;
      for (int j = 0; j < sub; ++j) {
        const double k1 = -h(y), k2 = -h(y + 0.5 * dz * k1), k3 = -h(y + 0.5 * dz * k2), k4 = -h(y + dz * k3);
        y += dz * (k1 + 2 * k2 + 2 * k3 + k4) / 6;
      }
    }
    out.A[i] = A_of(y);
    gap[i] = -s * std::exp(y);
    out.dA[i] = s * std::exp(y) * h(y);
  }
  out.R.values = gap * (out.A + b);
  out.R.refit();
  const auto A1 = grid.derivative(out.A, 1);
  const auto A2 = grid.derivative(out.A, 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.ode_residual = std::max(out.ode_residual, std::abs(A2[i] - ode.f(out.A[i])));
    out.first_integral_defect = std::max(out.first_integral_defect, std::abs(0.5 * A1[i] * A1[i] - ode.dF(out.A[i])));
  }
  return out;
}

LayerProfile solve_linear_layer(const StretchedGrid& grid, const std::valarray<double>& a,
                                const std::valarray<double>& b, const std::valarray<double>& F, double trace, int rank,
                                LinearLayerReport* report) {
  const std::size_t n = grid.size();
  if (a.size() != n || b.size() != n || F.size() != n) throw Error(ErrorKind::shape, "coefficients do not match grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] > 0.0)) throw Error(ErrorKind::coercivity, "a <= 0 at zeta = " + std::to_string(grid[i]));
    if (!(b[i] > 0.0)) throw Error(ErrorKind::coercivity, "b <= 0 at zeta = " + std::to_string(grid[i]));
  }
  const auto da = grid.derivative(a, 1);
  constexpr int width = 9;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  trip.emplace_back(0, 0, 1.0);
  rhs[0] = trace;
  trip.emplace_back(static_cast<int>(n - 1), static_cast<int>(n - 1), 1.0);
  rhs[static_cast<Eigen::Index>(n - 1)] = 0.0;
  const auto& z = grid.nodes();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    long st = static_cast<long>(i) - width / 2;
    st = std::clamp<long>(st, 0, static_cast<long>(n) - width);
    const auto w = fornberg_weights(z[i], std::span<const double>(z).subspan(static_cast<std::size_t>(st), width), 2);
    for (int j = 0; j < width; ++j) {
      double c = a[i] * w[2][j] + da[i] * w[1][j];
      if (static_cast<std::size_t>(st + j) == i) c -= b[i];
      trip.emplace_back(static_cast<int>(i), static_cast<int>(st + j), c);
    }
    rhs[static_cast<Eigen::Index>(i)] = F[i];
  }
  Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::coercivity, "layer operator factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  LayerProfile p{grid, std::valarray<double>(n), LayerKind::R, rank, {}};
  for (std::size_t i = 0; i < n; ++i) p.values[i] = x[static_cast<Eigen::Index>(i)];
  const auto d1 = grid.derivative(p.values, 1), d2 = grid.derivative(p.values, 2);
  LinearLayerReport rep;
  double scale = std::abs(trace);
  for (double v : p.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    rep.residual = std::max(rep.residual, std::abs(a[i] * d2[i] + da[i] * d1[i] - b[i] * p.values[i] - F[i]));
    if (grid[i] >= 0.8 * grid.zeta_max()) rep.tail = std::max(rep.tail, std::abs(p.values[i]));
  }
  if (scale > 0.0 && rep.tail > 1e-10 * scale)
    throw Error(ErrorKind::enlarge_domain, "layer solution at the truncation is " + std::to_string(rep.tail / scale) +
                                               " of its size; enlarge zeta_max");
  p.refit();
  if (report) *report = rep;
  return p;
}

std::pair<std::valarray<double>, std::valarray<double>> linear_layer_coefficients(const LeadingProfile& lead,
                                                                                   const PressureLaw& g,
                                                                                   LayerLinearization mode, double c) {
  const std::size_t n = lead.A.size();
  const std::valarray<double> rho0 = lead.A * lead.A;
  std::valarray<double> a = 1.0 / rho0, b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = g.g(rho0[i], 1) / c;
  if (mode == LayerLinearization::full) {
    const auto r1 = lead.R.derivative(1), r2 = lead.R.derivative(2);
    b += r2 / (rho0 * rho0) - r1 * r1 / (rho0 * rho0 * rho0);
  }
  return {a, b};
}

namespace {

void check_decay(const StretchedGrid& grid, const std::valarray<double>& f, const char* what) {
  double m = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    m = std::max(m, std::abs(f[i]));
    if (grid[i] >= 0.8 * grid.zeta_max()) tail = std::max(tail, std::abs(f[i]));
  }
  if (m > 0.0 && tail > 1e-8 * m + 1e-14)
    throw Error(ErrorKind::decay, std::string(what) + " does not decay on the layer grid (tail " +
                                      std::to_string(tail / m) + " of max " + std::to_string(m) + ")");
}

LayerProfile phi_from_slope(int k, const StretchedGrid& grid, std::valarray<double> dphi) {
  LayerProfile p{grid, -grid.tail_integral(dphi), LayerKind::Phi, k, {}};
  p.refit();
  return p;
}

}  // namespace

LayerProfile solve_phi_layer(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                             const std::valarray<double>& F1) {
  if (rho0.size() != grid.size() || F1.size() != grid.size()) throw Error(ErrorKind::shape, "profile sizes differ");
  check_decay(grid, F1, "F1");
  return phi_from_slope(k, grid, -grid.tail_integral(F1) / rho0);
}

LayerProfile solve_phi_layer_coupled(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                                     const std::valarray<double>& R0, const std::valarray<double>& I) {
  if (rho0.size() != grid.size() || R0.size() != grid.size() || I.size() != grid.size())
    throw Error(ErrorKind::shape, "profile sizes differ");
  check_decay(grid, I, "flux");
  const double slope0 = -I[0] / (rho0[0] - R0[0]);
  return phi_from_slope(k, grid, (-I + R0 * slope0) / rho0);
}

LayerProfile solve_phi_layer_flux(int k, const StretchedGrid& grid, const std::valarray<double>& rho0,
                                  const std::valarray<double>& I) {
  if (rho0.size() != grid.size() || I.size() != grid.size()) throw Error(ErrorKind::shape, "profile sizes differ");
  check_decay(grid, I, "flux");
  return phi_from_slope(k, grid, -I / rho0);
}

std::valarray<double> phi2_source(const LayerProfile& R0, double phi0_dd) {
  return -R0.grid.derivative(R0.values * R0.grid.zeta() * phi0_dd, 1);
}

}  // namespace eklab
