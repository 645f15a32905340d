#include "eklab/jet.hpp"

#include <fstream>
#include <sstream>

#include "eklab/ops.hpp"
#include "eklab/snapshot.hpp"

namespace eklab {

namespace {

const std::valarray<double>& values_of(const ScalarField& f) { return f.values(); }
const std::valarray<double>& values_of(const std::valarray<double>& f) { return f; }

template <class T>
T pointwise(const T& x, const std::function<double(double)>& f) {
  T out = x;
  auto& v = [&]() -> std::valarray<double>& {
    if constexpr (std::is_same_v<T, ScalarField>) return out.values();
    else return out;
  }();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(v[i]);
  return out;
}

template <class T>
EpsilonJet<T> compose_impl(const SmoothMap& g, const EpsilonJet<T>& a) {
  const T& a0 = a[0];
  const auto& v = values_of(a0);
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!g.valid(v[i])) bad.push_back(i);
  if (!bad.empty()) {
    std::ostringstream os;
    os << g.name << " evaluated outside its validity interval at " << bad.size() << " node(s):";
    for (std::size_t j = 0; j < std::min<std::size_t>(bad.size(), 5); ++j) os << ' ' << bad[j] << " (" << v[bad[j]] << ")";
    throw Error(ErrorKind::domain, os.str());
  }
  const int n = a.order();
  auto out = EpsilonJet<T>::constant(pointwise<T>(a0, [&](double x) { return g(x, 0); }), n);
  if (n == 0) return out;
  EpsilonJet<T> h = a;
  h[0] = T(a0 * 0.0);
  EpsilonJet<T> hp = h;
  double fact = 1.0;
  for (int m = 1; m <= n; ++m) {
    fact *= m;
    const T cm = pointwise<T>(a0, [&](double x) { return g(x, m) / fact; });
    // h^m starts at eps^m.
    for (int k = m; k <= n; ++k) out[k] += T(cm * hp[k]);
    if (m < n) hp = jet_mul(hp, h);
  }
  return out;
}

}  // namespace

ScalarJet jet_compose(const SmoothMap& g, const ScalarJet& a) { return compose_impl(g, a); }
NodeJet jet_compose(const SmoothMap& g, const NodeJet& a) { return compose_impl(g, a); }

ScalarJet jet_derivative(const ScalarJet& a, int axis, int order) {
  return a.map([&](const ScalarField& f) { return derivative(f, axis, order); });
}

VectorJet jet_gradient(const ScalarJet& a) {
  return a.map([](const ScalarField& f) { return gradient(f); });
}

ScalarJet jet_divergence(const VectorJet& a) {
  return a.map([](const VectorField& f) { return divergence(f); });
}

ScalarJet jet_laplacian(const ScalarJet& a) {
  return a.map([](const ScalarField& f) { return laplacian(f); });
}

EkResidual ek_residual_jet(const ScalarJet& rho, const VectorJet& u, const Laws& laws, const ScalarJet& rho_t,
                           const VectorJet& u_t) {
  const int d = u[0].dim();
  ScalarJet mass = rho_t + jet_divergence(jet_mul(rho, u));

  VectorJet adv = VectorJet::zero(u[0], u.order());
  for (int j = 0; j < d; ++j) {
    const ScalarJet uj = u.map([j](const VectorField& v) { return v[j]; });
    const VectorJet du = u.map([j](const VectorField& v) {
      std::vector<ScalarField> c;
      for (int i = 0; i < v.dim(); ++i) c.push_back(derivative(v[i], j, 1));
      return VectorField(std::move(c));
    });
    adv += jet_mul(uj, du);
  }

  const ScalarJet gr = jet_compose(laws.pressure.as_map(), rho);
  const SmoothMap K = laws.capillarity.as_map();
  SmoothMap Kp = K;
  Kp.eval = [K](double x, int k) { return K(x, k + 1); };
  const VectorJet grad_rho = jet_gradient(rho);
  const ScalarJet cap = jet_mul(jet_compose(K, rho), jet_laplacian(rho)) +
                        0.5 * jet_mul(jet_compose(Kp, rho), jet_dot(grad_rho, grad_rho));
  VectorJet momentum = u_t + adv + jet_gradient(gr) - jet_gradient(cap).shift(2);
  return {std::move(mass), std::move(momentum)};
}

namespace {

void write_header(const std::filesystem::path& dir, int order, const char* kind, int comps) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / "jet.txt");
  if (!os) throw Error(ErrorKind::io, "cannot write jet header in " + dir.string());
  os << "EKJET 1\norder " << order << "\nkind " << kind << "\ncomponents " << comps << "\n";
}

std::filesystem::path coeff_path(const std::filesystem::path& dir, int k, int c) {
  return dir / ("coeff_" + std::to_string(k) + "_" + std::to_string(c) + ".ekfs");
}

struct JetHeader {
  int order = 0;
  std::string kind;
  int comps = 1;
};

JetHeader read_header(const std::filesystem::path& dir) {
  std::ifstream is(dir / "jet.txt");
  if (!is) throw Error(ErrorKind::io, "missing jet header in " + dir.string());
  std::string magic, key;
  int version = 0;
  JetHeader h;
  is >> magic >> version >> key >> h.order >> key >> h.kind >> key >> h.comps;
  if (!is || magic != "EKJET" || version != 1) throw Error(ErrorKind::io, "malformed jet header in " + dir.string());
  return h;
}

}  // namespace

void write_jet(const std::filesystem::path& dir, const ScalarJet& jet) {
  write_header(dir, jet.order(), "scalar", 1);
  for (int k = 0; k <= jet.order(); ++k) write_snapshot(coeff_path(dir, k, 0), jet[k]);
}

void write_jet(const std::filesystem::path& dir, const VectorJet& jet) {
  write_header(dir, jet.order(), "vector", jet[0].dim());
  for (int k = 0; k <= jet.order(); ++k)
    for (int c = 0; c < jet[k].dim(); ++c) write_snapshot(coeff_path(dir, k, c), jet[k][c]);
}

ScalarJet read_scalar_jet(const std::filesystem::path& dir) {
  const auto h = read_header(dir);
  if (h.kind != "scalar") throw Error(ErrorKind::io, "jet in " + dir.string() + " is not scalar");
  std::vector<ScalarField> c;
  for (int k = 0; k <= h.order; ++k) c.push_back(std::get<ScalarField>(read_snapshot(coeff_path(dir, k, 0))));
  return ScalarJet(std::move(c));
}

VectorJet read_vector_jet(const std::filesystem::path& dir) {
  const auto h = read_header(dir);
  if (h.kind != "vector") throw Error(ErrorKind::io, "jet in " + dir.string() + " is not a vector jet");
  std::vector<VectorField> c;
  for (int k = 0; k <= h.order; ++k) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < h.comps; ++i) comps.push_back(std::get<ScalarField>(read_snapshot(coeff_path(dir, k, i))));
    c.emplace_back(std::move(comps));
  }
  return VectorJet(std::move(c));
}

}  // namespace eklab
