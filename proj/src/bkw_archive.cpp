#include <fstream>

#include <nlohmann/json.hpp>

#include "eklab/bkw.hpp"
#include "eklab/trajectory.hpp"

namespace eklab {

void write_expansion(const std::filesystem::path& dir, const BKWExpansion& ex, const ResidualReport* report) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["N"] = ex.N;
  j["T"] = ex.T;
  j["grid"] = ex.grid().describe();
  j["laws"] = {{"pressure", ex.laws.pressure.name()}, {"capillarity", ex.laws.capillarity.name()}};
  for (int k = 0; k <= ex.N; ++k) {
    const History& h = ex.interior[k];
    const std::string name = "rank_" + std::to_string(k);
    RunInfo info;
    info.eps = 0.0;
    info.laws = ex.laws;
    info.dt = h.dt();
    info.scheme = k == 0 ? "euler" : "linearized";
    TrajectoryWriter w(dir / name, info);
    for (const auto& s : h.states()) w.checkpoint(s);
    j["ranks"].push_back({{"rank", k}, {"dir", name}, {"t0", h.t0()}, {"dt", h.dt()}, {"steps", h.size()},
                          {"horizon", h.t_end()}});
  }
  if (report) {
    for (const auto& s : report->samples)
      j["residual"]["samples"].push_back({{"eps", s.eps}, {"mass", s.mass}, {"momentum", s.momentum}});
    j["residual"]["mass_order"] = report->mass_order;
    j["residual"]["momentum_order"] = report->momentum_order;
  }
  std::ofstream os(dir / "manifest.json");
  if (!os) throw Error(ErrorKind::io, "cannot write " + (dir / "manifest.json").string());
  os << j.dump(2) << '\n';
}

BKWExpansion read_expansion(const std::filesystem::path& dir, const Laws& laws) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw Error(ErrorKind::io, "missing manifest in " + dir.string());
  nlohmann::json j;
  try {
    is >> j;
    BKWExpansion ex;
    ex.N = j.at("N").get<int>();
    ex.T = j.at("T").get<double>();
    ex.laws = laws;
    for (const auto& r : j.at("ranks")) {
      History h(r.at("t0").get<double>(), r.at("dt").get<double>());
      const auto n = r.at("steps").get<std::size_t>();
      for (std::size_t i = 0; i < n; ++i) h.push(read_checkpoint(dir / r.at("dir").get<std::string>(), i));
      ex.interior.push_back(std::move(h));
    }
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad expansion manifest: ") + e.what());
  }
}

}  // namespace eklab
