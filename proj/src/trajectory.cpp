#include "eklab/trajectory.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "eklab/snapshot.hpp"

namespace eklab {

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  std::ostringstream os;
  for (unsigned char c : md) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

TrajectoryWriter::TrajectoryWriter(std::filesystem::path dir, RunInfo info) : dir_(std::move(dir)), info_(std::move(info)) {
  std::filesystem::create_directories(dir_);
}

void TrajectoryWriter::checkpoint(const FluidState& s) {
  if (count_ == 0) grid_ = s.grid();
  Entry e{s.t, {}};
  const std::string stem = "state_" + std::to_string(count_);
  e.files.push_back(stem + "_rho.ekfs");
  write_snapshot(dir_ / e.files.back(), s.rho);
  for (int a = 0; a < s.u.dim(); ++a) {
    e.files.push_back(stem + "_u" + std::to_string(a) + ".ekfs");
    write_snapshot(dir_ / e.files.back(), s.u[a]);
  }
  entries_.push_back(std::move(e));
  ++count_;
  flush_manifest();
}

void TrajectoryWriter::flush_manifest() const {
  nlohmann::json j;
  j["eps"] = info_.eps;
  j["laws"] = {{"pressure", info_.laws.pressure.name()}, {"capillarity", info_.laws.capillarity.name()}};
  nlohmann::json g;
  g["kind"] = to_string(grid_.kind());
  for (int a = 0; a < grid_.dim(); ++a) {
    g["points"].push_back(grid_.points(a));
    g["length"].push_back(grid_.length(a));
    g["spacing"].push_back(grid_.spacing(a));
  }
  j["grid"] = g;
  j["dt"] = info_.dt;
  j["scheme"] = info_.scheme;
  j["config_hash"] = git_blob_hash(info_.config_text);
  for (const auto& e : entries_) j["checkpoints"].push_back({{"t", e.t}, {"files", e.files}});
  std::ofstream os(dir_ / "manifest.json");
  if (!os) throw Error(ErrorKind::io, "cannot write manifest in " + dir_.string());
  os << j.dump(2) << '\n';
}

FluidState read_checkpoint(const std::filesystem::path& dir, std::size_t index) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw Error(ErrorKind::io, "missing manifest in " + dir.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, std::string("bad manifest: ") + e.what());
  }
  const auto& cps = j.at("checkpoints");
  if (index >= cps.size()) throw Error(ErrorKind::io, "checkpoint index out of range");
  const auto files = cps[index].at("files").get<std::vector<std::string>>();
  FluidState s;
  s.rho = std::get<ScalarField>(read_snapshot(dir / files.at(0)));
  std::vector<ScalarField> u;
  for (std::size_t i = 1; i < files.size(); ++i) u.push_back(std::get<ScalarField>(read_snapshot(dir / files[i])));
  s.u = VectorField(std::move(u));
  s.t = cps[index].at("t").get<double>();
  return s;
}

}  // namespace eklab
