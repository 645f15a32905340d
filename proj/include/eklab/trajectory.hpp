#pragma once

#include <filesystem>
#include <string>

#include "eklab/ek.hpp"

namespace eklab {

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
std::string git_blob_hash(const std::string& content);

struct RunInfo {
  double eps = 0.0;
  Laws laws;
  double dt = 0.0;
  std::string scheme = "rk4-spectral";
  /// Configuration text the run was started from; hashed into the manifest.
  std::string config_text;
};

/// Writes field snapshots per checkpoint plus <dir>/manifest.json.
class TrajectoryWriter {
 public:
  TrajectoryWriter(std::filesystem::path dir, RunInfo info);
  void checkpoint(const FluidState& s);
  std::size_t count() const noexcept { return count_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  void flush_manifest() const;
  std::filesystem::path dir_;
  RunInfo info_;
  std::size_t count_ = 0;
  struct Entry {
    double t;
    std::vector<std::string> files;
  };
  std::vector<Entry> entries_;
  Grid grid_ = Grid::periodic1d(1.0, 2);
};

FluidState read_checkpoint(const std::filesystem::path& dir, std::size_t index);

}  // namespace eklab
