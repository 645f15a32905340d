#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "eklab/errors.hpp"
#include "eklab/laws.hpp"

namespace eklab {

// Config text: one `key = value` per line, `#` starts a comment. Values are
// numbers, true/false, "quoted" or bare-word strings, and [number, ...] lists.

struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<double>> value;
  int line = 0;
  int column = 0;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0);
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

/// Parsed key-value file; keys keep their source position for error messages.
class ConfigFile {
 public:
  static ConfigFile parse(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, ConfigValue>& values() const noexcept { return values_; }
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const;
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  std::vector<double> list(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) const;

 private:
  const ConfigValue* find(const std::string& key) const;
  std::map<std::string, ConfigValue> values_;
};

enum class Scenario {
  fullspace_convergence,
  cascade_residual,
  madelung_compare,
  layer_profiles,
  halfspace_residual,
  energy_audit,
  dispersion,
};

const char* to_string(Scenario s) noexcept;
Scenario scenario_from_string(const std::string& name);

struct ExperimentConfig {
  Scenario scenario = Scenario::dispersion;
  std::vector<double> eps;
  Laws laws;
  std::size_t points = 128;
  double length = 0.0;  // 0: 2 pi (periodic) or 40 (half-line)
  int N = 1;
  double horizon = 1.0;
  double dt = 0.0;
  double tolerance = 0.0;  // 0: scenario default
  std::optional<double> expected_order;
  double band = 0.3;
  std::optional<double> slope_min, slope_max;
  bool rank1 = true;
  double amplitude = 0.2;
  std::vector<double> modes{1, 2, 4};
  int energy_order = 1;
  double rho_bar = 1.21;
  double phi_dd = 0.3;
  unsigned workers = 0;  // 0: hardware concurrency
  std::filesystem::path out = "out";
  std::string text;      // the source, echoed into the manifest

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct RateFit {
  std::vector<std::pair<double, double>> pairs;
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of the 95% confidence interval of the slope.
  double residual95 = 0.0;
  double rms_residual = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass = false;
};

/// Least squares on (log eps, log error); pass iff lo <= slope <= hi.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs, double lo, double hi);

struct Assertion {
  std::string name;
  double value = 0.0;
  std::string bound;
  bool pass = false;
};

struct ScenarioResult {
  Scenario scenario = Scenario::dispersion;
  std::vector<Assertion> assertions;
  std::vector<RateFit> fits;
  std::vector<std::filesystem::path> files;
  bool pass() const;
  const Assertion* first_failure() const;
};

/// Runs the scenario and writes CSVs, SVGs, summary.txt and manifest.json into `out`.
ScenarioResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                              const std::string& command = "sweep");

/// 0 pass, 2 assertion failure, 3 config error, 4 numerical abort.
int exit_code_for(const std::exception& e) noexcept;

/// fn(i) for i in [0, count) on up to `workers` threads; results come back in index order.
/// The exception of the lowest failing index is rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t count, unsigned workers, const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  std::vector<R> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
};

/// Static line plot with axes, ticks and a legend.
void write_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace eklab
