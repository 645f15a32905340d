#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "eklab/harness.hpp"

namespace eklab {

namespace {

std::string where(int line, int column) {
  if (line <= 0) return "";
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

class LineParser {
 public:
  LineParser(const std::string& s, int line) : s_(s), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(what, line_, col()); }
  int col() const { return static_cast<int>(pos_) + 1; }
  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  std::string key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  double number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '-' || s_[pos_] == '+'))
      ++pos_;
    const std::string tok = s_.substr(start, pos_ - start);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || end != tok.data() + tok.size() || !std::isfinite(v)) {
      pos_ = start;
      fail("malformed number '" + tok + "'");
    }
    return v;
  }

  ConfigValue value() {
    skip_space();
    ConfigValue out;
    out.line = line_;
    out.column = col();
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string str;
      while (pos_ < s_.size() && s_[pos_] != '"') str += s_[pos_++];
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      out.value = str;
    } else if (c == '[') {
      ++pos_;
      std::vector<double> items;
      skip_space();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(number());
          skip_space();
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail("expected ',' or ']' in list");
        }
      }
      out.value = items;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      out.value = number();
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || std::string("-_./").find(s_[pos_]) != std::string::npos))
        ++pos_;
      const std::string word = s_.substr(start, pos_ - start);
      if (word == "true" || word == "false")
        out.value = word == "true";
      else
        out.value = word;
    } else {
      fail("expected a value");
    }
    if (!done()) fail("trailing characters after value");
    return out;
  }

 private:
  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

const char* type_name(const ConfigValue& v) {
  switch (v.value.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    default: return "list";
  }
}

[[noreturn]] void wrong_type(const std::string& key, const ConfigValue& v, const char* want) {
  throw ConfigError("key '" + key + "' expects a " + std::string(want) + ", got a " + type_name(v), v.line, v.column);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "scenario", "eps",       "pressure",  "gamma",  "capillarity", "capillarity_c", "capillarity_s",
      "points",   "length",    "N",         "horizon", "dt",         "tolerance",     "expected_order",
      "band",     "slope_min", "slope_max", "rank1",  "amplitude",   "modes",         "n",
      "rho_bar",  "phi_dd",    "workers",   "out"};
  return keys;
}

bool needs_rate_fit(Scenario s) {
  return s == Scenario::fullspace_convergence || s == Scenario::cascade_residual || s == Scenario::halfspace_residual;
}

}  // namespace

ConfigError::ConfigError(const std::string& what, int line, int column)
    : Error(ErrorKind::config, where(line, column) + what), line_(line), column_(column) {}

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cf;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    LineParser p(raw, line);
    if (p.done()) continue;
    const int kcol = p.col();
    const std::string key = p.key();
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'", line, kcol);
    if (cf.values_.count(key)) throw ConfigError("duplicate key '" + key + "'", line, kcol);
    p.expect('=');
    cf.values_[key] = p.value();
  }
  return cf;
}

const ConfigValue* ConfigFile::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double ConfigFile::number(const std::string& key, std::optional<double> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  if (v->value.index() != 0) wrong_type(key, *v, "number");
  return std::get<double>(v->value);
}

int ConfigFile::integer(const std::string& key, std::optional<int> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  const double d = number(key);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("key '" + key + "' expects an integer", v->line, v->column);
  return static_cast<int>(d);
}

bool ConfigFile::boolean(const std::string& key, std::optional<bool> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  if (v->value.index() != 1) wrong_type(key, *v, "boolean");
  return std::get<bool>(v->value);
}

std::string ConfigFile::string(const std::string& key, std::optional<std::string> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  if (v->value.index() != 2) wrong_type(key, *v, "string");
  return std::get<std::string>(v->value);
}

std::vector<double> ConfigFile::list(const std::string& key, std::optional<std::vector<double>> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    throw ConfigError("missing key '" + key + "'");
  }
  if (v->value.index() != 3) wrong_type(key, *v, "list");
  return std::get<std::vector<double>>(v->value);
}

const char* to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::fullspace_convergence: return "fullspace-convergence";
    case Scenario::cascade_residual: return "cascade-residual";
    case Scenario::madelung_compare: return "madelung-compare";
    case Scenario::layer_profiles: return "layer-profiles";
    case Scenario::halfspace_residual: return "halfspace-residual";
    case Scenario::energy_audit: return "energy-audit";
    case Scenario::dispersion: return "dispersion";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& name) {
  for (auto s : {Scenario::fullspace_convergence, Scenario::cascade_residual, Scenario::madelung_compare,
                 Scenario::layer_profiles, Scenario::halfspace_residual, Scenario::energy_audit, Scenario::dispersion})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown scenario '" + name + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  const auto cf = ConfigFile::parse(text);
  ExperimentConfig c;
  c.text = text;
  const auto at = [&](const std::string& key) {
    const auto& v = cf.values().at(key);
    return std::make_pair(v.line, v.column);
  };
  const auto fail_at = [&](const std::string& key, const std::string& what) -> ConfigError {
    auto [l, col] = at(key);
    return ConfigError(what, l, col);
  };

  try {
    c.scenario = scenario_from_string(cf.string("scenario"));
  } catch (const ConfigError&) {
    if (!cf.has("scenario")) throw;
    throw fail_at("scenario", "unknown scenario '" + cf.string("scenario") + "'");
  }

  c.eps = cf.list("eps", std::vector<double>{});
  if (c.eps.empty()) {
    if (cf.has("eps")) throw fail_at("eps", "eps list is empty");
    throw ConfigError("missing key 'eps'");
  }
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (c.eps[i] < 0.0 || (c.eps[i] == 0.0 && c.scenario != Scenario::energy_audit))
      throw fail_at("eps", "eps values must be positive");
    if (i && !(c.eps[i] < c.eps[i - 1])) throw fail_at("eps", "eps list must be strictly decreasing");
  }
  if (needs_rate_fit(c.scenario) && c.eps.size() < 3) throw fail_at("eps", "a rate fit needs at least 3 eps values");

  const std::string pressure = cf.string("pressure", "gp");
  if (pressure == "gp" || pressure == "gross-pitaevskii")
    c.laws.pressure = PressureLaw::gross_pitaevskii();
  else if (pressure == "polytropic")
    c.laws.pressure = PressureLaw::polytropic(cf.number("gamma", 2.0));
  else
    throw fail_at("pressure", "unknown pressure law '" + pressure + "'");
  if (cf.has("gamma") && pressure != "polytropic") throw fail_at("gamma", "gamma needs pressure = polytropic");
  if (pressure == "polytropic" && !(c.laws.pressure.gamma() > 0.0)) throw fail_at("gamma", "gamma must be positive");

  const std::string cap = cf.string("capillarity", "quantum");
  if (cap == "quantum")
    c.laws.capillarity = CapillarityLaw::quantum();
  else if (cap == "schrodinger")
    c.laws.capillarity = CapillarityLaw::schrodinger();
  else if (cap == "constant")
    c.laws.capillarity = CapillarityLaw::constant(cf.number("capillarity_c", 1.0));
  else if (cap == "power")
    c.laws.capillarity = CapillarityLaw::power_law(cf.number("capillarity_c", 1.0), cf.number("capillarity_s", -1.0));
  else
    throw fail_at("capillarity", "unknown capillarity law '" + cap + "'");
  if (cf.has("capillarity_c") && !(c.laws.capillarity.coefficient() > 0.0))
    throw fail_at("capillarity_c", "capillarity_c must be positive");

  const auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0)) throw fail_at(key, "'" + key + "' must be positive");
    return v;
  };
  const int points = cf.integer("points", 128);
  if (points < 8) throw fail_at("points", "points must be at least 8");
  c.points = static_cast<std::size_t>(points);
  if (cf.has("length")) c.length = positive("length", cf.number("length"));
  c.N = cf.integer("N", 1);
  if (c.N < 0 || c.N > 6) throw fail_at("N", "N must lie in 0..6");
  c.horizon = cf.has("horizon") ? positive("horizon", cf.number("horizon")) : 1.0;
  if (cf.has("dt")) c.dt = positive("dt", cf.number("dt"));
  if (cf.has("tolerance")) c.tolerance = positive("tolerance", cf.number("tolerance"));
  if (cf.has("expected_order")) c.expected_order = cf.number("expected_order");
  if (cf.has("band")) c.band = positive("band", cf.number("band"));
  if (cf.has("slope_min")) c.slope_min = cf.number("slope_min");
  if (cf.has("slope_max")) c.slope_max = cf.number("slope_max");
  if (c.slope_min && c.slope_max && *c.slope_min > *c.slope_max) throw fail_at("slope_max", "slope_max < slope_min");
  c.rank1 = cf.boolean("rank1", true);
  c.amplitude = cf.has("amplitude") ? positive("amplitude", cf.number("amplitude")) : 0.2;
  c.modes = cf.list("modes", std::vector<double>{1, 2, 4});
  for (double k : c.modes)
    if (k < 1 || k != std::floor(k)) throw fail_at("modes", "modes must be positive integers");
  c.energy_order = cf.integer("n", 1);
  if (c.energy_order < 0 || c.energy_order > 3) throw fail_at("n", "n must lie in 0..3");
  if (cf.has("rho_bar")) c.rho_bar = positive("rho_bar", cf.number("rho_bar"));
  c.phi_dd = cf.number("phi_dd", 0.3);
  const int workers = cf.integer("workers", 0);
  if (workers < 0) throw fail_at("workers", "workers must be nonnegative");
  c.workers = static_cast<unsigned>(workers);
  c.out = cf.string("out", "out");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace eklab
