// Strict INI parsing against the experiment key schema.
#include "twistlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool parse_int(const std::string& s, long long& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e && b != e;
}

bool parse_real(const std::string& s, double& v) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && p == e && b != e && std::isfinite(v);
}

const KeySpec* find_spec(const std::string& section, const std::string& key) {
  for (const auto& k : config_schema())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(config_schema().begin(), config_schema().end(),
                     [&](const KeySpec& k) { return k.section == section; });
}

// Empty string on success, otherwise a description of the problem.
std::string validate(const KeySpec& spec, const std::string& value) {
  long long iv;
  double rv;
  switch (spec.type) {
    case ValueType::Int:
      return parse_int(value, iv) ? "" : "expected an integer, got '" + value + "'";
    case ValueType::Real:
      return parse_real(value, rv) ? "" : "expected a finite real number, got '" + value + "'";
    case ValueType::Bool:
      return value == "true" || value == "false" ? "" : "expected true or false, got '" + value + "'";
    case ValueType::String:
      return "";
    case ValueType::RealList:
      for (const auto& item : split_list(value))
        if (!parse_real(item, rv)) return "expected a comma-separated list of reals, bad item '" + item + "'";
      return "";
    case ValueType::IntList:
      for (const auto& item : split_list(value))
        if (!parse_int(item, iv)) return "expected a comma-separated list of integers, bad item '" + item + "'";
      return "";
    case ValueType::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) != spec.choices.end()) return "";
      {
        std::string msg = "expected one of";
        for (const auto& c : spec.choices) msg += " " + c;
        return msg + ", got '" + value + "'";
      }
  }
  return "";
}

const KeySpec& require_spec(const std::string& section, const std::string& key) {
  const KeySpec* s = find_spec(section, key);
  if (!s) throw ConfigError("no configuration key [" + section + "] " + key);
  return *s;
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  using T = ValueType;
  static const std::vector<KeySpec> schema = {
      {"surface", "file", T::String, "", {}, "surface description file, relative to the config file"},
      {"grid", "m", T::Int, "27", {}, "cells per square side (odd)"},
      {"eigen", "K", T::Int, "20", {}, "number of lowest eigenpairs"},
      {"eigen", "tol", T::Real, "1e-10", {}, "eigenpair residual tolerance"},
      {"eigen", "seed", T::Int, "0", {}, "seed of the eigensolver start block"},
      {"eigen", "cache", T::Bool, "true", {}, "read and write the eigenbasis cache"},
      {"eigen", "cache_dir", T::String, "", {}, "cache directory; empty means <output dir>/cache"},
      {"field", "kind", T::Choice, "mode", {"mode", "constant", "random", "bump"}, "right-hand side f"},
      {"field", "k", T::Int, "1", {}, "mode: x frequency of exp(2 pi i (k x + l y)) in every square"},
      {"field", "l", T::Int, "0", {}, "mode: y frequency"},
      {"field", "value_re", T::Real, "1", {}, "constant: real part"},
      {"field", "value_im", T::Real, "0", {}, "constant: imaginary part"},
      {"field", "band", T::Int, "2", {}, "random: largest |k|, |l| of the random modes"},
      {"field", "seed", T::Int, "0", {}, "random: seed of the Gaussian coefficients"},
      {"field", "square", T::Int, "0", {}, "bump: square holding the bump"},
      {"field", "center_x", T::Real, "0.5", {}, "bump: centre x"},
      {"field", "center_y", T::Real, "0.5", {}, "bump: centre y"},
      {"field", "radius", T::Real, "0.4", {}, "bump: radius (at most 0.5)"},
      {"solve", "theta", T::Real, "0.5923", {}, "flow direction"},
      {"solve", "sigma", T::Real, "1", {}, "twist parameter"},
      {"solve", "twist_mode", T::Choice, "raw", {"raw", "cos_scaled"}, "twist sigma or sigma cos(theta)"},
      {"solve", "method", T::Choice, "lsq", {"lsq", "resolvent"}, "solution method"},
      {"solve", "lsq_tol", T::Real, "1e-10", {}, "relative residual tolerance of the least-squares solve"},
      {"solve", "rank_tol", T::Real, "1e-8", {}, "relative singular-value threshold for the cokernel"},
      {"solve", "boundary_tol", T::Real, "1e-6", {}, "Cauchy tolerance of the rho -> 1 limit"},
      {"solve", "rho_schedule", T::RealList,
       "0.9, 0.99, 0.999, 0.9999, 0.99999, 0.999999, 0.9999999, 0.99999999, 0.999999999", {},
       "radii of the resolvent limit"},
      {"solve", "r", T::Real, "4", {}, "order of the solution norm"},
      {"solve", "s", T::Real, "7.5", {}, "order of the data norm"},
      {"solve", "seed", T::Int, "0", {}, "seed of the cokernel computation"},
      {"solve", "J_seed", T::Int, "0", {}, "seed of the deficiency isometry J (0 is the identity)"},
      {"scan", "theta_n", T::Int, "64", {}, "number of half-shifted uniform theta points"},
      {"scan", "theta_lo", T::Real, "0", {}, "lower end of the theta interval"},
      {"scan", "theta_hi", T::Real, "6.283185307179586", {}, "upper end of the theta interval"},
      {"scan", "theta_list", T::RealList, "", {}, "explicit theta values; overrides theta_n"},
      {"scan", "p_list", T::RealList, "0.6", {}, "exponents of the empirical L^p statistics"},
      {"scan", "sigma_list", T::RealList, "0, 0.5, 1", {}, "sigma values of the invariants command"},
      {"weyl", "lambda_lo", T::Real, "50", {}, "lower end of the counting window"},
      {"weyl", "lambda_hi", T::Real, "400", {}, "upper end of the counting window"},
      {"weyl", "points", T::Int, "40", {}, "number of counting points"},
      {"beurling", "sigma", T::Real, "0", {}, "twist of the partial isometry"},
      {"beurling", "J_seed", T::Int, "0", {}, "seed of J (0 is the identity)"},
      {"beurling", "probes", T::Int, "20", {}, "random probes of the unitarity check"},
      {"beurling", "probe_seed", T::Int, "1", {}, "seed of the probes"},
      {"beurling", "n_atoms", T::Int, "4", {}, "atoms of the random measure"},
      {"beurling", "measure_seed", T::Int, "0", {}, "seed of the random measure"},
      {"beurling", "alpha", T::Real, "0.5", {}, "aperture of the cones"},
      {"beurling", "radial_samples", T::Int, "12", {}, "radial samples per cone"},
      {"beurling", "theta_n", T::Int, "256", {}, "boundary points of the maximal-function scan"},
      {"beurling", "t_n", T::Int, "32", {}, "levels of the weak-type check"},
      {"product", "c", T::Real, "0.37", {}, "circle speed"},
      {"product", "n_max", T::Int, "8", {}, "largest circle mode"},
      {"product", "convention", T::Choice, "cos_scaled", {"cos_scaled", "plain"}, "circle twist convention"},
      {"product", "chi_center", T::Real, "0.5", {}, "centre of the circle bump chi"},
      {"product", "chi_width", T::Real, "0.6", {}, "support width of chi"},
      {"product", "norm_s", T::Int, "2", {}, "surface order of the product norm"},
      {"product", "norm_nu", T::Int, "1", {}, "circle order of the product norm"},
      {"product", "section_phi", T::RealList, "0, 0.25, 0.5, 0.75", {}, "sections tabulated by the product command; F = f(x) chi(phi)"},
      {"timetau", "phi0", T::Real, "0", {}, "section position; chi must vanish there"},
      {"timetau", "samples", T::Int, "16", {}, "check points on the section"},
      {"timetau", "sample_seed", T::Int, "3", {}, "seed of the check points"},
      {"timetau", "levels_m", T::IntList, "9, 27", {}, "grid sizes of the refinement levels"},
      {"timetau", "levels_n", T::IntList, "8, 16", {}, "n_max of the refinement levels"},
      {"output", "dir", T::String, "out", {}, "output directory, relative to the working directory"},
  };
  return schema;
}

ExperimentConfig::ExperimentConfig() {
  for (const auto& k : config_schema()) {
    values_[k.section][k.key] = k.default_value;
    explicit_[k.section][k.key] = false;
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::string& source) {
  ExperimentConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of any section");
    if (!find_spec(section, key)) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (cfg.explicit_[section][key]) throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    cfg.set(section, key, value, where);
    if (end == text.size()) break;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg = parse(ss.str(), path);
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  cfg.base_dir_ = parent.empty() ? "." : parent.string();
  return cfg;
}

void ExperimentConfig::set(const std::string& section, const std::string& key, const std::string& value,
                           const std::string& where) {
  const KeySpec* spec = find_spec(section, key);
  if (!spec) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
  std::string problem = validate(*spec, value);
  if (!problem.empty()) throw ConfigError(where + ": [" + section + "] " + key + ": " + problem);
  values_[section][key] = value;
  explicit_[section][key] = true;
}

const std::string& ExperimentConfig::raw(const std::string& section, const std::string& key) const {
  require_spec(section, key);
  return values_.at(section).at(key);
}

bool ExperimentConfig::is_set(const std::string& section, const std::string& key) const {
  require_spec(section, key);
  return explicit_.at(section).at(key);
}

long long ExperimentConfig::get_int(const std::string& section, const std::string& key) const {
  long long v = 0;
  parse_int(raw(section, key), v);
  return v;
}

std::uint64_t ExperimentConfig::get_seed(const std::string& section, const std::string& key) const {
  long long v = get_int(section, key);
  if (v < 0) throw ConfigError("[" + section + "] " + key + ": seeds must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

double ExperimentConfig::get_real(const std::string& section, const std::string& key) const {
  double v = 0.0;
  parse_real(raw(section, key), v);
  return v;
}

bool ExperimentConfig::get_bool(const std::string& section, const std::string& key) const {
  return raw(section, key) == "true";
}

std::vector<double> ExperimentConfig::get_reals(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(section, key))) {
    double v = 0.0;
    parse_real(item, v);
    out.push_back(v);
  }
  return out;
}

std::vector<long long> ExperimentConfig::get_ints(const std::string& section, const std::string& key) const {
  std::vector<long long> out;
  for (const auto& item : split_list(raw(section, key))) {
    long long v = 0;
    parse_int(item, v);
    out.push_back(v);
  }
  return out;
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  std::string section;
  for (const auto& k : config_schema()) {
    if (k.section == "output") continue;
    if (k.section != section) {
      if (!section.empty()) os << "\n";
      section = k.section;
      os << "[" << section << "]\n";
    }
    os << k.key << " = " << values_.at(k.section).at(k.key) << "\n";
  }
  return os.str();
}

std::string ExperimentConfig::resolve_path(const std::string& p) const {
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_dir_) / path).lexically_normal().string();
}

std::string config_reference() {
  std::ostringstream os;
  std::string section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      if (!section.empty()) os << "\n";
      section = k.section;
      os << "[" << section << "]\n";
    }
    os << "# " << k.help;
    if (k.type == ValueType::Choice) {
      os << " (";
      for (std::size_t i = 0; i < k.choices.size(); ++i) os << (i ? " | " : "") << k.choices[i];
      os << ")";
    }
    os << "\n" << k.key << " = " << k.default_value << "\n";
  }
  return os.str();
}

}  // namespace twistlab
