// Experiment configuration: a strict INI dialect with a fixed key schema.
//
//   # comment            ; comment
//   [section]
//   key = value          # trailing comments allowed
//
// Every key must be declared in the schema; unknown sections or keys,
// duplicates and malformed values are fatal with "path:line: message".
// Lists are comma separated. The effective configuration (defaults plus
// file values) is echoed verbatim into every output file.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace twistlab {

enum class ValueType { Int, Real, Bool, String, RealList, IntList, Choice };

struct KeySpec {
  std::string section;
  std::string key;
  ValueType type;
  std::string default_value;
  std::vector<std::string> choices;  // for Choice
  std::string help;
};

const std::vector<KeySpec>& config_schema();

class ExperimentConfig {
 public:
  ExperimentConfig();  // all defaults

  static ExperimentConfig parse(std::string_view text, const std::string& source = "<string>");
  static ExperimentConfig load(const std::string& path);

  // Sets a value with full validation; `where` prefixes diagnostics.
  void set(const std::string& section, const std::string& key, const std::string& value,
           const std::string& where = "<override>");

  const std::string& raw(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_seed(const std::string& section, const std::string& key) const;
  double get_real(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_reals(const std::string& section, const std::string& key) const;
  std::vector<long long> get_ints(const std::string& section, const std::string& key) const;
  bool is_set(const std::string& section, const std::string& key) const;

  // Canonical INI text of the effective configuration.
  std::string echo() const;
  // Directory of the config file, used to resolve relative paths.
  const std::string& base_dir() const { return base_dir_; }
  std::string resolve_path(const std::string& p) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::map<std::string, std::map<std::string, bool>> explicit_;
  std::string base_dir_ = ".";
};

// Documentation of the schema in the INI dialect itself.
std::string config_reference();

}  // namespace twistlab
