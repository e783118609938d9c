// Result files: shortest round-trip number formatting, RFC-4180 CSV with a
// '#' preamble carrying the configuration echo, and JSON documents.
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "twistlab/types.hpp"

namespace twistlab {

// Shortest decimal that parses back to the same double.
std::string format_double(double x);
// Quotes a CSV field when it contains a comma, quote, CR or LF.
std::string csv_field(const std::string& s);

struct Provenance {
  std::string command;
  std::string config_echo;
  std::string surface_hash;  // CRC-64 of the surface file bytes, hex
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Provenance& prov, const std::vector<std::string>& header);
  CsvWriter& add(const std::string& s);
  CsvWriter& add(double x);
  CsvWriter& add(long long x);
  CsvWriter& add(int x) { return add(static_cast<long long>(x)); }
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::vector<std::string> row_;
  std::size_t columns_;
};

// Writes `json_text` (already serialized) with a trailing newline.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace twistlab
