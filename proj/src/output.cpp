// CSV and number formatting for result files.
#include "twistlab/output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "twistlab/errors.hpp"

namespace twistlab {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, p);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(const std::string& path, const Provenance& prov, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path), columns_(header.size()) {
  if (!out_) throw Error(path + ": cannot open for writing");
  out_ << "# twistlab " << prov.command << "\r\n";
  out_ << "# surface_hash = " << prov.surface_hash << "\r\n";
  std::istringstream echo(prov.config_echo);
  std::string line;
  while (std::getline(echo, line)) out_ << "# " << line << "\r\n";
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << csv_field(header[i]);
  out_ << "\r\n";
}

CsvWriter& CsvWriter::add(const std::string& s) {
  row_.push_back(csv_field(s));
  return *this;
}

CsvWriter& CsvWriter::add(double x) {
  row_.push_back(format_double(x));
  return *this;
}

CsvWriter& CsvWriter::add(long long x) {
  row_.push_back(std::to_string(x));
  return *this;
}

void CsvWriter::end_row() {
  if (row_.size() != columns_) {
    throw DimensionMismatch(path_ + ": row with " + std::to_string(row_.size()) + " fields, header has " +
                            std::to_string(columns_));
  }
  for (std::size_t i = 0; i < row_.size(); ++i) out_ << (i ? "," : "") << row_[i];
  out_ << "\r\n";
  row_.clear();
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw Error(path_ + ": write failed");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  out << text << "\n";
  if (!out) throw Error(path + ": write failed");
}

}  // namespace twistlab
