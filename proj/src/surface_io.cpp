#include "twistlab/surface_io.hpp"

#include <boost/crc.hpp>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "twistlab/errors.hpp"

namespace twistlab {

std::uint64_t crc64(const void* data, std::size_t size) {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL,
                     true, true>
      crc;
  crc.process_bytes(data, size);
  return crc.checksum();
}

std::uint64_t crc64(std::string_view text) { return crc64(text.data(), text.size()); }

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t surface_hash(const Origami& o) { return crc64(o.describe()); }

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct Entry {
  std::string value;
  int line = 0;
  std::size_t column = 0;  // 1-based column of the value
};

[[noreturn]] void fail(const std::string& source, int line, std::size_t column,
                       const std::string& msg) {
  throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
}

}  // namespace

Origami parse_surface(std::string_view text, const std::string& source) {
  std::optional<Entry> n_entry, r_entry, u_entry;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    ++line_no;
    std::size_t hash = raw.find('#');
    std::string_view line = hash == std::string_view::npos ? raw : raw.substr(0, hash);
    if (!trim(line).empty()) {
      std::size_t eq = line.find('=');
      if (eq == std::string_view::npos) fail(source, line_no, 1, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::size_t vstart = eq + 1;
      while (vstart < line.size() && std::isspace(static_cast<unsigned char>(line[vstart]))) ++vstart;
      Entry entry{trim(line.substr(eq + 1)), line_no, vstart + 1};
      std::optional<Entry>* slot = nullptr;
      if (key == "n_squares") slot = &n_entry;
      else if (key == "perm_right") slot = &r_entry;
      else if (key == "perm_up") slot = &u_entry;
      else fail(source, line_no, 1, "unknown key '" + key + "'");
      if (slot->has_value()) fail(source, line_no, 1, "duplicate key '" + key + "'");
      if (entry.value.empty()) fail(source, line_no, entry.column, "missing value for '" + key + "'");
      *slot = entry;
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  if (!n_entry) fail(source, line_no, 1, "missing key 'n_squares'");
  if (!r_entry) fail(source, line_no, 1, "missing key 'perm_right'");
  if (!u_entry) fail(source, line_no, 1, "missing key 'perm_up'");

  int n = 0;
  {
    const std::string& v = n_entry->value;
    std::size_t pos = 0;
    while (pos < v.size() && std::isdigit(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos == 0 || pos != v.size() || pos > 6)
      fail(source, n_entry->line, n_entry->column, "n_squares must be a positive integer");
    n = std::stoi(v);
    if (n <= 0) fail(source, n_entry->line, n_entry->column, "n_squares must be positive");
  }

  auto perm = [&](const Entry& e) {
    try {
      return parse_permutation(e.value, n);
    } catch (const ParseError& err) {
      // parse_permutation reports "column C: message" relative to the value.
      std::string msg = err.what();
      std::size_t col = 1;
      if (msg.rfind("column ", 0) == 0) {
        std::size_t colon = msg.find(':');
        col = std::stoul(msg.substr(7, colon - 7));
        msg = msg.substr(colon + 2);
      }
      fail(source, e.line, e.column + col - 1, msg);
    }
  };
  Permutation r = perm(*r_entry);
  Permutation u = perm(*u_entry);
  return Origami(n, std::move(r), std::move(u));
}

Origami load_surface(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open surface file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_surface(ss.str(), path);
}

}  // namespace twistlab
