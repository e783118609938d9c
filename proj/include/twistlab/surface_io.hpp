// Surface description files and content hashing.
//
// Format (one key per line, '#' starts a comment):
//   n_squares = 3
//   perm_right = (0 1)(2)
//   perm_up = [2, 1, 0]
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "twistlab/origami.hpp"

namespace twistlab {

// Parses surface text; `source` names the input in diagnostics.
// Throws ParseError with "source:line:column: message".
Origami parse_surface(std::string_view text, const std::string& source = "<string>");
Origami load_surface(const std::string& path);

// CRC-64/XZ of a byte range.
std::uint64_t crc64(const void* data, std::size_t size);
std::uint64_t crc64(std::string_view text);
std::string hex64(std::uint64_t value);

// Hash of the canonical description, independent of file formatting.
std::uint64_t surface_hash(const Origami& o);

}  // namespace twistlab
