// Binary eigenbasis cache with a CRC-64 trailer.
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "twistlab/errors.hpp"
#include "twistlab/spectral.hpp"
#include "twistlab/surface_io.hpp"

namespace twistlab {

static_assert(std::endian::native == std::endian::little,
              "the cache format is written in host byte order");

namespace {

constexpr char kMagic[4] = {'F', 'L', 'T', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::vector<unsigned char>& buf, const T& value) {
  const auto* p = reinterpret_cast<const unsigned char*>(&value);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw CacheError("cache file truncated");
  T value;
  std::memcpy(&value, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_eigenbasis(const std::string& path, const EigenBasis& basis) {
  std::vector<unsigned char> buf;
  const std::uint64_t rows = static_cast<std::uint64_t>(basis.vectors.rows());
  const std::uint64_t k = static_cast<std::uint64_t>(basis.size());
  buf.reserve(32 + 8 * k + 16 * rows * k + 8);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put(buf, kVersion);
  put(buf, static_cast<std::uint64_t>(basis.n_squares));
  put(buf, static_cast<std::uint64_t>(basis.m));
  put(buf, k);
  for (std::uint64_t i = 0; i < k; ++i) put(buf, basis.eigenvalues(static_cast<int>(i)));
  for (std::uint64_t c = 0; c < k; ++c)
    for (std::uint64_t r = 0; r < rows; ++r) {
      Complex z = basis.vectors(static_cast<int>(r), static_cast<int>(c));
      put(buf, z.real());
      put(buf, z.imag());
    }
  put(buf, crc64(buf.data(), buf.size()));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CacheError("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw CacheError("write to " + path + " failed");
}

EigenBasis read_eigenbasis(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CacheError("cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 4 + 4 + 24 + 8) throw CacheError("cache file " + path + " too short");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) throw CacheError("bad magic in " + path);
  std::size_t tail = buf.size() - 8;
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + tail, 8);
  if (crc64(buf.data(), tail) != stored) throw CacheError("checksum mismatch in " + path);
  std::size_t pos = 4;
  if (get<std::uint32_t>(buf, pos) != kVersion) throw CacheError("unsupported cache version");
  std::uint64_t n = get<std::uint64_t>(buf, pos);
  std::uint64_t m = get<std::uint64_t>(buf, pos);
  std::uint64_t k = get<std::uint64_t>(buf, pos);
  std::uint64_t rows = n * m * m;
  if (tail - pos != 8 * k + 16 * rows * k) throw CacheError("payload size mismatch in " + path);
  EigenBasis basis;
  basis.n_squares = static_cast<int>(n);
  basis.m = static_cast<int>(m);
  basis.eigenvalues.resize(static_cast<int>(k));
  for (std::uint64_t i = 0; i < k; ++i) basis.eigenvalues(static_cast<int>(i)) = get<double>(buf, pos);
  basis.vectors.resize(static_cast<int>(rows), static_cast<int>(k));
  for (std::uint64_t c = 0; c < k; ++c)
    for (std::uint64_t r = 0; r < rows; ++r) {
      double re = get<double>(buf, pos);
      double im = get<double>(buf, pos);
      basis.vectors(static_cast<int>(r), static_cast<int>(c)) = Complex(re, im);
    }
  return basis;
}

}  // namespace twistlab
