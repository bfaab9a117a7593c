#include "graphkeeper/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace gk {

namespace {

constexpr char kMagic[4] = {'G', 'K', 'M', 'X'};
constexpr std::size_t kHeader = 4 + 2 + 4 + 4;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
  return v;
}

}  // namespace

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length; feed large buffers in chunks.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_matrix(const Matrix& m) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) throw ValidationError("encode_matrix: matrix too large");
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kContainerVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  out.reserve(kHeader + static_cast<std::size_t>(m.size()) * 8 + 4);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(i, j)));
  put_le<std::uint32_t>(out, crc32_of(out.data() + kHeader, out.size() - kHeader));
  return out;
}

Matrix decode_matrix(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < kHeader + 4) throw DataError(origin + ": truncated matrix container");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError(origin + ": bad magic (not a GKMX container)");
  const auto version = get_le<std::uint16_t>(bytes.data() + 4);
  if (version != kContainerVersion) {
    throw DataError(origin + ": unsupported container version " + std::to_string(version) + " (expected " +
                    std::to_string(kContainerVersion) + ")");
  }
  const auto rows = get_le<std::uint32_t>(bytes.data() + 6);
  const auto cols = get_le<std::uint32_t>(bytes.data() + 10);
  const std::size_t payload = static_cast<std::size_t>(rows) * cols * 8;
  if (bytes.size() != kHeader + payload + 4) {
    throw DataError(origin + ": truncated matrix container (expected " + std::to_string(kHeader + payload + 4) +
                    " bytes, found " + std::to_string(bytes.size()) + ")");
  }
  const auto stored = get_le<std::uint32_t>(bytes.data() + kHeader + payload);
  if (stored != crc32_of(bytes.data() + kHeader, payload)) throw DataError(origin + ": checksum mismatch");
  Matrix m(rows, cols);
  const std::uint8_t* p = bytes.data() + kHeader;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j, p += 8) m(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(p));
  return m;
}

void write_matrix(const std::string& path, const Matrix& m) {
  const auto bytes = encode_matrix(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path + ": write failed");
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open matrix container");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_matrix(bytes, path);
}

}  // namespace gk
