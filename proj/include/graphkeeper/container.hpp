#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphkeeper/numerics.hpp"

namespace gk {

// Binary matrix container:
//   "GKMX" | version u16 | rows u32 | cols u32 | rows*cols f64 (row-major)
//   | CRC32 of the payload u32
// All integers and reals little-endian.
inline constexpr std::uint16_t kContainerVersion = 1;

std::vector<std::uint8_t> encode_matrix(const Matrix& m);
// `origin` names the source in error messages.
Matrix decode_matrix(const std::vector<std::uint8_t>& bytes, const std::string& origin);

void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size);

}  // namespace gk
