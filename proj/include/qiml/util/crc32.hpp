#pragma once

#include <cstddef>
#include <cstdint>

namespace qiml {

// CRC-32 (IEEE 802.3, polynomial 0xEDB88320), used as the trailing
// checksum of the QIMD and QIMS binary formats.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace qiml
