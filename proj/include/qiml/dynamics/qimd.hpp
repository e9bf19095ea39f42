#pragma once

#include <string>

#include "qiml/dynamics/field_series.hpp"

namespace qiml {

enum class QimdDtype : std::uint8_t { F32 = 0, F64 = 1 };

// QIMD binary dataset file:
//   magic "QIMD", u16 version, u8 rank (1|2), u32 dims (cols for 1D,
//   rows then cols for 2D), u32 n_trajectories, u32 n_frames, f64 dt,
//   u8 dtype tag, little-endian payload in [traj][frame][row][col]
//   order, trailing CRC32 over header+payload.
void write_field_series(const FieldSeries& series, const std::string& path,
                        QimdDtype dtype = QimdDtype::F64);

// Validated read: bad magic/version/CRC and NaN payload are format
// errors naming the byte offset where possible.
FieldSeries ingest_field_series(const std::string& path);

// Dry-run size estimate in bytes for a dataset of the given shape.
std::uint64_t qimd_size_estimate(std::size_t n_trajectories, std::size_t n_frames,
                                 std::size_t rows, std::size_t cols,
                                 QimdDtype dtype = QimdDtype::F64);

}  // namespace qiml
