#include "qiml/dynamics/qimd.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "qiml/util/crc32.hpp"

static_assert(std::endian::native == std::endian::little,
              "QIMD I/O assumes a little-endian host");

namespace qiml {

namespace {

constexpr char kMagic[4] = {'Q', 'I', 'M', 'D'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::vector<unsigned char>& buf, T v) {
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& buf, std::size_t& off) {
  if (off + sizeof(T) > buf.size())
    throw std::runtime_error("QIMD: truncated file, expected " +
                             std::to_string(off + sizeof(T)) + " bytes, have " +
                             std::to_string(buf.size()));
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

std::uint64_t qimd_size_estimate(std::size_t n_trajectories, std::size_t n_frames,
                                 std::size_t rows, std::size_t cols,
                                 QimdDtype dtype) {
  const int rank = rows > 1 ? 2 : 1;
  const std::uint64_t header = 4 + 2 + 1 + 4ull * rank + 4 + 4 + 8 + 1;
  const std::uint64_t value_bytes = dtype == QimdDtype::F64 ? 8 : 4;
  return header +
         static_cast<std::uint64_t>(n_trajectories) * n_frames * rows * cols *
             value_bytes +
         4;  // CRC32
}

void write_field_series(const FieldSeries& series, const std::string& path,
                        QimdDtype dtype) {
  series.validate();
  std::vector<unsigned char> buf;
  buf.reserve(64 + series.values.size() * (dtype == QimdDtype::F64 ? 8 : 4));
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(buf, kVersion);
  const std::uint8_t rank = series.rows > 1 ? 2 : 1;
  put<std::uint8_t>(buf, rank);
  if (rank == 2) put<std::uint32_t>(buf, static_cast<std::uint32_t>(series.rows));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(series.cols));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(series.n_trajectories));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(series.n_frames));
  put<double>(buf, series.dt);
  put<std::uint8_t>(buf, static_cast<std::uint8_t>(dtype));
  if (dtype == QimdDtype::F64) {
    for (double v : series.values) put<double>(buf, v);
  } else {
    for (double v : series.values) put<float>(buf, static_cast<float>(v));
  }
  put<std::uint32_t>(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("QIMD: cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("QIMD: write failed for " + path);
}

FieldSeries ingest_field_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("QIMD: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());

  std::size_t off = 0;
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("QIMD: bad magic in " + path);
  off = 4;
  const auto version = get<std::uint16_t>(buf, off);
  if (version != kVersion)
    throw std::runtime_error("QIMD: unsupported version " + std::to_string(version));
  const auto rank = get<std::uint8_t>(buf, off);
  if (rank != 1 && rank != 2)
    throw std::runtime_error("QIMD: bad rank " + std::to_string(rank));

  FieldSeries series;
  series.rows = (rank == 2) ? get<std::uint32_t>(buf, off) : 1;
  series.cols = get<std::uint32_t>(buf, off);
  series.n_trajectories = get<std::uint32_t>(buf, off);
  series.n_frames = get<std::uint32_t>(buf, off);
  series.dt = get<double>(buf, off);
  const auto dtype = static_cast<QimdDtype>(get<std::uint8_t>(buf, off));
  if (dtype != QimdDtype::F32 && dtype != QimdDtype::F64)
    throw std::runtime_error("QIMD: bad dtype tag");

  const std::size_t count =
      series.n_trajectories * series.n_frames * series.rows * series.cols;
  const std::size_t value_bytes = dtype == QimdDtype::F64 ? 8 : 4;
  const std::size_t expected = off + count * value_bytes + 4;
  if (buf.size() != expected)
    throw std::runtime_error("QIMD: truncated file " + path + ", expected " +
                             std::to_string(expected) + " bytes, have " +
                             std::to_string(buf.size()));

  const std::uint32_t stored_crc = [&] {
    std::size_t tail = buf.size() - 4;
    return get<std::uint32_t>(buf, tail);
  }();
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw std::runtime_error("QIMD: CRC mismatch in " + path);

  series.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v;
    if (dtype == QimdDtype::F64) {
      v = get<double>(buf, off);
    } else {
      v = get<float>(buf, off);
    }
    if (!std::isfinite(v))
      throw std::runtime_error("QIMD: non-finite value at byte offset " +
                               std::to_string(off - value_bytes));
    series.values[i] = v;
  }
  return series;
}

}  // namespace qiml
