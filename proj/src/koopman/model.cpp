#include "qiml/koopman/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qiml/util/crc32.hpp"

namespace qiml {

std::size_t SurrogateModel::block_size(Block b) const {
  switch (b) {
    case EncW1: return h1 * n;
    case EncB1: return h1;
    case EncW2: return h2 * h1;
    case EncB2: return h2;
    case EncWz: return latent * h2;
    case EncBz: return latent;
    case LatentK: return latent * latent;
    case DecV1: return h2 * latent;
    case DecC1: return h2;
    case DecV2: return h1 * h2;
    case DecC2: return h1;
    case DecVo: return n * h1;
    case DecCo: return n;
    default: throw std::logic_error("block_size: bad block");
  }
}

std::size_t SurrogateModel::block_offset(Block b) const {
  std::size_t off = 0;
  for (int i = 0; i < b; ++i) off += block_size(static_cast<Block>(i));
  return off;
}

std::size_t SurrogateModel::param_count() const {
  return block_offset(kNumBlocks == 0 ? EncW1 : static_cast<Block>(kNumBlocks - 1)) +
         block_size(static_cast<Block>(kNumBlocks - 1));
}

SurrogateModel SurrogateModel::init(std::size_t n, std::size_t h1, std::size_t h2,
                                    std::size_t latent, RandomStream& rng) {
  if (n == 0 || h1 == 0 || h2 == 0 || latent == 0)
    throw std::invalid_argument("SurrogateModel::init: zero dimension");
  SurrogateModel m;
  m.n = n;
  m.h1 = h1;
  m.h2 = h2;
  m.latent = latent;
  m.params.assign(m.param_count(), 0.0);

  auto xavier = [&](Block w, std::size_t fan_out, std::size_t fan_in) {
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : m.block(w)) v = rng.uniform(-s, s);
  };
  xavier(EncW1, h1, n);
  xavier(EncW2, h2, h1);
  xavier(EncWz, latent, h2);
  xavier(DecV1, h2, latent);
  xavier(DecV2, h1, h2);
  xavier(DecVo, n, h1);
  auto k = m.block(LatentK);
  for (std::size_t i = 0; i < latent; ++i) k[i * latent + i] = 1.0;
  return m;
}

void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t rows, std::size_t inner,
          std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
    double* crow = c.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) crow[j] = 0.0;
    for (std::size_t i = 0; i < inner; ++i) {
      const double av = a[r * inner + i];
      const double* brow = b.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t rows, std::size_t inner,
             std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      const double* arow = a.data() + r * inner;
      const double* brow = b.data() + j * inner;
      for (std::size_t i = 0; i < inner; ++i) s += arow[i] * brow[i];
      c[r * cols + j] = s;
    }
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t rows, std::size_t inner,
             std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(rows); ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < inner; ++i) s += a[i * rows + r] * b[i * cols + j];
      c[r * cols + j] = s;
    }
  }
}

static std::vector<double> affine(std::span<const double> w,
                                  std::span<const double> bias,
                                  std::span<const double> x, std::size_t out_dim,
                                  std::size_t in_dim) {
  std::vector<double> y(out_dim);
  gemm_nt(x, w, y, 1, in_dim, out_dim);
  for (std::size_t i = 0; i < out_dim; ++i) y[i] += bias[i];
  return y;
}

static void tanh_inplace(std::vector<double>& v) {
  for (auto& x : v) x = std::tanh(x);
}

std::vector<double> encode(const SurrogateModel& model, std::span<const double> u) {
  if (u.size() != model.n)
    throw std::invalid_argument("encode: state dimension mismatch");
  std::vector<double> x(model.n);
  for (std::size_t i = 0; i < model.n; ++i)
    x[i] = (u[i] - model.input_mean) / model.input_scale;
  auto a1 = affine(model.block(SurrogateModel::EncW1),
                   model.block(SurrogateModel::EncB1), x, model.h1, model.n);
  tanh_inplace(a1);
  auto a2 = affine(model.block(SurrogateModel::EncW2),
                   model.block(SurrogateModel::EncB2), a1, model.h2, model.h1);
  tanh_inplace(a2);
  return affine(model.block(SurrogateModel::EncWz),
                model.block(SurrogateModel::EncBz), a2, model.latent, model.h2);
}

std::vector<double> latent_step(const SurrogateModel& model,
                                std::span<const double> z) {
  if (z.size() != model.latent)
    throw std::invalid_argument("latent_step: latent dimension mismatch");
  std::vector<double> out(model.latent, 0.0);
  const auto k = model.block(SurrogateModel::LatentK);
  for (std::size_t i = 0; i < model.latent; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < model.latent; ++j) s += k[i * model.latent + j] * z[j];
    out[i] = s;
  }
  return out;
}

std::vector<double> decode(const SurrogateModel& model, std::span<const double> z) {
  if (z.size() != model.latent)
    throw std::invalid_argument("decode: latent dimension mismatch");
  auto g1 = affine(model.block(SurrogateModel::DecV1),
                   model.block(SurrogateModel::DecC1), z, model.h2, model.latent);
  tanh_inplace(g1);
  auto g2 = affine(model.block(SurrogateModel::DecV2),
                   model.block(SurrogateModel::DecC2), g1, model.h1, model.h2);
  tanh_inplace(g2);
  auto y = affine(model.block(SurrogateModel::DecVo),
                  model.block(SurrogateModel::DecCo), g2, model.n, model.h1);
  for (auto& v : y) v = v * model.input_scale + model.input_mean;
  return y;
}

std::vector<double> one_step(const SurrogateModel& model, std::span<const double> u) {
  const auto z = encode(model, u);
  const auto z2 = latent_step(model, z);
  return decode(model, z2);
}

namespace {
constexpr char kMagic[4] = {'Q', 'I', 'M', 'S'};
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
    throw std::runtime_error("QIMS: truncated checkpoint");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}
}  // namespace

void save_surrogate(const SurrogateModel& model, const std::string& path) {
  std::vector<unsigned char> buf;
  buf.reserve(64 + model.params.size() * 8);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(buf, kVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.n));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.h1));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.h2));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(model.latent));
  put<double>(buf, model.input_mean);
  put<double>(buf, model.input_scale);
  for (double v : model.params) put<double>(buf, v);
  put<std::uint32_t>(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("QIMS: cannot open " + path);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("QIMS: write failed for " + path);
}

SurrogateModel load_surrogate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("QIMS: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("QIMS: bad magic in " + path);
  std::size_t off = 4;
  if (get<std::uint16_t>(buf, off) != kVersion)
    throw std::runtime_error("QIMS: unsupported version in " + path);

  SurrogateModel m;
  m.n = get<std::uint32_t>(buf, off);
  m.h1 = get<std::uint32_t>(buf, off);
  m.h2 = get<std::uint32_t>(buf, off);
  m.latent = get<std::uint32_t>(buf, off);
  m.input_mean = get<double>(buf, off);
  m.input_scale = get<double>(buf, off);
  m.params.resize(m.param_count());
  if (buf.size() != off + m.params.size() * 8 + 4)
    throw std::runtime_error("QIMS: truncated checkpoint " + path);
  for (auto& v : m.params) v = get<double>(buf, off);
  const auto stored = get<std::uint32_t>(buf, off);
  if (crc32(buf.data(), buf.size() - 4) != stored)
    throw std::runtime_error("QIMS: CRC mismatch in " + path);
  for (double v : m.params)
    if (!std::isfinite(v)) throw std::runtime_error("QIMS: non-finite weight");
  return m;
}

}  // namespace qiml
