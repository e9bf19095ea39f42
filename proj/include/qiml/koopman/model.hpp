#pragma once

#include <span>
#include <string>
#include <vector>

#include "qiml/numcore/random.hpp"

namespace qiml {

// Encoder (n -> h1 -> h2 -> l, tanh hidden layers, linear output),
// latent linear operator K (l x l), mirror decoder (l -> h2 -> h1 -> n).
// All weights live in one flat parameter vector so the optimiser and the
// finite-difference oracle see a single coordinate space.
struct SurrogateModel {
  std::size_t n = 0;       // state dimension
  std::size_t h1 = 256;
  std::size_t h2 = 128;
  std::size_t latent = 0;

  // training-split normalisation, applied on encode and inverted on decode
  double input_mean = 0.0;
  double input_scale = 1.0;

  std::vector<double> params;

  enum Block {
    EncW1, EncB1, EncW2, EncB2, EncWz, EncBz,
    LatentK,
    DecV1, DecC1, DecV2, DecC2, DecVo, DecCo,
    kNumBlocks
  };

  std::size_t block_offset(Block b) const;
  std::size_t block_size(Block b) const;
  std::size_t param_count() const;

  std::span<const double> block(Block b) const {
    return {params.data() + block_offset(b), block_size(b)};
  }
  std::span<double> block(Block b) {
    return {params.data() + block_offset(b), block_size(b)};
  }

  // Xavier-uniform weights, zero biases, K = identity.
  static SurrogateModel init(std::size_t n, std::size_t h1, std::size_t h2,
                             std::size_t latent, RandomStream& rng);
};

// Raw field in, latent vector out (normalisation applied inside).
std::vector<double> encode(const SurrogateModel& model, std::span<const double> u);
// z' = K z.
std::vector<double> latent_step(const SurrogateModel& model,
                                std::span<const double> z);
// Latent vector in, raw (denormalised) field out.
std::vector<double> decode(const SurrogateModel& model, std::span<const double> z);
// decode(K encode(u)) - the one-step predictor.
std::vector<double> one_step(const SurrogateModel& model, std::span<const double> u);

// QIMS checkpoint: magic "QIMS", u16 version, u32 n/h1/h2/latent,
// f64 mean/scale, little-endian f64 parameter block, trailing CRC32.
void save_surrogate(const SurrogateModel& model, const std::string& path);
SurrogateModel load_surrogate(const std::string& path);

// Row-major helpers shared with the loss module; OpenMP over output rows
// with serial inner sums, so results do not depend on the thread count.
// C[rows x cols] = A[rows x inner] * B[inner x cols]
void gemm(std::span<const double> a, std::span<const double> b,
          std::span<double> c, std::size_t rows, std::size_t inner,
          std::size_t cols);
// C[rows x cols] = A[rows x inner] * B[cols x inner]^T
void gemm_nt(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t rows, std::size_t inner,
             std::size_t cols);
// C[rows x cols] = A[inner x rows]^T * B[inner x cols]
void gemm_tn(std::span<const double> a, std::span<const double> b,
             std::span<double> c, std::size_t rows, std::size_t inner,
             std::size_t cols);

}  // namespace qiml
