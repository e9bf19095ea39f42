#pragma once

#include <optional>
#include <string>

#include "qiml/dynamics/field_series.hpp"
#include "qiml/koopman/loss.hpp"
#include "qiml/qcbm/qprior.hpp"

namespace qiml {

struct SurrogateConfig {
  std::size_t hidden1 = 256;
  std::size_t hidden2 = 128;
  std::size_t latent = 64;
  double lambda_kl = 0.1;
  double lambda_mmd = 1.0;
  double unitary_weight = 1.0;
  std::uint64_t epochs = 500;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double divergence_limit = 1e6;
};

struct TrainLogRow {
  std::uint64_t epoch = 0;
  double recon = 0, unitary = 0, kl = 0, mmd = 0, total = 0;
  double val_recon = 0;
};

struct SurrogateTrainResult {
  SurrogateModel model;  // best-validation checkpoint
  std::vector<TrainLogRow> log;
  bool diverged = false;
};

// Algorithm-1-style mini-batch training on consecutive frame pairs.
// prior == nullptr (or both lambdas zero) is the classical baseline; the
// prior is then never read, so the baseline is bit-identical regardless
// of which prior file was supplied. Normalisation statistics come from
// the training split only.
SurrogateTrainResult train_surrogate(const FieldSeries& train_split,
                                     const FieldSeries& val_split,
                                     const QPrior* prior,
                                     const SurrogateConfig& config,
                                     RandomStream& rng);

struct RolloutResult {
  FieldSeries frames;       // one trajectory, horizon frames (may be shorter)
  bool truncated = false;   // hit a non-finite frame
  double latent_norm_drift = 0.0;  // max_k |  ||z_k|| - ||z_0|| | / ||z_0||
};

// Auto-regressive one-frame-in one-frame-out rollout, re-encoding each
// predicted frame. latent_only skips the re-encode and iterates K in
// latent space (diagnostic mode).
RolloutResult rollout(const SurrogateModel& model, std::span<const double> u0,
                      std::size_t horizon, bool latent_only = false);

// One-step validation MSE over all consecutive pairs of a split.
double one_step_mse(const SurrogateModel& model, const FieldSeries& split);

}  // namespace qiml
