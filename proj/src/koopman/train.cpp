#include "qiml/koopman/train.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "qiml/numcore/adam.hpp"

namespace qiml {

static void compute_normalisation(const FieldSeries& train, double& mean,
                                  double& scale) {
  double s = 0.0;
  for (double v : train.values) s += v;
  mean = s / static_cast<double>(train.values.size());
  double var = 0.0;
  for (double v : train.values) var += (v - mean) * (v - mean);
  scale = std::sqrt(var / static_cast<double>(train.values.size()));
  if (!(scale > 0.0)) scale = 1.0;
}

double one_step_mse(const SurrogateModel& model, const FieldSeries& split) {
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < split.n_trajectories; ++t)
    for (std::size_t f = 0; f + 1 < split.n_frames; ++f) {
      const auto pred = one_step(model, split.frame(t, f));
      const auto ref = split.frame(t, f + 1);
      for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - ref[i];
        se += e * e;
      }
      count += pred.size();
    }
  return se / static_cast<double>(count);
}

SurrogateTrainResult train_surrogate(const FieldSeries& train_split,
                                     const FieldSeries& val_split,
                                     const QPrior* prior,
                                     const SurrogateConfig& config,
                                     RandomStream& rng) {
  const std::size_t n = train_split.grid_size();
  if (n == 0 || train_split.n_frames < 2)
    throw std::invalid_argument("train_surrogate: need at least two frames");
  const bool with_prior =
      prior != nullptr && (config.lambda_kl != 0.0 || config.lambda_mmd != 0.0);
  if (!with_prior && (config.lambda_kl != 0.0 || config.lambda_mmd != 0.0))
    throw std::invalid_argument(
        "train_surrogate: nonzero distribution weights but no prior supplied");

  std::vector<double> prior_born;
  GridMapping mapping;
  KernelSpec kernel;
  if (with_prior) {
    mapping = prior->mapping;
    kernel = prior->kernel;
    if (mapping.rows != train_split.rows || mapping.cols != train_split.cols)
      throw std::invalid_argument(
          "train_surrogate: prior grid mapping (" + std::to_string(mapping.rows) +
          "x" + std::to_string(mapping.cols) + ") does not match dataset (" +
          std::to_string(train_split.rows) + "x" + std::to_string(train_split.cols) +
          ")");
    prior_born = prior->born();
  }

  SurrogateTrainResult result;
  SurrogateModel model = SurrogateModel::init(n, config.hidden1, config.hidden2,
                                              config.latent, rng);
  compute_normalisation(train_split, model.input_mean, model.input_scale);

  // all consecutive pairs, indexed (traj, frame)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < train_split.n_trajectories; ++t)
    for (std::size_t f = 0; f + 1 < train_split.n_frames; ++f) pairs.emplace_back(t, f);

  auto adam = AdamState::init(model.params.size(), config.learning_rate);
  SurrogateModel best = model;
  double best_val = std::numeric_limits<double>::infinity();

  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    // seeded Fisher-Yates shuffle
    for (std::size_t i = pairs.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next_u64() % i);
      std::swap(pairs[i - 1], pairs[j]);
    }

    TrainLogRow row;
    row.epoch = epoch;
    std::size_t n_batches = 0;
    bool diverged = false;

    for (std::size_t start = 0; start < pairs.size(); start += config.batch_size) {
      const std::size_t bs = std::min(config.batch_size, pairs.size() - start);
      Batch batch;
      batch.size = bs;
      batch.n = n;
      batch.u_t.resize(bs * n);
      batch.u_next.resize(bs * n);
      for (std::size_t b = 0; b < bs; ++b) {
        const auto [t, f] = pairs[start + b];
        const auto src = train_split.frame(t, f);
        const auto dst = train_split.frame(t, f + 1);
        std::copy(src.begin(), src.end(), batch.u_t.begin() + b * n);
        std::copy(dst.begin(), dst.end(), batch.u_next.begin() + b * n);
      }

      GradientTape tape;
      LossBreakdown loss;
      try {
        loss = total_loss(model, batch, prior_born, mapping, config.lambda_kl,
                          config.lambda_mmd, kernel, &tape, config.unitary_weight);
      } catch (const std::runtime_error& e) {
        std::cerr << "warning: aborting training, " << e.what() << "\n";
        diverged = true;
        break;
      }
      if (loss.total > config.divergence_limit) {
        std::cerr << "warning: aborting training, loss " << loss.total
                  << " above divergence limit at epoch " << epoch << "\n";
        diverged = true;
        break;
      }
      const auto grads = backward(model, tape);
      adam_update(model.params, grads, adam);

      row.recon += loss.recon;
      row.unitary += loss.unitary;
      row.kl += loss.kl;
      row.mmd += loss.mmd;
      row.total += loss.total;
      ++n_batches;
    }
    if (n_batches > 0) {
      const double inv = 1.0 / static_cast<double>(n_batches);
      row.recon *= inv;
      row.unitary *= inv;
      row.kl *= inv;
      row.mmd *= inv;
      row.total *= inv;
    }
    row.val_recon = one_step_mse(model, val_split);
    result.log.push_back(row);

    if (row.val_recon < best_val && !diverged) {
      best_val = row.val_recon;
      best = model;
    }
    if (diverged) {
      result.diverged = true;
      break;
    }
  }

  result.model = config.epochs == 0 ? model : best;
  return result;
}

RolloutResult rollout(const SurrogateModel& model, std::span<const double> u0,
                      std::size_t horizon, bool latent_only) {
  if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
  RolloutResult result;
  result.frames.n_trajectories = 1;
  result.frames.rows = 1;
  result.frames.cols = model.n;
  result.frames.values.reserve(horizon * model.n);

  std::vector<double> u(u0.begin(), u0.end());
  std::vector<double> z = encode(model, u);
  const double z0_norm = std::sqrt(
      std::inner_product(z.begin(), z.end(), z.begin(), 0.0));

  std::size_t produced = 0;
  for (std::size_t k = 0; k < horizon; ++k) {
    z = latent_step(model, z);
    u = decode(model, z);

    bool finite = true;
    for (double v : u)
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
    if (!finite) {
      result.truncated = true;
      break;
    }

    if (z0_norm > 0.0) {
      const double zn = std::sqrt(
          std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
      result.latent_norm_drift =
          std::max(result.latent_norm_drift, std::abs(zn - z0_norm) / z0_norm);
    }

    result.frames.values.insert(result.frames.values.end(), u.begin(), u.end());
    ++produced;

    if (!latent_only && k + 1 < horizon) z = encode(model, u);
  }
  result.frames.n_frames = produced;
  return result;
}

}  // namespace qiml
