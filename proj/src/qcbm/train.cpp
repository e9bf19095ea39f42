#include "qiml/qcbm/train.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qiml/numcore/adam.hpp"

namespace qiml {

std::vector<double> parameter_shift_gradient(const Ansatz& ansatz,
                                             std::span<const double> angles,
                                             std::span<const double> target,
                                             const KernelSpec& kernel) {
  const int n_params = ansatz.parameter_count();
  if (static_cast<int>(angles.size()) != n_params)
    throw std::invalid_argument("parameter_shift_gradient: angle count mismatch");
  if (n_params == 0) return {};

  const auto p = ansatz.born(angles);
  if (p.size() != target.size())
    throw std::invalid_argument("parameter_shift_gradient: target length mismatch");

  // dL/dp for L = (p - t)^T G (p - t) is 2 G (p - t); combined with the
  // 1/2 of the shift rule this leaves g^T (p+ - p-) with g = G (p - t).
  std::vector<double> diff(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) diff[i] = p[i] - target[i];
  const auto g = gram_multiply(diff, kernel);

  constexpr double shift = std::numbers::pi / 2.0;
  std::vector<double> grad(n_params);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_params; ++i) {
    std::vector<double> shifted(angles.begin(), angles.end());
    shifted[i] += shift;
    const auto p_plus = ansatz.born(shifted);
    shifted[i] -= 2.0 * shift;
    const auto p_minus = ansatz.born(shifted);
    double s = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) s += g[x] * (p_plus[x] - p_minus[x]);
    grad[i] = s;
  }
  return grad;
}

static std::vector<double> model_distribution(const Ansatz& ansatz,
                                              std::span<const double> angles,
                                              const QcbmConfig& config,
                                              RandomStream& rng) {
  if (config.mode == QcbmMode::Exact) return ansatz.born(angles);
  const auto state = run_circuit(ansatz.realize(angles), ansatz.n_qubits);
  const auto counts = sample_counts(state, config.shots, rng);
  std::vector<double> freq(state.dim(), 0.0);
  const double inv = 1.0 / static_cast<double>(config.shots);
  for (const auto& [idx, c] : counts) freq[idx] = static_cast<double>(c) * inv;
  return freq;
}

static double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

QcbmTrainResult train_qcbm(const Ansatz& ansatz, std::span<const double> target,
                           const GridMapping& mapping, const QcbmConfig& config,
                           RandomStream& rng) {
  mapping.validate();
  if (target.size() != mapping.total_states())
    throw std::invalid_argument("train_qcbm: target length != 2^n");

  const int n_params = ansatz.parameter_count();
  std::vector<double> angles(n_params);
  for (auto& a : angles) a = rng.uniform(-std::numbers::pi, std::numbers::pi);

  const double target_entropy = entropy_bits(target);

  QcbmTrainResult result;
  auto adam = AdamState::init(angles.size(), config.learning_rate);
  std::vector<double> best_angles = angles;
  double best_loss = std::numeric_limits<double>::infinity();

  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto model_p = model_distribution(ansatz, angles, config, rng);
    const double loss = mmd_squared(model_p, target, config.kernel);
    if (!std::isfinite(loss)) {
      std::cerr << "warning: non-finite MMD at epoch " << epoch
                << ", keeping last good parameters\n";
      result.aborted_non_finite = true;
      break;
    }
    result.loss_log.push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_angles = angles;
    }

    const double peak = *std::max_element(model_p.begin(), model_p.end());
    if (peak > 0.95 && target_entropy > 1.0 && !result.collapse_warning) {
      result.collapse_warning = true;
      std::cerr << "warning: mode collapse, " << peak * 100.0
                << "% of mass on one basis state at epoch " << epoch << "\n";
    }

    std::vector<double> grad;
    if (config.mode == QcbmMode::Exact) {
      grad = parameter_shift_gradient(ansatz, angles, target, config.kernel);
    } else {
      // shift rule on sampled frequencies: g from the sampled base
      // distribution, shifted circuits sampled as well
      std::vector<double> diff(model_p.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = model_p[i] - target[i];
      const auto g = gram_multiply(diff, config.kernel);
      constexpr double shift = std::numbers::pi / 2.0;
      grad.resize(angles.size());
      for (std::size_t i = 0; i < angles.size(); ++i) {
        auto shifted = angles;
        shifted[i] += shift;
        const auto p_plus = model_distribution(ansatz, shifted, config, rng);
        shifted[i] -= 2.0 * shift;
        const auto p_minus = model_distribution(ansatz, shifted, config, rng);
        double s = 0.0;
        for (std::size_t x = 0; x < g.size(); ++x)
          s += g[x] * (p_plus[x] - p_minus[x]);
        grad[i] = s;
      }
    }
    adam_update(angles, grad, adam);
  }

  // final loss of the parameters we return
  if (!result.aborted_non_finite && config.epochs > 0) {
    const double final_loss =
        mmd_squared(ansatz.born(angles), target, config.kernel);
    if (std::isfinite(final_loss) && final_loss <= best_loss) {
      best_loss = final_loss;
      best_angles = angles;
    }
  }

  QPrior prior;
  prior.ansatz = ansatz;
  prior.angles = best_angles;
  prior.mapping = mapping;
  prior.kernel = config.kernel;
  prior.final_loss =
      std::isfinite(best_loss)
          ? best_loss
          : mmd_squared(ansatz.born(best_angles), target, config.kernel);
  prior.dataset_id = config.dataset_id;
  prior.seed = rng.seed();
  prior.epochs = config.epochs;
  result.prior = std::move(prior);
  return result;
}

}  // namespace qiml
