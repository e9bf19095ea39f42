#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qiml/koopman/model.hpp"
#include "qiml/qcbm/kernel.hpp"
#include "qiml/qcbm/target.hpp"

namespace qiml {

struct LossBreakdown {
  double recon = 0.0;
  double unitary = 0.0;
  double kl = 0.0;
  double mmd = 0.0;
  double lambda_kl = 0.0;
  double lambda_mmd = 0.0;
  double unitary_weight = 1.0;
  double total = 0.0;  // recon + w*unitary + lkl*kl + lmmd*mmd, exactly
};

// A mini-batch of one-step pairs, rows flattened.
struct Batch {
  std::size_t size = 0;
  std::size_t n = 0;
  std::vector<double> u_t;     // size x n
  std::vector<double> u_next;  // size x n
};

// Squared Frobenius norm of K^T K - I. Throws on a non-square matrix.
double unitarity_penalty(std::span<const double> k, std::size_t dim);

// sum q * ln(q / max(p, 1e-10)); q == 0 terms contribute zero.
double kl_divergence(std::span<const double> q_hat, std::span<const double> p_prior);

// Smoothed-magnitude distribution of a batch of predicted states:
// s = sqrt(u^2 + 1e-8) per point, block-mean coarse graining, batch mean,
// normalised over 2^n basis states (zero beyond the active cells).
std::vector<double> predicted_distribution(std::span<const double> u_flat,
                                           std::size_t batch_size,
                                           const GridMapping& mapping);
// dL/du for the construction above, given dL/dq. Needed by the surrogate
// backward pass and by the gradient unit tests.
std::vector<double> predicted_distribution_backward(
    std::span<const double> u_flat, std::size_t batch_size,
    const GridMapping& mapping, std::span<const double> q,
    std::span<const double> dloss_dq);

// Forward intermediates of one total_loss evaluation, enough to run the
// reverse pass over all model parameters.
struct GradientTape {
  std::size_t batch = 0;
  std::vector<double> x;        // normalised inputs,   B x n
  std::vector<double> a1, a2;   // encoder activations, B x h1, B x h2
  std::vector<double> z, z2;    // latent,              B x l
  std::vector<double> g1, g2;   // decoder activations, B x h2, B x h1
  std::vector<double> y_norm;   // decoder output pre-denormalisation
  std::vector<double> y_raw;    // predictions, raw space
  std::vector<double> u_next;   // targets, raw space
  std::vector<double> q_hat;    // batch distribution (empty when lambdas are 0)
  LossBreakdown loss;
  // captured so backward() can re-derive the distribution-term gradients
  std::vector<double> prior_p;
  KernelSpec kernel;
  GridMapping mapping;
};

// Loss of Algorithm-style one-step training: recon MSE of
// decode(K encode(u_t)) against u_{t+1}, unitarity penalty on K, and
// KL/MMD between the batch's predicted distribution and the prior.
// prior_born may be empty iff lambda_kl == lambda_mmd == 0 (baseline);
// in that case the prior is never touched.
LossBreakdown total_loss(const SurrogateModel& model, const Batch& batch,
                         std::span<const double> prior_born,
                         const GridMapping& mapping, double lambda_kl,
                         double lambda_mmd, const KernelSpec& kernel,
                         GradientTape* tape = nullptr,
                         double unitary_weight = 1.0);

// Reverse pass; returns d(total)/d(params), same layout as model.params.
std::vector<double> backward(const SurrogateModel& model, const GradientTape& tape);

}  // namespace qiml
