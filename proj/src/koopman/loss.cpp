#include "qiml/koopman/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace qiml {

namespace {
constexpr double kSmoothEps = 1e-8;   // eps_s in sqrt(u^2 + eps_s)
constexpr double kPriorFloor = 1e-10; // eps_p floor inside the KL log
}  // namespace

double unitarity_penalty(std::span<const double> k, std::size_t dim) {
  if (k.size() != dim * dim)
    throw std::invalid_argument("unitarity_penalty: matrix is not square");
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      double e = 0.0;
      for (std::size_t r = 0; r < dim; ++r) e += k[r * dim + i] * k[r * dim + j];
      if (i == j) e -= 1.0;
      s += e * e;
    }
  return s;
}

double kl_divergence(std::span<const double> q_hat, std::span<const double> p_prior) {
  if (q_hat.size() != p_prior.size())
    throw std::invalid_argument("kl_divergence: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < q_hat.size(); ++i) {
    if (q_hat[i] <= 0.0) continue;
    s += q_hat[i] * std::log(q_hat[i] / std::max(p_prior[i], kPriorFloor));
  }
  return s;
}

std::vector<double> predicted_distribution(std::span<const double> u_flat,
                                           std::size_t batch_size,
                                           const GridMapping& mapping) {
  mapping.validate();
  const std::size_t g = mapping.rows * mapping.cols;
  if (batch_size == 0 || u_flat.size() != batch_size * g)
    throw std::invalid_argument("predicted_distribution: batch/grid mismatch");

  const std::size_t d = mapping.active_states();
  const std::size_t crows = mapping.coarse_rows();
  const std::size_t ccols = mapping.coarse_cols();
  const std::size_t b = mapping.block;
  const std::size_t brows = (mapping.rows == 1) ? 1 : b;
  const double inv = 1.0 / static_cast<double>(batch_size * brows * b);

  std::vector<double> m(d, 0.0);
  for (std::size_t s = 0; s < batch_size; ++s) {
    const double* u = u_flat.data() + s * g;
    for (std::size_t cr = 0; cr < crows; ++cr)
      for (std::size_t cc = 0; cc < ccols; ++cc) {
        double acc = 0.0;
        for (std::size_t r = 0; r < brows; ++r)
          for (std::size_t c = 0; c < b; ++c) {
            const double v = u[(cr * brows + r) * mapping.cols + cc * b + c];
            acc += std::sqrt(v * v + kSmoothEps);
          }
        m[cr * ccols + cc] += acc * inv;
      }
  }
  double total = 0.0;
  for (double v : m) total += v;
  std::vector<double> q(mapping.total_states(), 0.0);
  for (std::size_t i = 0; i < d; ++i) q[i] = m[i] / total;
  return q;
}

std::vector<double> predicted_distribution_backward(
    std::span<const double> u_flat, std::size_t batch_size,
    const GridMapping& mapping, std::span<const double> q,
    std::span<const double> dloss_dq) {
  const std::size_t g = mapping.rows * mapping.cols;
  const std::size_t d = mapping.active_states();
  const std::size_t crows = mapping.coarse_rows();
  const std::size_t ccols = mapping.coarse_cols();
  const std::size_t b = mapping.block;
  const std::size_t brows = (mapping.rows == 1) ? 1 : b;
  const double inv = 1.0 / static_cast<double>(batch_size * brows * b);

  // recover S = sum of coarse means from q = m / S: sum m = S and the
  // smoothed magnitudes are strictly positive, so recompute directly
  double total = 0.0;
  for (std::size_t s = 0; s < batch_size; ++s) {
    const double* u = u_flat.data() + s * g;
    for (std::size_t j = 0; j < g; ++j) {
      const double v = u[j];
      total += std::sqrt(v * v + kSmoothEps) * inv;
    }
  }

  double gq = 0.0;  // dot(dL/dq, q) over active cells
  for (std::size_t i = 0; i < d; ++i) gq += dloss_dq[i] * q[i];

  std::vector<double> du(u_flat.size(), 0.0);
  for (std::size_t s = 0; s < batch_size; ++s) {
    const double* u = u_flat.data() + s * g;
    double* out = du.data() + s * g;
    for (std::size_t cr = 0; cr < crows; ++cr)
      for (std::size_t cc = 0; cc < ccols; ++cc) {
        const double dm = (dloss_dq[cr * ccols + cc] - gq) / total;
        for (std::size_t r = 0; r < brows; ++r)
          for (std::size_t c = 0; c < b; ++c) {
            const std::size_t j = (cr * brows + r) * mapping.cols + cc * b + c;
            const double v = u[j];
            out[j] = dm * inv * v / std::sqrt(v * v + kSmoothEps);
          }
      }
  }
  return du;
}

namespace {

void add_bias_tanh(std::vector<double>& a, std::span<const double> bias,
                   std::size_t batch, std::size_t dim, bool apply_tanh) {
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t j = 0; j < dim; ++j) {
      double& v = a[r * dim + j];
      v += bias[j];
      if (apply_tanh) v = std::tanh(v);
    }
}

std::vector<double> colsum(std::span<const double> a, std::size_t rows,
                           std::size_t cols) {
  std::vector<double> s(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) s[j] += a[r * cols + j];
  return s;
}

void tanh_backward(std::vector<double>& grad, std::span<const double> activated) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    grad[i] *= 1.0 - activated[i] * activated[i];
}

}  // namespace

LossBreakdown total_loss(const SurrogateModel& model, const Batch& batch,
                         std::span<const double> prior_born,
                         const GridMapping& mapping, double lambda_kl,
                         double lambda_mmd, const KernelSpec& kernel,
                         GradientTape* tape, double unitary_weight) {
  using B = SurrogateModel::Block;
  if (batch.size == 0 || batch.n != model.n)
    throw std::invalid_argument("total_loss: batch/model dimension mismatch");
  const std::size_t bs = batch.size, n = model.n, h1 = model.h1, h2 = model.h2,
                    l = model.latent;
  const bool with_prior = (lambda_kl != 0.0 || lambda_mmd != 0.0);
  if (with_prior && prior_born.size() != mapping.total_states())
    throw std::invalid_argument("total_loss: prior distribution length mismatch");

  std::vector<double> x(bs * n);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = (batch.u_t[i] - model.input_mean) / model.input_scale;

  std::vector<double> a1(bs * h1), a2(bs * h2), z(bs * l), z2(bs * l),
      g1(bs * h2), g2(bs * h1), y_norm(bs * n);
  gemm_nt(x, model.block(B::EncW1), a1, bs, n, h1);
  add_bias_tanh(a1, model.block(B::EncB1), bs, h1, true);
  gemm_nt(a1, model.block(B::EncW2), a2, bs, h1, h2);
  add_bias_tanh(a2, model.block(B::EncB2), bs, h2, true);
  gemm_nt(a2, model.block(B::EncWz), z, bs, h2, l);
  add_bias_tanh(z, model.block(B::EncBz), bs, l, false);
  gemm_nt(z, model.block(B::LatentK), z2, bs, l, l);
  gemm_nt(z2, model.block(B::DecV1), g1, bs, l, h2);
  add_bias_tanh(g1, model.block(B::DecC1), bs, h2, true);
  gemm_nt(g1, model.block(B::DecV2), g2, bs, h2, h1);
  add_bias_tanh(g2, model.block(B::DecC2), bs, h1, true);
  gemm_nt(g2, model.block(B::DecVo), y_norm, bs, h1, n);
  add_bias_tanh(y_norm, model.block(B::DecCo), bs, n, false);

  std::vector<double> y_raw(bs * n);
  for (std::size_t i = 0; i < y_raw.size(); ++i)
    y_raw[i] = y_norm[i] * model.input_scale + model.input_mean;

  LossBreakdown out;
  out.lambda_kl = lambda_kl;
  out.lambda_mmd = lambda_mmd;
  out.unitary_weight = unitary_weight;

  double se = 0.0;
  for (std::size_t i = 0; i < y_raw.size(); ++i) {
    const double e = y_raw[i] - batch.u_next[i];
    se += e * e;
  }
  out.recon = se / static_cast<double>(bs * n);
  out.unitary = unitarity_penalty(model.block(B::LatentK), l);

  std::vector<double> q_hat;
  if (with_prior) {
    q_hat = predicted_distribution(y_raw, bs, mapping);
    out.kl = kl_divergence(q_hat, prior_born);
    out.mmd = mmd_squared(q_hat, prior_born, kernel);
  }
  out.total = out.recon + unitary_weight * out.unitary + lambda_kl * out.kl +
              lambda_mmd * out.mmd;
  if (!std::isfinite(out.total))
    throw std::runtime_error(
        "total_loss: non-finite loss (recon=" + std::to_string(out.recon) +
        " unitary=" + std::to_string(out.unitary) + " kl=" + std::to_string(out.kl) +
        " mmd=" + std::to_string(out.mmd) + ")");

  if (tape) {
    tape->batch = bs;
    tape->x = std::move(x);
    tape->a1 = std::move(a1);
    tape->a2 = std::move(a2);
    tape->z = std::move(z);
    tape->z2 = std::move(z2);
    tape->g1 = std::move(g1);
    tape->g2 = std::move(g2);
    tape->y_norm = std::move(y_norm);
    tape->y_raw = std::move(y_raw);
    tape->u_next = batch.u_next;
    tape->q_hat = std::move(q_hat);
    tape->loss = out;
    tape->prior_p.assign(prior_born.begin(), prior_born.end());
    tape->kernel = kernel;
    tape->mapping = mapping;
  }
  return out;
}

std::vector<double> backward(const SurrogateModel& model, const GradientTape& tape) {
  using B = SurrogateModel::Block;
  if (tape.batch == 0) throw std::invalid_argument("backward: empty tape");
  const std::size_t bs = tape.batch, n = model.n, h1 = model.h1, h2 = model.h2,
                    l = model.latent;
  const LossBreakdown& L = tape.loss;

  std::vector<double> grads(model.params.size(), 0.0);
  auto gblock = [&](B b) {
    return std::span<double>(grads.data() + model.block_offset(b),
                             model.block_size(b));
  };

  // dL/dy_raw: recon MSE plus the distribution terms through q_hat
  std::vector<double> dy_raw(bs * n);
  const double c = 2.0 / static_cast<double>(bs * n);
  for (std::size_t i = 0; i < dy_raw.size(); ++i)
    dy_raw[i] = c * (tape.y_raw[i] - tape.u_next[i]);

  if (L.lambda_kl != 0.0 || L.lambda_mmd != 0.0) {
    const std::size_t total_states = tape.mapping.total_states();
    std::vector<double> dq(total_states, 0.0);
    if (L.lambda_mmd != 0.0) {
      std::vector<double> diff(total_states);
      for (std::size_t i = 0; i < total_states; ++i)
        diff[i] = tape.q_hat[i] - tape.prior_p[i];
      const auto gm = gram_multiply(diff, tape.kernel);
      for (std::size_t i = 0; i < total_states; ++i)
        dq[i] += L.lambda_mmd * 2.0 * gm[i];
    }
    if (L.lambda_kl != 0.0) {
      for (std::size_t i = 0; i < tape.mapping.active_states(); ++i) {
        if (tape.q_hat[i] <= 0.0) continue;
        dq[i] += L.lambda_kl *
                 (std::log(tape.q_hat[i] / std::max(tape.prior_p[i], kPriorFloor)) + 1.0);
      }
    }
    const auto du = predicted_distribution_backward(tape.y_raw, bs, tape.mapping,
                                                    tape.q_hat, dq);
    for (std::size_t i = 0; i < dy_raw.size(); ++i) dy_raw[i] += du[i];
  }

  std::vector<double> dy_norm(bs * n);
  for (std::size_t i = 0; i < dy_norm.size(); ++i)
    dy_norm[i] = dy_raw[i] * model.input_scale;

  // decoder output layer
  {
    std::vector<double> dvo(n * h1);
    gemm_tn(dy_norm, tape.g2, dvo, n, bs, h1);
    auto dst = gblock(B::DecVo);
    for (std::size_t i = 0; i < dvo.size(); ++i) dst[i] = dvo[i];
    const auto dco = colsum(dy_norm, bs, n);
    auto dstb = gblock(B::DecCo);
    for (std::size_t i = 0; i < dco.size(); ++i) dstb[i] = dco[i];
  }
  std::vector<double> dg2(bs * h1);
  gemm(dy_norm, model.block(B::DecVo), dg2, bs, n, h1);
  tanh_backward(dg2, tape.g2);

  {
    std::vector<double> dv2(h1 * h2);
    gemm_tn(dg2, tape.g1, dv2, h1, bs, h2);
    auto dst = gblock(B::DecV2);
    for (std::size_t i = 0; i < dv2.size(); ++i) dst[i] = dv2[i];
    const auto dc2 = colsum(dg2, bs, h1);
    auto dstb = gblock(B::DecC2);
    for (std::size_t i = 0; i < dc2.size(); ++i) dstb[i] = dc2[i];
  }
  std::vector<double> dg1(bs * h2);
  gemm(dg2, model.block(B::DecV2), dg1, bs, h1, h2);
  tanh_backward(dg1, tape.g1);

  {
    std::vector<double> dv1(h2 * l);
    gemm_tn(dg1, tape.z2, dv1, h2, bs, l);
    auto dst = gblock(B::DecV1);
    for (std::size_t i = 0; i < dv1.size(); ++i) dst[i] = dv1[i];
    const auto dc1 = colsum(dg1, bs, h2);
    auto dstb = gblock(B::DecC1);
    for (std::size_t i = 0; i < dc1.size(); ++i) dstb[i] = dc1[i];
  }
  std::vector<double> dz2(bs * l);
  gemm(dg1, model.block(B::DecV1), dz2, bs, h2, l);

  // latent operator: data term plus the unitarity penalty 4 K (K^T K - I)
  {
    std::vector<double> dk(l * l);
    gemm_tn(dz2, tape.z, dk, l, bs, l);
    const auto k = model.block(B::LatentK);
    std::vector<double> ktk(l * l, 0.0);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < l; ++r) s += k[r * l + i] * k[r * l + j];
        ktk[i * l + j] = s - (i == j ? 1.0 : 0.0);
      }
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < l; ++r) s += k[i * l + r] * ktk[r * l + j];
        dk[i * l + j] += L.unitary_weight * 4.0 * s;
      }
    auto dst = gblock(B::LatentK);
    for (std::size_t i = 0; i < dk.size(); ++i) dst[i] = dk[i];
  }
  std::vector<double> dz(bs * l);
  gemm(dz2, model.block(B::LatentK), dz, bs, l, l);

  // encoder
  {
    std::vector<double> dwz(l * h2);
    gemm_tn(dz, tape.a2, dwz, l, bs, h2);
    auto dst = gblock(B::EncWz);
    for (std::size_t i = 0; i < dwz.size(); ++i) dst[i] = dwz[i];
    const auto dbz = colsum(dz, bs, l);
    auto dstb = gblock(B::EncBz);
    for (std::size_t i = 0; i < dbz.size(); ++i) dstb[i] = dbz[i];
  }
  std::vector<double> da2(bs * h2);
  gemm(dz, model.block(B::EncWz), da2, bs, l, h2);
  tanh_backward(da2, tape.a2);

  {
    std::vector<double> dw2(h2 * h1);
    gemm_tn(da2, tape.a1, dw2, h2, bs, h1);
    auto dst = gblock(B::EncW2);
    for (std::size_t i = 0; i < dw2.size(); ++i) dst[i] = dw2[i];
    const auto db2 = colsum(da2, bs, h2);
    auto dstb = gblock(B::EncB2);
    for (std::size_t i = 0; i < db2.size(); ++i) dstb[i] = db2[i];
  }
  std::vector<double> da1(bs * h1);
  gemm(da2, model.block(B::EncW2), da1, bs, h2, h1);
  tanh_backward(da1, tape.a1);

  {
    std::vector<double> dw1(h1 * n);
    gemm_tn(da1, tape.x, dw1, h1, bs, n);
    auto dst = gblock(B::EncW1);
    for (std::size_t i = 0; i < dw1.size(); ++i) dst[i] = dw1[i];
    const auto db1 = colsum(da1, bs, h1);
    auto dstb = gblock(B::EncB1);
    for (std::size_t i = 0; i < db1.size(); ++i) dstb[i] = db1[i];
  }
  return grads;
}

}  // namespace qiml
