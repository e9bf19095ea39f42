#include "qiml/qcbm/kernel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qiml/numcore/fft.hpp"

namespace qiml {

double KernelSpec::value(double distance) const {
  if (bandwidths.empty())
    throw std::invalid_argument("KernelSpec: no bandwidths");
  double s = 0.0;
  for (double sigma : bandwidths) {
    if (!(sigma > 0.0))
      throw std::invalid_argument("KernelSpec: bandwidths must be positive");
    s += std::exp(-distance * distance / (2.0 * sigma * sigma));
  }
  return s / static_cast<double>(bandwidths.size());
}

static std::vector<double> kernel_row(std::size_t n, const KernelSpec& kernel) {
  const double scale = (n > 1) ? 1.0 / static_cast<double>(n - 1) : 1.0;
  std::vector<double> g(n);
  for (std::size_t m = 0; m < n; ++m)
    g[m] = kernel.value(static_cast<double>(m) * scale);
  return g;
}

std::vector<double> gram_multiply(std::span<const double> v,
                                  const KernelSpec& kernel) {
  const std::size_t n = v.size();
  if (n == 0) return {};
  if (n == 1) return {v[0] * kernel.value(0.0)};

  // Circulant embedding of the Toeplitz Gram matrix.
  std::size_t m = 1;
  while (m < 2 * n) m <<= 1;
  const auto g = kernel_row(n, kernel);
  ComplexBuffer c(m, cplx(0.0, 0.0)), x(m, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) c[i] = g[i];
  for (std::size_t i = 1; i < n; ++i) c[m - i] = g[i];
  for (std::size_t i = 0; i < n; ++i) x[i] = v[i];

  fft_forward_inplace(c);
  fft_forward_inplace(x);
  for (std::size_t i = 0; i < m; ++i) x[i] *= c[i];
  fft_inverse_inplace(x);

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i].real();
  return y;
}

static void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("mmd_squared: length mismatch");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
    throw std::invalid_argument("mmd_squared: inputs must sum to 1");
}

double mmd_squared(std::span<const double> p, std::span<const double> q,
                   const KernelSpec& kernel) {
  check_pair(p, q);
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - q[i];
  const auto gd = gram_multiply(d, kernel);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * gd[i];
  return s;
}

namespace ref {

std::vector<double> gram_multiply(std::span<const double> v,
                                  const KernelSpec& kernel) {
  const std::size_t n = v.size();
  const double scale = (n > 1) ? 1.0 / static_cast<double>(n - 1) : 1.0;
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (static_cast<double>(i) - static_cast<double>(j)) * scale;
      y[i] += kernel.value(std::abs(d)) * v[j];
    }
  return y;
}

double mmd_squared(std::span<const double> p, std::span<const double> q,
                   const KernelSpec& kernel) {
  check_pair(p, q);
  std::vector<double> d(p.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = p[i] - q[i];
  const auto gd = ref::gram_multiply(d, kernel);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * gd[i];
  return s;
}

}  // namespace ref
}  // namespace qiml
