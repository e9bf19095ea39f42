#pragma once

#include <span>
#include <vector>

namespace qiml {

// Mixture of Gaussian kernels over basis indices normalised to [0,1]:
// k(d) = mean_m exp(-d^2 / (2 sigma_m^2)), so k(0) = 1.
struct KernelSpec {
  std::vector<double> bandwidths{0.1, 0.25, 1.0};

  double value(double distance) const;
};

// Gram-matrix product y = G v for the translation-invariant kernel on a
// length-D index line, via circulant embedding and FFT in O(D log D).
std::vector<double> gram_multiply(std::span<const double> v,
                                  const KernelSpec& kernel);

// Squared MMD between two explicit distributions: (p-q)^T G (p-q).
// Throws on length mismatch or badly normalised inputs.
double mmd_squared(std::span<const double> p, std::span<const double> q,
                   const KernelSpec& kernel);

namespace ref {
// Dense O(D^2) reference used to validate the FFT path.
std::vector<double> gram_multiply(std::span<const double> v,
                                  const KernelSpec& kernel);
double mmd_squared(std::span<const double> p, std::span<const double> q,
                   const KernelSpec& kernel);
}  // namespace ref

}  // namespace qiml
