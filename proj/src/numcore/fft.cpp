#include "qiml/numcore/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qiml {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

static void check_length(std::size_t n) {
  if (!is_power_of_two(n))
    throw std::invalid_argument("fft: length " + std::to_string(n) +
                                " is not a power of two");
}

// sign = -1: forward, sign = +1: inverse (unnormalised).
static void transform(ComplexBuffer& a, int sign) {
  const std::size_t n = a.size();
  check_length(n);
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const cplx wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

void fft_forward_inplace(ComplexBuffer& buffer) { transform(buffer, -1); }

void fft_inverse_inplace(ComplexBuffer& buffer) {
  transform(buffer, +1);
  const double inv = 1.0 / static_cast<double>(buffer.size());
  for (auto& v : buffer) v *= inv;
}

ComplexBuffer fft_forward(const ComplexBuffer& buffer) {
  ComplexBuffer out = buffer;
  fft_forward_inplace(out);
  return out;
}

ComplexBuffer fft_inverse(const ComplexBuffer& buffer) {
  ComplexBuffer out = buffer;
  fft_inverse_inplace(out);
  return out;
}

}  // namespace qiml
