#pragma once

#include <complex>
#include <vector>

namespace qiml {

using cplx = std::complex<double>;
using ComplexBuffer = std::vector<cplx>;

bool is_power_of_two(std::size_t n);

// Unnormalised forward DFT, radix-2 iterative Cooley-Tukey.
// Throws std::invalid_argument for non-power-of-two lengths.
ComplexBuffer fft_forward(const ComplexBuffer& buffer);

// Inverse DFT with the 1/N factor, so fft_inverse(fft_forward(x)) == x.
ComplexBuffer fft_inverse(const ComplexBuffer& buffer);

// In-place variants used by the hot loops (KS stepper, Gram products).
void fft_forward_inplace(ComplexBuffer& buffer);
void fft_inverse_inplace(ComplexBuffer& buffer);

}  // namespace qiml
