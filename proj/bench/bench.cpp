// Micro-benchmarks of the OpenMP kernels against their serial reference
// implementations: gate application, the Gram-matrix multiply (dense vs
// circulant FFT), and the dense layer gemm.

#include <chrono>
#include <cstdio>
#include <vector>

#include "qiml/koopman/model.hpp"
#include "qiml/numcore/random.hpp"
#include "qiml/qcbm/ansatz.hpp"
#include "qiml/qcbm/kernel.hpp"
#include "qiml/qsim/reference.hpp"
#include "qiml/qsim/statevector.hpp"
#include "qiml/util/parallel.hpp"

using namespace qiml;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(int reps, F&& f) {
  f();  // warm-up
  const auto t0 = clock_type::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void bench_gates() {
  RandomStream rng(11);
  const Ansatz ansatz = build_ansatz(15, 8, 2);
  std::vector<double> angles(ansatz.parameter_count());
  for (auto& a : angles) a = rng.uniform(-3.14, 3.14);
  const auto gates = ansatz.realize(angles);

  volatile double sink = 0.0;
  const double par = time_ms(3, [&] {
    auto s = init_zero_state(15);
    for (const auto& g : gates) apply_gate_inplace(s, g);
    sink = s.amplitudes[0].real();
  });
  const double ser = time_ms(3, [&] {
    auto s = init_zero_state(15);
    for (const auto& g : gates) ref::apply_gate_inplace(s, g);
    sink = s.amplitudes[0].real();
  });
  std::printf("15-qubit 240-param circuit   parallel %8.2f ms   serial %8.2f ms   x%.2f\n",
              par, ser, ser / par);
  (void)sink;
}

void bench_gram() {
  RandomStream rng(12);
  const std::size_t d = 32768;
  std::vector<double> v(d);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  KernelSpec kernel;

  volatile double sink = 0.0;
  const double fft = time_ms(5, [&] { sink = gram_multiply(v, kernel)[0]; });
  // the dense reference is O(D^2); one rep at a smaller size keeps it honest
  std::vector<double> v_small(v.begin(), v.begin() + 4096);
  const double dense_small =
      time_ms(1, [&] { sink = ref::gram_multiply(v_small, kernel)[0]; });
  std::printf("gram multiply D=32768        fft      %8.2f ms\n", fft);
  std::printf("gram multiply D=4096         dense    %8.2f ms   (reference, O(D^2))\n",
              dense_small);
  (void)sink;
}

void bench_gemm() {
  RandomStream rng(13);
  const std::size_t m = 64, k = 512, n = 256;
  std::vector<double> a(m * k), b(k * n), c(m * n);
  for (auto& x : a) x = rng.uniform(-1.0, 1.0);
  for (auto& x : b) x = rng.uniform(-1.0, 1.0);

  const double par = time_ms(20, [&] { gemm(a, b, c, m, k, n); });
  std::printf("gemm 64x512x256              parallel %8.2f ms\n", par);
}

}  // namespace

int main() {
  configure_threads();
  std::printf("worker threads: %d\n\n", worker_threads());
  bench_gates();
  bench_gram();
  bench_gemm();
  return 0;
}
