#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qiml/numcore/adam.hpp"
#include "qiml/numcore/fft.hpp"
#include "qiml/numcore/finite_diff.hpp"
#include "qiml/numcore/random.hpp"

using namespace qiml;
constexpr double pi = std::numbers::pi;

TEST_CASE("fft constant signal is a DC spike") {
  ComplexBuffer x(8, cplx(3.5, 0.0));
  const auto y = fft_forward(x);
  CHECK(std::abs(y[0] - cplx(28.0, 0.0)) < 1e-12);
  for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(y[k]) < 1e-12);
}

TEST_CASE("fft of sin(2 pi j / N) lands on modes 1 and N-1") {
  const std::size_t n = 16;
  ComplexBuffer x(n);
  for (std::size_t j = 0; j < n; ++j)
    x[j] = std::sin(2.0 * pi * static_cast<double>(j) / n);
  const auto y = fft_forward(x);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 1 || k == n - 1)
      CHECK(std::abs(y[k]) == doctest::Approx(n / 2.0).epsilon(1e-12));
    else
      CHECK(std::abs(y[k]) < 1e-10);
  }
}

TEST_CASE("fft matches a direct O(N^2) DFT oracle") {
  const std::size_t n = 32;
  RandomStream rng(7);
  ComplexBuffer x(n);
  for (auto& v : x) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const auto y = fft_forward(x);
  for (std::size_t k = 0; k < n; ++k) {
    cplx ref(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      ref += x[j] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * j) / n);
    CHECK(std::abs(y[k] - ref) < 1e-10);
  }
}

TEST_CASE("fft round-trip up to 2^15 and Parseval") {
  RandomStream rng(9);
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{64},
                        std::size_t{4096}, std::size_t{32768}}) {
    ComplexBuffer x(n);
    for (auto& v : x) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto y = fft_forward(x);
    const auto back = fft_inverse(y);
    double max_err = 0, time_e = 0, freq_e = 0;
    for (std::size_t j = 0; j < n; ++j) {
      max_err = std::max(max_err, std::abs(back[j] - x[j]));
      time_e += std::norm(x[j]);
      freq_e += std::norm(y[j]);
    }
    // rounding accumulates over log2(n) butterfly stages
    CHECK(max_err < 1e-11);
    CHECK(time_e == doctest::Approx(freq_e / static_cast<double>(n)).epsilon(1e-10));
  }
}

TEST_CASE("fft rejects non-power-of-two lengths") {
  ComplexBuffer x(12);
  CHECK_THROWS_AS((void)fft_forward(x), std::invalid_argument);
}

TEST_CASE("adam zero gradient is the identity") {
  std::vector<double> p{1.0, -2.0, 0.5};
  auto state = AdamState::init(3, 0.1);
  const std::vector<double> g(3, 0.0);
  for (int i = 0; i < 10; ++i) adam_update(p, g, state);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -2.0);
  CHECK(p[2] == 0.5);
  CHECK(state.step_count == 10);
}

TEST_CASE("adam first-step magnitude matches the bias-corrected formula") {
  const double lr = 0.05, g = 0.3;
  std::vector<double> p{2.0};
  auto state = AdamState::init(1, lr);
  adam_update(p, std::vector<double>{g}, state);
  // t=1: m_hat = g, v_hat = g^2, step = lr*g/(|g| + eps/sqrt(1-b2)) ~ lr
  const double expected =
      lr * g / (std::sqrt(g * g) + state.epsilon);
  CHECK(p[0] == doctest::Approx(2.0 - expected).epsilon(1e-12));
}

TEST_CASE("adam two identical-gradient steps match a scalar recurrence oracle") {
  const double lr = 0.01, g = -0.7, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<double> p{0.0};
  auto state = AdamState::init(1, lr);
  adam_update(p, std::vector<double>{g}, state);
  adam_update(p, std::vector<double>{g}, state);

  // independent evaluation of the recurrence
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    x -= lr * mh / (std::sqrt(vh) + eps);
  }
  CHECK(p[0] == doctest::Approx(x).epsilon(1e-14));
}

TEST_CASE("adam rejects length mismatches") {
  std::vector<double> p{1.0, 2.0};
  auto state = AdamState::init(2, 0.1);
  CHECK_THROWS_AS(adam_update(p, std::vector<double>{1.0}, state),
                  std::invalid_argument);
}

TEST_CASE("finite differences on simple functions") {
  const auto quad = [](const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return s;
  };
  const auto g = finite_diff_gradient(quad, {1.0, 2.0}, 1e-5);
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(4.0).epsilon(1e-8));

  const auto constant = [](const std::vector<double>&) { return 4.2; };
  for (double v : finite_diff_gradient(constant, {0.1, 0.2, 0.3}, 1e-5))
    CHECK(v == 0.0);

  const auto sine = [](const std::vector<double>& x) { return std::sin(x[0]); };
  CHECK(finite_diff_gradient(sine, {0.3}, 1e-5)[0] ==
        doctest::Approx(std::cos(0.3)).epsilon(1e-9));

  CHECK_THROWS_AS((void)finite_diff_gradient(sine, {0.3}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("random streams replay and spawned streams differ") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RandomStream parent(42);
  auto c0 = parent.spawn(0);
  auto c1 = parent.spawn(1);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += c0.next_u64() == c1.next_u64();
  CHECK(same == 0);

  RandomStream u(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = u.uniform01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
}
