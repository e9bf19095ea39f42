#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "qiml/numcore/finite_diff.hpp"
#include "qiml/qcbm/ansatz.hpp"
#include "qiml/qcbm/kernel.hpp"
#include "qiml/qcbm/qprior.hpp"
#include "qiml/qcbm/target.hpp"
#include "qiml/qcbm/train.hpp"

using namespace qiml;
constexpr double pi = std::numbers::pi;

TEST_CASE("ansatz parameter accounting covers the published totals") {
  // single-rotation accounting
  CHECK(build_ansatz(10, 12, 1).parameter_count() == 120);
  CHECK(build_ansatz(10, 18, 1).parameter_count() == 180);
  CHECK(build_ansatz(15, 16, 1).parameter_count() == 240);
  // depth-3-to-8 accounting via rotations per layer
  CHECK(build_ansatz(10, 4, 3).parameter_count() == 120);
  CHECK(build_ansatz(10, 6, 3).parameter_count() == 180);
  CHECK(build_ansatz(15, 8, 2).parameter_count() == 240);
  for (const auto& a : {build_ansatz(10, 4, 3), build_ansatz(10, 6, 3),
                        build_ansatz(15, 8, 2)})
    CHECK(a.parameter_count() <= kParamBudget);
}

TEST_CASE("ansatz realisation structure") {
  const auto a = build_ansatz(3, 2, 2);
  std::vector<double> angles(a.parameter_count(), 0.1);
  const auto gates = a.realize(angles);
  // 2 layers x 3 qubits x 2 rotations + one CZ ring (3 gates) between layers
  CHECK(gates.size() == 12 + 3);
  int cz = 0;
  for (const auto& g : gates) cz += g.kind == GateKind::CZ;
  CHECK(cz == 3);

  CHECK_THROWS_AS((void)build_ansatz(0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)build_ansatz(16, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)build_ansatz(3, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)build_ansatz(3, 1, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)a.realize(std::vector<double>(5, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("kernel value and Gram delta closed form") {
  KernelSpec single;
  single.bandwidths = {0.25};
  CHECK(single.value(0.0) == doctest::Approx(1.0).epsilon(1e-15));

  // deltas at indices i=3, j=10 on a 32-line: MMD = 2(1 - k(d))
  const std::size_t d_len = 32;
  std::vector<double> p(d_len, 0.0), q(d_len, 0.0);
  p[3] = 1.0;
  q[10] = 1.0;
  const double dist = 7.0 / 31.0;
  const double expected =
      2.0 * (1.0 - std::exp(-dist * dist / (2.0 * 0.25 * 0.25)));
  CHECK(mmd_squared(p, q, single) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mmd basics and validation") {
  KernelSpec kernel;
  std::vector<double> p(64, 1.0 / 64.0);
  CHECK(mmd_squared(p, p, kernel) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> bad(63, 1.0 / 63.0);
  CHECK_THROWS_AS((void)mmd_squared(p, bad, kernel), std::invalid_argument);
  std::vector<double> unnorm(64, 1.0);
  CHECK_THROWS_AS((void)mmd_squared(p, unnorm, kernel), std::invalid_argument);
}

TEST_CASE("fft Gram product equals the dense oracle") {
  RandomStream rng(3);
  KernelSpec kernel;
  for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{64},
                        std::size_t{1000}}) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const auto fast = gram_multiply(v, kernel);
    const auto dense = ref::gram_multiply(v, kernel);
    for (std::size_t i = 0; i < n; ++i)
      REQUIRE(fast[i] == doctest::Approx(dense[i]).epsilon(1e-10));
  }

  // random near-distributions through both mmd paths
  std::vector<double> p(64), q(64);
  double sp = 0, sq = 0;
  for (auto& x : p) sp += (x = rng.uniform01());
  for (auto& x : q) sq += (x = rng.uniform01());
  for (auto& x : p) x /= sp;
  for (auto& x : q) x /= sq;
  CHECK(mmd_squared(p, q, kernel) ==
        doctest::Approx(ref::mmd_squared(p, q, kernel)).epsilon(1e-10));
}

TEST_CASE("mmd identity of indiscernibles by randomised search") {
  RandomStream rng(17);
  KernelSpec kernel;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(32), q(32);
    double sp = 0, sq = 0;
    for (auto& x : p) sp += (x = rng.uniform01());
    for (auto& x : q) sq += (x = rng.uniform01());
    for (auto& x : p) x /= sp;
    for (auto& x : q) x /= sq;
    const double m = mmd_squared(p, q, kernel);
    REQUIRE(m >= -1e-12);
    double linf = 0;
    for (std::size_t i = 0; i < 32; ++i) linf = std::max(linf, std::abs(p[i] - q[i]));
    if (linf > 1e-3) REQUIRE(m > 0.0);
  }
}

TEST_CASE("empirical target arithmetic and pooling oracle") {
  GridMapping m;
  m.rows = 1;
  m.cols = 2;
  m.block = 1;
  m.n_qubits = 2;

  FieldSeries s;
  s.n_trajectories = 1;
  s.n_frames = 1;
  s.rows = 1;
  s.cols = 2;
  s.values = {3.0, -1.0};
  const auto t = empirical_target(s, m);
  REQUIRE(t.size() == 4);
  CHECK(t[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(t[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t[2] == 0.0);
  CHECK(t[3] == 0.0);

  // constant-magnitude field -> uniform over active cells
  s.values = {2.0, -2.0};
  const auto u = empirical_target(s, m);
  CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(u[1] == doctest::Approx(0.5).epsilon(1e-12));

  // all-zero field rejected
  s.values = {0.0, 0.0};
  CHECK_THROWS_AS((void)empirical_target(s, m), std::invalid_argument);

  // 64x64 block-2 pooling against a nested-loop oracle
  GridMapping big;
  big.rows = 64;
  big.cols = 64;
  big.block = 2;
  big.n_qubits = 10;
  FieldSeries f;
  f.n_trajectories = 1;
  f.n_frames = 1;
  f.rows = 64;
  f.cols = 64;
  f.values.resize(64 * 64);
  RandomStream rng(8);
  for (auto& v : f.values) v = rng.uniform(-2, 2);
  const auto coarse = coarse_magnitude(f.frame(0, 0), big);
  REQUIRE(coarse.size() == 1024);
  for (std::size_t br = 0; br < 32; ++br)
    for (std::size_t bc = 0; bc < 32; ++bc) {
      double mean = 0;
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
          mean += std::abs(f.values[(br * 2 + i) * 64 + (bc * 2 + j)]);
      mean /= 4.0;
      REQUIRE(coarse[br * 32 + bc] == doctest::Approx(mean).epsilon(1e-12));
    }
  const auto target = empirical_target(f, big);
  double sum = 0;
  for (double v : target) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parameter-shift gradient against finite differences") {
  KernelSpec kernel;

  // zero-parameter circuit -> empty gradient
  Ansatz none;
  none.n_qubits = 2;
  none.n_rotation_layers = 0;
  none.rotations_per_layer = 1;
  std::vector<double> delta(4, 0.0);
  delta[0] = 1.0;
  CHECK(parameter_shift_gradient(none, {}, delta, kernel).empty());

  // 1-qubit RX at pi/4, delta target
  const auto a1 = build_ansatz(1, 1, 1);
  std::vector<double> th{pi / 4};
  std::vector<double> d2(2, 0.0);
  d2[0] = 1.0;
  const auto g = parameter_shift_gradient(a1, th, d2, kernel);
  const auto fd = finite_diff_gradient(
      [&](const std::vector<double>& x) {
        return mmd_squared(a1.born(x), d2, kernel);
      },
      th, 1e-5);
  REQUIRE(g.size() == 1);
  CHECK(g[0] == doctest::Approx(fd[0]).epsilon(1e-6));

  // 100 random circuits up to 4 qubits
  RandomStream rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    const int layers = 1 + static_cast<int>(rng.next_u64() % 2);
    const int rots = 1 + static_cast<int>(rng.next_u64() % 3);
    const auto a = build_ansatz(n, layers, rots);
    std::vector<double> angles(a.parameter_count());
    for (auto& x : angles) x = rng.uniform(-pi, pi);
    std::vector<double> target(std::size_t{1} << n);
    double s = 0;
    for (auto& x : target) s += (x = rng.uniform01());
    for (auto& x : target) x /= s;

    const auto grad = parameter_shift_gradient(a, angles, target, kernel);
    const auto oracle = finite_diff_gradient(
        [&](const std::vector<double>& x) {
          return mmd_squared(a.born(x), target, kernel);
        },
        angles, 1e-5);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      // absolute floor covers central-difference rounding noise (~h^2)
      const double tol = std::max(1e-9, 1e-6 * std::abs(oracle[i]));
      REQUIRE(std::abs(grad[i] - oracle[i]) <= tol);
    }
  }
}

TEST_CASE("training at a fixed point is a no-op") {
  const auto a = build_ansatz(3, 2, 1);
  RandomStream init_rng(4);
  std::vector<double> theta0(a.parameter_count());
  for (auto& x : theta0) x = init_rng.uniform(-pi, pi);
  const auto target = a.born(theta0);

  QcbmConfig cfg;
  cfg.epochs = 5;
  GridMapping m;
  m.rows = 1;
  m.cols = 8;
  m.block = 1;
  m.n_qubits = 3;
  // rng seeded identically to the init draw so training starts at theta0
  RandomStream rng(4);
  const auto res = train_qcbm(a, target, m, cfg, rng);
  CHECK(res.loss_log.front() <= 1e-12);
  CHECK(res.prior.final_loss <= 1e-12);
  for (std::size_t i = 0; i < theta0.size(); ++i)
    CHECK(res.prior.angles[i] == doctest::Approx(theta0[i]).epsilon(1e-12));
}

TEST_CASE("training determinism and best-so-far monotone trend") {
  const auto a = build_ansatz(4, 2, 2);
  std::vector<double> target(16);
  double s = 0;
  RandomStream trng(6);
  for (auto& x : target) s += (x = trng.uniform01());
  for (auto& x : target) x /= s;

  QcbmConfig cfg;
  cfg.epochs = 40;
  GridMapping m;
  m.rows = 1;
  m.cols = 16;
  m.block = 1;
  m.n_qubits = 4;

  RandomStream r1(11), r2(11);
  const auto a_res = train_qcbm(a, target, m, cfg, r1);
  const auto b_res = train_qcbm(a, target, m, cfg, r2);
  REQUIRE(a_res.prior.angles.size() == b_res.prior.angles.size());
  for (std::size_t i = 0; i < a_res.prior.angles.size(); ++i)
    REQUIRE(a_res.prior.angles[i] == b_res.prior.angles[i]);

  double best = a_res.loss_log.front();
  for (double l : a_res.loss_log) {
    best = std::min(best, l);
    REQUIRE(best <= a_res.loss_log.front() + 1e-15);
  }
  CHECK(a_res.prior.final_loss <= a_res.loss_log.front());

  // trained Born distribution normalised
  const auto p = a_res.prior.born();
  double sum = 0;
  for (double v : p) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact-mode and million-shot losses agree within 3 standard errors") {
  const auto a = build_ansatz(3, 2, 2);
  RandomStream rng(15);
  std::vector<double> angles(a.parameter_count());
  for (auto& x : angles) x = rng.uniform(-pi, pi);
  const auto p_exact = a.born(angles);

  const auto state = run_circuit(a.realize(angles), 3);
  const std::uint64_t shots = 1000000;
  const auto counts = sample_counts(state, shots, rng);
  std::vector<double> p_shot(8, 0.0);
  for (const auto& [idx, cnt] : counts)
    p_shot[idx] = static_cast<double>(cnt) / static_cast<double>(shots);

  std::vector<double> target(8);
  double s = 0;
  for (auto& x : target) s += (x = rng.uniform01());
  for (auto& x : target) x /= s;

  KernelSpec kernel;
  const double exact = mmd_squared(p_exact, target, kernel);
  const double sampled = mmd_squared(p_shot, target, kernel);
  // MMD is smooth in p; the frequency error per bin is ~sqrt(p/shots)
  double se = 0.0;
  for (double v : p_exact) se += v * (1.0 - v) / static_cast<double>(shots);
  se = 4.0 * std::sqrt(se);  // conservative propagation through the quadratic
  CHECK(std::abs(exact - sampled) <= 3.0 * std::max(se, 1e-9));
}

TEST_CASE("qprior round-trip is exact") {
  QPrior prior;
  prior.ansatz = build_ansatz(4, 3, 2);
  RandomStream rng(23);
  prior.angles.resize(prior.ansatz.parameter_count());
  for (auto& x : prior.angles) x = rng.uniform(-pi, pi);
  prior.mapping.rows = 1;
  prior.mapping.cols = 16;
  prior.mapping.block = 1;
  prior.mapping.n_qubits = 4;
  prior.final_loss = 1.25e-5;
  prior.dataset_id = "unit_test_set";
  prior.seed = 99;
  prior.epochs = 40;
  prior.cached_born = prior.born();

  const std::string path = "qprior_roundtrip_test.json";
  save_qprior(prior, path);
  const auto back = load_qprior(path);
  std::remove(path.c_str());

  CHECK(back.ansatz.n_qubits == 4);
  CHECK(back.ansatz.n_rotation_layers == 3);
  CHECK(back.ansatz.rotations_per_layer == 2);
  REQUIRE(back.angles.size() == prior.angles.size());
  for (std::size_t i = 0; i < prior.angles.size(); ++i)
    REQUIRE(back.angles[i] == prior.angles[i]);
  CHECK(back.mapping.cols == 16);
  CHECK(back.final_loss == prior.final_loss);
  CHECK(back.dataset_id == prior.dataset_id);
  CHECK(back.seed == 99);
  CHECK(back.epochs == 40);
  REQUIRE(back.cached_born.has_value());

  // corrupted file -> format error
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("{\"format_version\":99}", f);
    std::fclose(f);
  }
  CHECK_THROWS((void)load_qprior(path));
  std::remove(path.c_str());
}
