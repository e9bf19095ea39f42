#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "qiml/dynamics/ks.hpp"
#include "qiml/dynamics/qimd.hpp"
#include "qiml/metrics/metrics.hpp"

using namespace qiml;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<double> single_mode(std::size_t n, double length, int m, double amp) {
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j)
    u[j] = amp * std::sin(2.0 * pi * m * (static_cast<double>(j) * length / n) /
                          length);
  return u;
}

double mode_amplitude(const std::vector<double>& u, int m) {
  ComplexBuffer buf(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) buf[j] = u[j];
  fft_forward_inplace(buf);
  return std::abs(buf[m]) / (u.size() / 2.0);
}

}  // namespace

TEST_CASE("zero field is a fixed point") {
  KSConfig cfg;
  cfg.n = 128;
  KSSolver solver(cfg);
  solver.set_initial(std::vector<double>(128, 0.0));
  solver.advance(100);
  for (double v : solver.physical_field()) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("linear dispersion k^2 - k^4 within 1%") {
  // L = 32*pi puts integer modes at k = m/16
  KSConfig cfg;
  cfg.n = 256;
  cfg.dt = 0.01;
  for (const auto& [m, k] : std::vector<std::pair<int, double>>{
           {4, 0.25}, {8, 0.5}, {32, 2.0}}) {
    KSSolver solver(cfg);
    solver.set_initial(single_mode(cfg.n, cfg.length, m, 1e-6));
    const double a0 = mode_amplitude(solver.physical_field(), m);
    const int steps = 10;  // t = 0.1
    solver.advance(steps);
    const double a1 = mode_amplitude(solver.physical_field(), m);
    const double rate = std::log(a1 / a0) / (steps * cfg.dt);
    const double expected = k * k - k * k * k * k;
    REQUIRE(std::abs(rate - expected) <= 0.01 * std::abs(expected));
  }
}

TEST_CASE("spatial mean conserved over 10^4 steps") {
  KSConfig cfg;
  cfg.n = 128;
  KSSolver solver(cfg);
  RandomStream rng(3);
  solver.set_random_initial(rng);
  solver.advance(10000);
  const auto u = solver.physical_field();
  double mean = 0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(u.size());
  CHECK(std::abs(mean) < 1e-10);
  // still on the attractor, not blown up
  double amax = 0;
  for (double v : u) amax = std::max(amax, std::abs(v));
  CHECK(amax > 0.5);
  CHECK(amax < 10.0);
}

TEST_CASE("blow-up raises a runtime error naming the step") {
  KSConfig cfg;
  cfg.n = 64;
  cfg.dt = 0.05;
  KSSolver solver(cfg);
  solver.set_initial(single_mode(cfg.n, cfg.length, 3, 1e7));
  CHECK_THROWS_AS(solver.advance(50), std::runtime_error);
}

TEST_CASE("dataset generation: mean removal, determinism, envelope") {
  KSConfig cfg;
  cfg.n = 128;
  cfg.transient_steps = 1000;
  RandomStream rng(42);
  const auto series = generate_ks_dataset(cfg, 2, 20, rng);
  CHECK(series.n_trajectories == 2);
  CHECK(series.n_frames == 20);
  CHECK(series.cols == 128);
  CHECK(series.dt == doctest::Approx(cfg.dt * cfg.frames_per_save));
  series.validate();
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t f = 0; f < 20; ++f) {
      double mean = 0;
      for (double v : series.frame(t, f)) mean += v;
      REQUIRE(std::abs(mean / 128.0) < 1e-12);
    }
  double amax = 0;
  for (double v : series.values) amax = std::max(amax, std::abs(v));
  CHECK(amax > 0.5);
  CHECK(amax < 10.0);

  RandomStream rng2(42);
  const auto replay = generate_ks_dataset(cfg, 2, 20, rng2);
  REQUIRE(replay.values == series.values);
}

TEST_CASE("stationarity: half-trajectory PDFs agree in total variation") {
  KSConfig cfg;
  cfg.n = 128;
  cfg.transient_steps = 2000;
  RandomStream rng(7);
  const auto series = generate_ks_dataset(cfg, 1, 1200, rng);

  FieldSeries first = series, second = series;
  first.n_frames = 600;
  first.values.assign(series.values.begin(),
                      series.values.begin() + 600 * 128);
  second.n_frames = 600;
  second.values.assign(series.values.begin() + 600 * 128, series.values.end());

  const auto h1 = value_pdf(first, 51, -4.0, 4.0);
  const auto h2 = value_pdf(second, 51, -4.0, 4.0);
  const double w = h1.edges[1] - h1.edges[0];
  std::vector<double> p(51), q(51);
  for (std::size_t i = 0; i < 51; ++i) {
    p[i] = h1.density[i] * w;
    q[i] = h2.density[i] * w;
  }
  const auto [tv, kl] = distribution_distance(p, q);
  (void)kl;
  CHECK(tv <= 0.1);
}

TEST_CASE("spectral derivatives against analytic oracles") {
  const std::size_t n = 256;
  const double L = 5.0;
  std::vector<double> u(n), c(n, 3.0);
  for (std::size_t j = 0; j < n; ++j)
    u[j] = std::sin(2.0 * pi * (static_cast<double>(j) * L / n) / L);
  const auto [ux, uxx] = spectral_derivatives(u, L);
  const double a = 2.0 * pi / L;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) * L / n;
    REQUIRE(std::abs(ux[j] - a * std::cos(a * x)) < 1e-10);
    REQUIRE(std::abs(uxx[j] + a * a * u[j]) < 1e-10);
  }
  const auto [cx, cxx] = spectral_derivatives(c, L);
  for (std::size_t j = 0; j < n; ++j) {
    REQUIRE(std::abs(cx[j]) < 1e-12);
    REQUIRE(std::abs(cxx[j]) < 1e-12);
  }
}

TEST_CASE("split arithmetic and validation") {
  const auto make = [](std::size_t traj) {
    FieldSeries s;
    s.n_trajectories = traj;
    s.n_frames = 2;
    s.rows = 1;
    s.cols = 4;
    s.values.assign(traj * 2 * 4, 1.0);
    return s;
  };
  SplitSpec spec;

  auto s10 = split_dataset(make(10), spec);
  CHECK(s10.train.n_trajectories == 8);
  CHECK(s10.val.n_trajectories == 1);
  CHECK(s10.test.n_trajectories == 1);

  auto s7 = split_dataset(make(7), spec);
  CHECK(s7.train.n_trajectories == 5);
  CHECK(s7.val.n_trajectories == 1);
  CHECK(s7.test.n_trajectories == 1);

  auto s1200 = split_dataset(make(1200), spec);
  CHECK(s1200.train.n_trajectories == 960);
  CHECK(s1200.val.n_trajectories == 120);
  CHECK(s1200.test.n_trajectories == 120);

  CHECK_THROWS(split_dataset(make(2), spec));

  SplitSpec bad;
  bad.train = 0.5;
  bad.val = 0.2;
  bad.test = 0.2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("qimd round-trip, size estimate and corruption handling") {
  FieldSeries s;
  s.n_trajectories = 2;
  s.n_frames = 3;
  s.rows = 8;
  s.cols = 8;
  s.dt = 0.25;
  s.values.resize(2 * 3 * 64);
  RandomStream rng(1);
  for (auto& v : s.values) v = rng.uniform(-5, 5);

  const std::string path = "qimd_roundtrip_test.qimd";
  write_field_series(s, path);
  const auto back = ingest_field_series(path);
  CHECK(back.n_trajectories == 2);
  CHECK(back.n_frames == 3);
  CHECK(back.rows == 8);
  CHECK(back.cols == 8);
  CHECK(back.dt == 0.25);
  REQUIRE(back.values == s.values);

  // estimate matches the actual file size
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  const auto actual = static_cast<std::uint64_t>(in.tellg());
  in.close();
  CHECK(qimd_size_estimate(2, 3, 8, 8) == actual);

  // 1200x2000xN=512 dry-run arithmetic from the headline dataset
  const auto big = qimd_size_estimate(1200, 2000, 1, 512);
  CHECK(big >= std::uint64_t{9'830'400'000});          // payload alone
  CHECK(big <= std::uint64_t{9'830'400'000} + 1024);   // plus header + crc

  // truncation -> error naming sizes
  {
    std::ifstream full(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(full)),
                            std::istreambuf_iterator<char>());
    std::ofstream cut(path, std::ios::binary | std::ios::trunc);
    cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS((void)ingest_field_series(path), std::runtime_error);
  std::remove(path.c_str());

  // flipped payload byte -> CRC error
  write_field_series(s, path);
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(64);
    char b = 0x5a;
    f.write(&b, 1);
  }
  CHECK_THROWS_AS((void)ingest_field_series(path), std::runtime_error);
  std::remove(path.c_str());

  // 64x64 2D header accepted
  FieldSeries kolmo;
  kolmo.n_trajectories = 1;
  kolmo.n_frames = 2;
  kolmo.rows = 64;
  kolmo.cols = 64;
  kolmo.dt = 1.0;
  kolmo.values.assign(2 * 64 * 64, 0.5);
  write_field_series(kolmo, path);
  const auto k2 = ingest_field_series(path);
  CHECK(k2.rows == 64);
  CHECK(k2.cols == 64);
  std::remove(path.c_str());
}
