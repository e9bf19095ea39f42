#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "qiml/metrics/metrics.hpp"
#include "qiml/numcore/random.hpp"

using namespace qiml;
constexpr double pi = std::numbers::pi;

namespace {

FieldSeries sine_series(std::size_t n, int mode, double amp, std::size_t frames = 1) {
  FieldSeries s;
  s.n_trajectories = 1;
  s.n_frames = frames;
  s.rows = 1;
  s.cols = n;
  s.dt = 1.0;
  s.values.reserve(frames * n);
  for (std::size_t f = 0; f < frames; ++f)
    for (std::size_t j = 0; j < n; ++j)
      s.values.push_back(amp *
                         std::sin(2.0 * pi * mode * static_cast<double>(j) / n));
  return s;
}

}  // namespace

TEST_CASE("1D spectrum: sine bin value and Parseval") {
  const auto s = sine_series(256, 5, 1.7);
  const auto spec = energy_spectrum_1d(s);
  REQUIRE(spec.energy.size() == 129);
  CHECK(spec.energy[5] == doctest::Approx(1.7 * 1.7 / 4.0).epsilon(1e-10));
  for (std::size_t k = 0; k < spec.energy.size(); ++k) {
    REQUIRE(spec.energy[k] >= 0.0);
    if (k != 5) REQUIRE(spec.energy[k] < 1e-12);
  }

  // Parseval on a random field: sum E(k) = mean u^2 / 2
  FieldSeries r;
  r.n_trajectories = 1;
  r.n_frames = 2;
  r.rows = 1;
  r.cols = 128;
  r.values.resize(256);
  RandomStream rng(5);
  for (auto& v : r.values) v = rng.uniform(-1, 1);
  const auto rs = energy_spectrum_1d(r);
  double total = 0;
  for (double e : rs.energy) total += e;
  double mean_u2 = 0;
  for (double v : r.values) mean_u2 += v * v;
  mean_u2 /= 256.0;
  CHECK(total == doctest::Approx(0.5 * mean_u2).epsilon(1e-9));

  // zero field -> zero spectrum
  FieldSeries z = sine_series(64, 1, 0.0);
  for (double e : energy_spectrum_1d(z).energy) CHECK(e == 0.0);

  FieldSeries two_d;
  two_d.n_trajectories = 1;
  two_d.n_frames = 1;
  two_d.rows = 8;
  two_d.cols = 8;
  two_d.values.assign(64, 0.0);
  CHECK_THROWS_AS((void)energy_spectrum_1d(two_d), std::invalid_argument);
}

TEST_CASE("2D radial spectrum: plane wave, isotropy, Parseval") {
  const std::size_t n = 32;
  const auto make_wave = [&](int kx, int ky) {
    FieldSeries s;
    s.n_trajectories = 1;
    s.n_frames = 1;
    s.rows = n;
    s.cols = n;
    s.values.resize(n * n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        s.values[r * n + c] =
            std::cos(2.0 * pi * (kx * static_cast<double>(c) +
                                 ky * static_cast<double>(r)) / n);
    return s;
  };

  const auto a = energy_spectrum_2d_radial(make_wave(3, 4));
  double peak = 0;
  std::size_t peak_bin = 0;
  double total = 0;
  for (std::size_t k = 0; k < a.energy.size(); ++k) {
    total += a.energy[k];
    if (a.energy[k] > peak) {
      peak = a.energy[k];
      peak_bin = k;
    }
  }
  CHECK(peak_bin == 5);
  CHECK(peak / total > 1.0 - 1e-10);
  // mean of cos^2 = 1/2, so total energy = 1/4
  CHECK(total == doctest::Approx(0.25).epsilon(1e-8));

  const auto b = energy_spectrum_2d_radial(make_wave(4, 3));
  REQUIRE(a.energy.size() == b.energy.size());
  for (std::size_t k = 0; k < a.energy.size(); ++k)
    REQUIRE(std::abs(a.energy[k] - b.energy[k]) < 1e-10);

  FieldSeries rect;
  rect.n_trajectories = 1;
  rect.n_frames = 1;
  rect.rows = 8;
  rect.cols = 16;
  rect.values.assign(128, 0.0);
  CHECK_THROWS_AS((void)energy_spectrum_2d_radial(rect), std::invalid_argument);
}

TEST_CASE("value pdf: constant spike, arcsine law, symmetry") {
  FieldSeries c;
  c.n_trajectories = 1;
  c.n_frames = 1;
  c.rows = 1;
  c.cols = 100;
  c.values.assign(100, 0.37);
  const auto h = value_pdf(c, 10, 0.0, 1.0);
  int occupied = 0;
  double integral = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    occupied += h.density[i] > 0;
    integral += h.density[i] * (h.edges[i + 1] - h.edges[i]);
    if (h.density[i] > 0) {
      CHECK(h.edges[i] <= 0.37);
      CHECK(h.edges[i + 1] >= 0.37);
    }
  }
  CHECK(occupied == 1);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));

  // sine samples follow the arcsine law 1/(pi sqrt(1-u^2))
  const auto s = sine_series(1 << 16, 7, 1.0);
  const auto hs = value_pdf(s, 41, -1.0, 1.0);
  for (std::size_t i = 8; i < 33; ++i) {  // interior bins only
    const double u = 0.5 * (hs.edges[i] + hs.edges[i + 1]);
    const double ref = 1.0 / (pi * std::sqrt(1.0 - u * u));
    REQUIRE(hs.density[i] == doctest::Approx(ref).epsilon(0.05));
  }

  // two half-constant fields -> symmetric two-spike histogram
  FieldSeries spikes;
  spikes.n_trajectories = 1;
  spikes.n_frames = 2;
  spikes.rows = 1;
  spikes.cols = 4;
  spikes.values = {-1.1, -1.1, -1.1, -1.1, 1.1, 1.1, 1.1, 1.1};
  const auto hp = value_pdf(spikes, 8, -2.0, 2.0);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(hp.density[i] == doctest::Approx(hp.density[7 - i]).epsilon(1e-12));

  FieldSeries empty;
  CHECK_THROWS_AS((void)value_pdf(empty, 10, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)value_pdf(c, 1, 0, 1), std::invalid_argument);
}

TEST_CASE("temporal autocorrelation: cosine oracle, C(0), noise bound, affine") {
  // u(x,t) = f(x) cos(w t)
  // long window keeps the finite-sample estimator bias ~1/(2(T-lag) sin w)
  // well under the tolerance
  const std::size_t points = 32, frames = 2000;
  const double w = 2.0 * pi * 30.0 / frames;
  FieldSeries s;
  s.n_trajectories = 1;
  s.n_frames = frames;
  s.rows = 1;
  s.cols = points;
  s.dt = 1.0;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t p = 0; p < points; ++p)
      s.values.push_back((1.0 + 0.1 * static_cast<double>(p)) *
                         std::cos(w * static_cast<double>(t)));
  const auto ac = temporal_autocorrelation(s);
  CHECK(ac.c[0] == 1.0);
  for (std::size_t lag = 1; lag <= 40; ++lag)
    REQUIRE(ac.c[lag] ==
            doctest::Approx(std::cos(w * static_cast<double>(lag))).epsilon(0.02));

  // affine invariance: u -> a u + b
  FieldSeries aff = s;
  for (auto& v : aff.values) v = -2.5 * v + 3.0;
  const auto ac2 = temporal_autocorrelation(aff);
  for (std::size_t lag = 0; lag < frames; ++lag)
    REQUIRE(std::abs(ac.c[lag] - ac2.c[lag]) < 1e-10);

  // white noise stays within the sampling bound
  FieldSeries noise;
  noise.n_trajectories = 1;
  noise.n_frames = 256;
  noise.rows = 1;
  noise.cols = 64;
  RandomStream rng(9);
  noise.values.resize(256 * 64);
  for (auto& v : noise.values) v = rng.normal();
  const auto an = temporal_autocorrelation(noise);
  const double bound = 4.0 / std::sqrt(256.0);
  for (std::size_t lag = 1; lag < 200; ++lag)
    REQUIRE(std::abs(an.c[lag]) <= bound);

  FieldSeries constant;
  constant.n_trajectories = 1;
  constant.n_frames = 10;
  constant.rows = 1;
  constant.cols = 4;
  constant.values.assign(40, 2.0);
  CHECK_THROWS_AS((void)temporal_autocorrelation(constant), std::invalid_argument);
}

TEST_CASE("relative error oracles") {
  FieldSeries ref = sine_series(64, 3, 1.0, 5);
  const auto zeros_err = [&] {
    FieldSeries pred = ref;
    for (auto& v : pred.values) v = 0.0;
    return relative_error(pred, ref);
  }();
  for (double e : zeros_err.e_r) REQUIRE(e == doctest::Approx(1.0).epsilon(1e-12));

  const auto self_err = relative_error(ref, ref);
  for (double e : self_err.e_r) REQUIRE(e == 0.0);

  FieldSeries scaled = ref;
  for (auto& v : scaled.values) v *= 1.1;
  const auto sc = relative_error(scaled, ref);
  for (double e : sc.e_r) REQUIRE(e == doctest::Approx(0.1).epsilon(1e-12));

  // scale invariance of pred and ref together
  FieldSeries p2 = scaled, r2 = ref;
  for (auto& v : p2.values) v *= 7.0;
  for (auto& v : r2.values) v *= 7.0;
  const auto sc2 = relative_error(p2, r2);
  for (std::size_t i = 0; i < sc.e_r.size(); ++i)
    REQUIRE(std::abs(sc.e_r[i] - sc2.e_r[i]) < 1e-12);

  // zero-norm reference frames are flagged
  FieldSeries zref = ref;
  for (std::size_t j = 0; j < zref.cols; ++j) zref.frame(0, 2)[j] = 0.0;
  const auto flagged = relative_error(ref, zref);
  CHECK(flagged.flagged_frames == 1);
  CHECK(std::isnan(flagged.e_r[2]));

  FieldSeries mismatched = ref;
  mismatched.cols = 32;
  mismatched.values.resize(5 * 32);
  CHECK_THROWS_AS((void)relative_error(mismatched, ref), std::invalid_argument);
}

TEST_CASE("invariant density: ellipse support and normalisation") {
  const double L = 10.0;
  const auto s = sine_series(512, 1, 1.0);
  const auto d = invariant_density(s, L, 41);
  const double a = 2.0 * pi / L;        // u_x amplitude
  const double b = a * a;               // u_xx amplitude

  const double wx = (d.x_hi - d.x_lo) / 41.0;
  const double wy = (d.y_hi - d.y_lo) / 41.0;
  double integral = 0;
  for (std::size_t r = 0; r < 41; ++r)
    for (std::size_t c = 0; c < 41; ++c) {
      const double v = d.density[r * 41 + c];
      REQUIRE(v >= 0.0);
      integral += v * wx * wy;
      if (v > 0) {
        const double x = d.x_lo + (static_cast<double>(c) + 0.5) * wx;
        const double y = d.y_lo + (static_cast<double>(r) + 0.5) * wy;
        const double ell = (x / a) * (x / a) + (y / b) * (y / b);
        // occupied bins sit on the ellipse up to one bin diagonal
        REQUIRE(std::abs(std::sqrt(ell) - 1.0) < 0.15);
      }
    }
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));

  // constant field -> single occupied bin at the origin
  FieldSeries c0;
  c0.n_trajectories = 1;
  c0.n_frames = 1;
  c0.rows = 1;
  c0.cols = 64;
  c0.values.assign(64, 1.5);
  const auto dc = invariant_density(c0, L, 11);
  int occupied = 0;
  for (double v : dc.density) occupied += v > 0;
  CHECK(occupied == 1);
  CHECK(dc.density[5 * 11 + 5] > 0.0);
}

TEST_CASE("tke field oracles") {
  // constant in time -> zero field
  FieldSeries c;
  c.n_trajectories = 1;
  c.n_frames = 4;
  c.rows = 4;
  c.cols = 4;
  c.values.resize(64);
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t p = 0; p < 16; ++p)
      c.values[f * 16 + p] = static_cast<double>(p);
  for (double v : tke_field(c)) CHECK(v == 0.0);

  // u(p,t) = a(p) s_t with unit-variance s -> tke = a^2/2
  const std::size_t frames = 10000;
  FieldSeries s;
  s.n_trajectories = 1;
  s.n_frames = frames;
  s.rows = 2;
  s.cols = 2;
  s.values.resize(frames * 4);
  RandomStream rng(10);
  const double amp[4] = {0.5, 1.0, 2.0, 3.0};
  for (std::size_t f = 0; f < frames; ++f) {
    const double st = rng.normal();
    for (std::size_t p = 0; p < 4; ++p) s.values[f * 4 + p] = amp[p] * st;
  }
  const auto tke = tke_field(s);
  for (std::size_t p = 0; p < 4; ++p) {
    REQUIRE(tke[p] >= 0.0);
    REQUIRE(tke[p] == doctest::Approx(0.5 * amp[p] * amp[p]).epsilon(0.05));
  }

  FieldSeries single;
  single.n_trajectories = 1;
  single.n_frames = 1;
  single.rows = 2;
  single.cols = 2;
  single.values.assign(4, 1.0);
  CHECK_THROWS_AS((void)tke_field(single), std::invalid_argument);
}

TEST_CASE("distribution distance arithmetic") {
  std::vector<double> p{0.75, 0.25}, q{0.5, 0.5};
  auto [tv, kl] = distribution_distance(p, q);
  CHECK(tv == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(kl > 0.0);

  auto [tv0, kl0] = distribution_distance(p, p);
  CHECK(tv0 == 0.0);
  CHECK(kl0 == doctest::Approx(0.0).epsilon(1e-15));

  std::vector<double> d1{1.0, 0.0}, d2{0.0, 1.0};
  CHECK(distribution_distance(d1, d2).first == doctest::Approx(1.0));

  CHECK_THROWS_AS((void)distribution_distance(p, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("csv writer is deterministic and headered") {
  const std::string path = "csv_writer_test.csv";
  write_csv(path, "a,b", {{1.0, 0.5}, {2.0, 0.25}});
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "a,b");
  CHECK(l2 == "1,2");
  CHECK(l3 == "0.5,0.25");
  std::remove(path.c_str());
}
