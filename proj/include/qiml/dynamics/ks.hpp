#pragma once

#include <cstdint>
#include <numbers>
#include <utility>

#include "qiml/dynamics/field_series.hpp"
#include "qiml/numcore/fft.hpp"
#include "qiml/numcore/random.hpp"

namespace qiml {

struct KSConfig {
  double length = 32.0 * std::numbers::pi;
  std::size_t n = 512;  // grid points, power of two
  double nu = 1.0;
  double mu = 1.0;
  double dt = 0.05;
  int frames_per_save = 5;
  int transient_steps = 2000;
  double ic_amplitude = 0.1;
  int ic_max_mode = 8;  // band limit of the random initial condition

  void validate() const;
};

// ETDRK4 pseudospectral integrator for u_t + u u_x + nu u_xx + mu u_xxxx = 0
// on a periodic domain, 2/3-rule dealiasing on the quadratic term.
class KSSolver {
 public:
  explicit KSSolver(const KSConfig& config);

  void set_initial(std::span<const double> u);
  // Random band-limited zero-mean initial condition.
  void set_random_initial(RandomStream& rng);

  // Advance one dt. Throws std::runtime_error on blow-up (|u|_inf > 1e6),
  // naming the step index.
  void step();
  void advance(int n_steps);

  std::vector<double> physical_field() const;
  const KSConfig& config() const { return cfg_; }

 private:
  KSConfig cfg_;
  ComplexBuffer state_;                 // spectral u
  std::vector<double> wavenumbers_;
  std::vector<double> e_, e2_;          // exp(L dt), exp(L dt/2)
  std::vector<double> q_, f1_, f2_, f3_;
  std::vector<double> dealias_;
  std::int64_t step_index_ = 0;

  ComplexBuffer nonlinear(const ComplexBuffer& v) const;
};

// Per trajectory: seeded random start, transient discarded, then n_frames
// saved every frames_per_save steps with the spatial mean removed.
FieldSeries generate_ks_dataset(const KSConfig& config,
                                std::size_t n_trajectories,
                                std::size_t n_frames, RandomStream& rng);

// (u_x, u_xx) by ik / (ik)^2 multipliers; Nyquist mode zeroed for u_x.
std::pair<std::vector<double>, std::vector<double>> spectral_derivatives(
    std::span<const double> frame, double length);

}  // namespace qiml
