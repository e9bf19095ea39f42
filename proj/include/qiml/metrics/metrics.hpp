#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qiml/dynamics/field_series.hpp"

namespace qiml {

struct SpectrumResult {
  std::vector<double> wavenumber;  // bin index k = 0..N/2 (1D) or radius (2D)
  std::vector<double> energy;      // ensemble-averaged <E(k)>
};

struct Histogram {
  std::vector<double> edges;      // n_bins + 1
  std::vector<double> density;    // integral over bins == 1
  std::size_t sample_count = 0;
};

// E(k) per frame: conjugate modes +-k folded together with the 1/N^2 FFT
// convention and the 1/2 energy factor, so a sine of amplitude A puts
// A^2/4 in its bin and sum_k E(k) equals the mean of u^2/2.
SpectrumResult energy_spectrum_1d(const FieldSeries& series);

// 2D FFT energy binned by integer radius floor(sqrt(kx^2+ky^2)+0.5),
// same normalisation, ensemble-averaged. Square grids only.
SpectrumResult energy_spectrum_2d_radial(const FieldSeries& series);

// Density-normalised value histogram over all points and frames.
Histogram value_pdf(const FieldSeries& series, std::size_t n_bins, double lo,
                    double hi);
// Default binning: 101 bins spanning +-4 standard deviations of `ref`.
Histogram value_pdf_auto(const FieldSeries& series, const FieldSeries& ref,
                         std::size_t n_bins = 101, double n_sigmas = 4.0);

// Per-point mean-subtracted autocorrelation, normalised by the lag-0
// variance, averaged over spatial points. Zero-variance points are
// skipped; an all-constant series is rejected.
struct AutocorrResult {
  std::vector<double> t_star;  // lag / t_end
  std::vector<double> c;       // C(0) == 1
};
AutocorrResult temporal_autocorrelation(const FieldSeries& series);

// Per-frame relative L2 error ||pred_t - ref_t|| / ||ref_t||. Frames with
// ||ref_t|| == 0 are flagged (NaN entry) and reported via the flag count.
struct RelativeErrorResult {
  std::vector<double> e_r;
  std::size_t flagged_frames = 0;
};
RelativeErrorResult relative_error(const FieldSeries& pred, const FieldSeries& ref);

// 2D histogram over (u_x, u_xx) pairs of a 1D series, density-normalised.
struct Density2D {
  std::size_t n_bins = 0;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  std::vector<double> density;  // n_bins x n_bins, row-major
};
Density2D invariant_density(const FieldSeries& series, double length,
                            std::size_t n_bins);

// Half the per-point temporal variance; 2D series with >= 2 frames.
std::vector<double> tke_field(const FieldSeries& series);

// (total variation, KL with the 1e-10 floor) between two distributions
// on identical binning.
std::pair<double, double> distribution_distance(std::span<const double> p,
                                                std::span<const double> q);

// Log-space mean absolute error between spectra, skipping empty bins;
// the spectrum comparison statistic of the acceptance experiment.
double spectrum_log_mae(const SpectrumResult& a, const SpectrumResult& b);

// CSV emission for the report files (one curve per file, headered).
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace qiml
