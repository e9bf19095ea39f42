#include "qiml/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qiml/dynamics/ks.hpp"
#include "qiml/numcore/fft.hpp"

namespace qiml {

SpectrumResult energy_spectrum_1d(const FieldSeries& series) {
  if (series.is_2d())
    throw std::invalid_argument("energy_spectrum_1d: 2D input, use the radial variant");
  const std::size_t n = series.cols;
  if (!is_power_of_two(n))
    throw std::invalid_argument("energy_spectrum_1d: N must be a power of two");

  SpectrumResult out;
  out.wavenumber.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) out.wavenumber[k] = static_cast<double>(k);
  out.energy.assign(n / 2 + 1, 0.0);

  const double norm = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(n));
  std::size_t n_fields = 0;
  ComplexBuffer buf(n);
  for (std::size_t t = 0; t < series.n_trajectories; ++t)
    for (std::size_t f = 0; f < series.n_frames; ++f) {
      const auto u = series.frame(t, f);
      for (std::size_t i = 0; i < n; ++i) buf[i] = u[i];
      fft_forward_inplace(buf);
      out.energy[0] += std::norm(buf[0]) * norm;
      out.energy[n / 2] += std::norm(buf[n / 2]) * norm;
      for (std::size_t k = 1; k < n / 2; ++k)
        out.energy[k] += (std::norm(buf[k]) + std::norm(buf[n - k])) * norm;
      ++n_fields;
    }
  for (auto& e : out.energy) e /= static_cast<double>(n_fields);
  return out;
}

SpectrumResult energy_spectrum_2d_radial(const FieldSeries& series) {
  if (!series.is_2d() || series.rows != series.cols)
    throw std::invalid_argument("energy_spectrum_2d_radial: need a square 2D grid");
  const std::size_t n = series.rows;
  if (!is_power_of_two(n))
    throw std::invalid_argument("energy_spectrum_2d_radial: N must be a power of two");

  const std::size_t half = n / 2;
  const auto max_radius = static_cast<std::size_t>(
      std::floor(std::sqrt(2.0) * static_cast<double>(half) + 0.5));
  SpectrumResult out;
  out.wavenumber.resize(max_radius + 1);
  for (std::size_t k = 0; k <= max_radius; ++k)
    out.wavenumber[k] = static_cast<double>(k);
  out.energy.assign(max_radius + 1, 0.0);

  const double nt = static_cast<double>(n) * static_cast<double>(n);
  const double norm = 0.5 / (nt * nt);
  std::size_t n_fields = 0;
  std::vector<ComplexBuffer> rows_buf(n, ComplexBuffer(n));
  for (std::size_t t = 0; t < series.n_trajectories; ++t)
    for (std::size_t f = 0; f < series.n_frames; ++f) {
      const auto u = series.frame(t, f);
      // 2D FFT: rows then columns
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) rows_buf[r][c] = u[r * n + c];
        fft_forward_inplace(rows_buf[r]);
      }
      ComplexBuffer col(n);
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = rows_buf[r][c];
        fft_forward_inplace(col);
        for (std::size_t r = 0; r < n; ++r) rows_buf[r][c] = col[r];
      }
      for (std::size_t r = 0; r < n; ++r) {
        const double kr = (r <= half) ? static_cast<double>(r)
                                      : static_cast<double>(r) - static_cast<double>(n);
        for (std::size_t c = 0; c < n; ++c) {
          const double kc = (c <= half)
                                ? static_cast<double>(c)
                                : static_cast<double>(c) - static_cast<double>(n);
          const auto bin = static_cast<std::size_t>(
              std::floor(std::sqrt(kr * kr + kc * kc) + 0.5));
          out.energy[bin] += std::norm(rows_buf[r][c]) * norm;
        }
      }
      ++n_fields;
    }
  for (auto& e : out.energy) e /= static_cast<double>(n_fields);
  return out;
}

Histogram value_pdf(const FieldSeries& series, std::size_t n_bins, double lo,
                    double hi) {
  if (n_bins < 2) throw std::invalid_argument("value_pdf: need at least 2 bins");
  if (!(hi > lo)) throw std::invalid_argument("value_pdf: empty range");
  if (series.values.empty()) throw std::invalid_argument("value_pdf: empty series");

  Histogram h;
  h.edges.resize(n_bins + 1);
  const double w = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.edges[i] = lo + w * static_cast<double>(i);

  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : series.values) {
    if (v < lo || v > hi) continue;
    auto bin = static_cast<std::size_t>((v - lo) / w);
    if (bin >= n_bins) bin = n_bins - 1;
    counts[bin] += 1;
    h.sample_count += 1;
  }
  if (h.sample_count == 0)
    throw std::invalid_argument("value_pdf: no samples inside range");

  h.density.resize(n_bins);
  const double inv = 1.0 / (static_cast<double>(h.sample_count) * w);
  for (std::size_t i = 0; i < n_bins; ++i)
    h.density[i] = static_cast<double>(counts[i]) * inv;
  return h;
}

Histogram value_pdf_auto(const FieldSeries& series, const FieldSeries& ref,
                         std::size_t n_bins, double n_sigmas) {
  double mean = 0.0;
  for (double v : ref.values) mean += v;
  mean /= static_cast<double>(ref.values.size());
  double var = 0.0;
  for (double v : ref.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ref.values.size());
  double sigma = std::sqrt(var);
  if (!(sigma > 0.0)) sigma = 1.0;
  return value_pdf(series, n_bins, mean - n_sigmas * sigma, mean + n_sigmas * sigma);
}

AutocorrResult temporal_autocorrelation(const FieldSeries& series) {
  const std::size_t T = series.n_frames;
  if (T < 2) throw std::invalid_argument("temporal_autocorrelation: need >= 2 frames");
  const std::size_t g = series.grid_size();

  AutocorrResult out;
  out.t_star.resize(T);
  out.c.assign(T, 0.0);
  for (std::size_t lag = 0; lag < T; ++lag)
    out.t_star[lag] = static_cast<double>(lag) / static_cast<double>(T);

  std::size_t used_points = 0;
  std::vector<double> u(T);
  for (std::size_t traj = 0; traj < series.n_trajectories; ++traj)
    for (std::size_t p = 0; p < g; ++p) {
      double mean = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        u[t] = series.frame(traj, t)[p];
        mean += u[t];
      }
      mean /= static_cast<double>(T);
      double var = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        u[t] -= mean;
        var += u[t] * u[t];
      }
      var /= static_cast<double>(T);
      if (!(var > 0.0)) continue;  // constant point, skip

      ++used_points;
      for (std::size_t lag = 0; lag < T; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < T; ++t) s += u[t] * u[t + lag];
        out.c[lag] += s / (static_cast<double>(T - lag) * var);
      }
    }
  if (used_points == 0)
    throw std::invalid_argument("temporal_autocorrelation: zero-variance series");
  for (auto& v : out.c) v /= static_cast<double>(used_points);
  out.c[0] = 1.0;  // exact by construction up to rounding
  return out;
}

RelativeErrorResult relative_error(const FieldSeries& pred, const FieldSeries& ref) {
  if (pred.n_trajectories != ref.n_trajectories || pred.n_frames != ref.n_frames ||
      pred.rows != ref.rows || pred.cols != ref.cols)
    throw std::invalid_argument("relative_error: shape mismatch");

  RelativeErrorResult out;
  out.e_r.resize(pred.n_frames);
  for (std::size_t f = 0; f < pred.n_frames; ++f) {
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 0; t < pred.n_trajectories; ++t) {
      const auto p = pred.frame(t, f);
      const auto r = ref.frame(t, f);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        num += (p[i] - r[i]) * (p[i] - r[i]);
        den += r[i] * r[i];
      }
      if (!(den > 0.0)) {
        ++out.flagged_frames;
        continue;
      }
      sum += std::sqrt(num / den);
      ++used;
    }
    out.e_r[f] = used > 0 ? sum / static_cast<double>(used)
                          : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Density2D invariant_density(const FieldSeries& series, double length,
                            std::size_t n_bins) {
  if (series.is_2d())
    throw std::invalid_argument("invariant_density: 1D series required");
  if (series.values.empty())
    throw std::invalid_argument("invariant_density: empty series");
  if (n_bins < 2) throw std::invalid_argument("invariant_density: need >= 2 bins");

  // first pass: derivative ranges
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> derivs;
  derivs.reserve(series.n_trajectories * series.n_frames);
  for (std::size_t t = 0; t < series.n_trajectories; ++t)
    for (std::size_t f = 0; f < series.n_frames; ++f) {
      auto d = spectral_derivatives(series.frame(t, f), length);
      for (double v : d.first) {
        x_lo = std::min(x_lo, v);
        x_hi = std::max(x_hi, v);
      }
      for (double v : d.second) {
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
      derivs.push_back(std::move(d));
    }
  // widen degenerate ranges (constant field)
  if (!(x_hi > x_lo)) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  if (!(y_hi > y_lo)) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }

  Density2D out;
  out.n_bins = n_bins;
  out.x_lo = x_lo;
  out.x_hi = x_hi;
  out.y_lo = y_lo;
  out.y_hi = y_hi;
  out.density.assign(n_bins * n_bins, 0.0);
  const double wx = (x_hi - x_lo) / static_cast<double>(n_bins);
  const double wy = (y_hi - y_lo) / static_cast<double>(n_bins);

  std::size_t count = 0;
  for (const auto& [ux, uxx] : derivs)
    for (std::size_t i = 0; i < ux.size(); ++i) {
      auto bx = static_cast<std::size_t>((ux[i] - x_lo) / wx);
      auto by = static_cast<std::size_t>((uxx[i] - y_lo) / wy);
      bx = std::min(bx, n_bins - 1);
      by = std::min(by, n_bins - 1);
      out.density[by * n_bins + bx] += 1.0;
      ++count;
    }
  const double inv = 1.0 / (static_cast<double>(count) * wx * wy);
  for (auto& v : out.density) v *= inv;
  return out;
}

std::vector<double> tke_field(const FieldSeries& series) {
  if (series.n_frames < 2)
    throw std::invalid_argument("tke_field: need at least two frames");
  const std::size_t g = series.grid_size();
  const std::size_t total = series.n_trajectories * series.n_frames;

  std::vector<double> mean(g, 0.0), tke(g, 0.0);
  for (std::size_t t = 0; t < series.n_trajectories; ++t)
    for (std::size_t f = 0; f < series.n_frames; ++f) {
      const auto u = series.frame(t, f);
      for (std::size_t i = 0; i < g; ++i) mean[i] += u[i];
    }
  for (auto& v : mean) v /= static_cast<double>(total);
  for (std::size_t t = 0; t < series.n_trajectories; ++t)
    for (std::size_t f = 0; f < series.n_frames; ++f) {
      const auto u = series.frame(t, f);
      for (std::size_t i = 0; i < g; ++i)
        tke[i] += (u[i] - mean[i]) * (u[i] - mean[i]);
    }
  for (auto& v : tke) v = 0.5 * v / static_cast<double>(total);
  return tke;
}

std::pair<double, double> distribution_distance(std::span<const double> p,
                                                std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("distribution_distance: binning mismatch");
  double tv = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tv += std::abs(p[i] - q[i]);
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], 1e-10));
  }
  return {0.5 * tv, kl};
}

double spectrum_log_mae(const SpectrumResult& a, const SpectrumResult& b) {
  if (a.energy.size() != b.energy.size())
    throw std::invalid_argument("spectrum_log_mae: bin count mismatch");
  double s = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.energy.size(); ++i) {
    if (!(a.energy[i] > 0.0) || !(b.energy[i] > 0.0)) continue;
    s += std::abs(std::log(a.energy[i]) - std::log(b.energy[i]));
    ++used;
  }
  if (used == 0) return 0.0;
  return s / static_cast<double>(used);
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << header << '\n';
  if (columns.empty()) return;
  const std::size_t rows = columns[0].size();
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), columns[c][r]);
      out.write(buf, ptr - buf);
      (void)ec;
    }
    out << '\n';
  }
}

}  // namespace qiml
