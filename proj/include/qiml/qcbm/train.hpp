#pragma once

#include <span>
#include <string>
#include <vector>

#include "qiml/numcore/random.hpp"
#include "qiml/qcbm/qprior.hpp"

namespace qiml {

// Exact MMD gradient via the parameter-shift rule: every angle is a
// half-angle rotation, so dp/dtheta_i = (p(+pi/2 shift) - p(-pi/2 shift))/2.
// The 2P shifted circuits run in parallel.
std::vector<double> parameter_shift_gradient(const Ansatz& ansatz,
                                             std::span<const double> angles,
                                             std::span<const double> target,
                                             const KernelSpec& kernel);

enum class QcbmMode { Exact, Shots };

struct QcbmConfig {
  std::uint64_t epochs = 500;
  double learning_rate = 0.05;
  KernelSpec kernel;
  QcbmMode mode = QcbmMode::Exact;
  std::uint64_t shots = 20000;
  std::string dataset_id;
};

struct QcbmTrainResult {
  QPrior prior;
  std::vector<double> loss_log;  // one MMD value per epoch (pre-update)
  bool collapse_warning = false;
  bool aborted_non_finite = false;
};

// Adam on the MMD objective from a U[-pi,pi] initialisation. In shots
// mode the Born probabilities are replaced by 20,000-shot empirical
// frequencies. Collapse guard: >95% mass on one basis state while the
// target has entropy above 1 bit raises a warning.
QcbmTrainResult train_qcbm(const Ansatz& ansatz, std::span<const double> target,
                           const GridMapping& mapping, const QcbmConfig& config,
                           RandomStream& rng);

}  // namespace qiml
