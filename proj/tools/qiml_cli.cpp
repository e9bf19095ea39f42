// qiml: config-driven pipeline driver.
// Subcommands: gen-data, train-qcbm, train-surrogate, rollout-eval,
// report-storage, run-all. See README for the config schema.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qiml/dynamics/ks.hpp"
#include "qiml/dynamics/qimd.hpp"
#include "qiml/koopman/train.hpp"
#include "qiml/metrics/metrics.hpp"
#include "qiml/numcore/random.hpp"
#include "qiml/qcbm/train.hpp"
#include "qiml/util/parallel.hpp"
#include "qiml/util/toml.hpp"

namespace fs = std::filesystem;
using namespace qiml;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  bool dry_run = false;
  std::string prior_path;
  bool baseline = false;
  std::string output_override;
};

TomlValue tv_int(std::int64_t v) {
  TomlValue t;
  t.kind = TomlValue::Kind::Int;
  t.i = v;
  return t;
}
TomlValue tv_float(double v) {
  TomlValue t;
  t.kind = TomlValue::Kind::Float;
  t.f = v;
  return t;
}
TomlValue tv_bool(bool v) {
  TomlValue t;
  t.kind = TomlValue::Kind::Bool;
  t.b = v;
  return t;
}
TomlValue tv_string(std::string v) {
  TomlValue t;
  t.kind = TomlValue::Kind::String;
  t.s = std::move(v);
  return t;
}
TomlValue tv_float_array(const std::vector<double>& v) {
  TomlValue t;
  t.kind = TomlValue::Kind::Array;
  for (double x : v) t.array.push_back(tv_float(x));
  return t;
}

// Fully resolved run configuration: every default materialised, so the
// archived copy reproduces the run on its own.
struct RunConfig {
  std::string output_dir = "out";

  // dynamics
  std::string ingest;  // nonempty: read this QIMD instead of integrating
  KSConfig ks;
  std::size_t n_trajectories = 10;
  std::size_t n_frames = 200;
  SplitSpec split;
  std::uint64_t dynamics_seed = 1;

  // qcbm
  int n_qubits = 10;
  int layers = 4;
  int rotations_per_layer = 3;
  std::size_t block = 16;
  std::uint64_t qcbm_epochs = 500;
  double qcbm_lr = 0.05;
  std::string qcbm_mode = "exact";
  std::uint64_t shots = 20000;
  std::vector<double> bandwidths = {0.1, 0.25, 1.0};
  std::uint64_t qcbm_seed = 2;

  // surrogate
  SurrogateConfig surrogate;
  std::uint64_t surrogate_seed = 3;

  // rollout / metrics
  std::size_t horizon = 500;
  std::string surrogate_path;           // with-prior checkpoint for rollout-eval
  std::string baseline_surrogate_path;  // optional classical baseline
  std::size_t pdf_bins = 101;
  double pdf_sigmas = 4.0;
  std::size_t density_bins = 64;

  // report-storage
  std::size_t snapshot_count = 0;  // >0: per-snapshot-checkpoint accounting
  std::string dataset_path;        // measured raw file
  std::vector<std::string> prior_paths;

  KernelSpec kernel() const {
    KernelSpec k;
    k.bandwidths = bandwidths;
    return k;
  }
  GridMapping mapping(std::size_t rows, std::size_t cols) const {
    GridMapping m;
    m.rows = rows;
    m.cols = cols;
    m.block = block;
    m.n_qubits = n_qubits;
    return m;
  }
};

RunConfig load_config(const CommonArgs& args) {
  const TomlTable t = parse_toml_file(args.config_path);
  RunConfig c;
  c.output_dir = t.get_string("output.dir", c.output_dir);
  if (!args.output_override.empty()) c.output_dir = args.output_override;

  c.ingest = t.get_string("dynamics.ingest", "");
  c.ks.length = t.get_float("dynamics.length", c.ks.length);
  c.ks.n = static_cast<std::size_t>(t.get_int("dynamics.n", static_cast<std::int64_t>(c.ks.n)));
  c.ks.nu = t.get_float("dynamics.nu", c.ks.nu);
  c.ks.mu = t.get_float("dynamics.mu", c.ks.mu);
  c.ks.dt = t.get_float("dynamics.dt", c.ks.dt);
  c.ks.frames_per_save = static_cast<int>(t.get_int("dynamics.frames_per_save", c.ks.frames_per_save));
  c.ks.transient_steps = static_cast<int>(t.get_int("dynamics.transient_steps", c.ks.transient_steps));
  c.ks.ic_amplitude = t.get_float("dynamics.ic_amplitude", c.ks.ic_amplitude);
  c.ks.ic_max_mode = static_cast<int>(t.get_int("dynamics.ic_max_mode", c.ks.ic_max_mode));
  c.n_trajectories = static_cast<std::size_t>(t.get_int("dynamics.n_trajectories", static_cast<std::int64_t>(c.n_trajectories)));
  c.n_frames = static_cast<std::size_t>(t.get_int("dynamics.n_frames", static_cast<std::int64_t>(c.n_frames)));
  c.split.train = t.get_float("dynamics.train_frac", c.split.train);
  c.split.val = t.get_float("dynamics.val_frac", c.split.val);
  c.split.test = t.get_float("dynamics.test_frac", c.split.test);
  c.dynamics_seed = static_cast<std::uint64_t>(t.get_int("dynamics.seed", static_cast<std::int64_t>(c.dynamics_seed)));

  c.n_qubits = static_cast<int>(t.get_int("qcbm.n_qubits", c.n_qubits));
  c.layers = static_cast<int>(t.get_int("qcbm.layers", c.layers));
  c.rotations_per_layer = static_cast<int>(t.get_int("qcbm.rotations_per_layer", c.rotations_per_layer));
  c.block = static_cast<std::size_t>(t.get_int("qcbm.block", static_cast<std::int64_t>(c.block)));
  c.qcbm_epochs = static_cast<std::uint64_t>(t.get_int("qcbm.epochs", static_cast<std::int64_t>(c.qcbm_epochs)));
  c.qcbm_lr = t.get_float("qcbm.learning_rate", c.qcbm_lr);
  c.qcbm_mode = t.get_string("qcbm.mode", c.qcbm_mode);
  c.shots = static_cast<std::uint64_t>(t.get_int("qcbm.shots", static_cast<std::int64_t>(c.shots)));
  c.bandwidths = t.get_float_array("qcbm.bandwidths", c.bandwidths);
  c.qcbm_seed = static_cast<std::uint64_t>(t.get_int("qcbm.seed", static_cast<std::int64_t>(c.qcbm_seed)));

  c.surrogate.hidden1 = static_cast<std::size_t>(t.get_int("surrogate.hidden1", static_cast<std::int64_t>(c.surrogate.hidden1)));
  c.surrogate.hidden2 = static_cast<std::size_t>(t.get_int("surrogate.hidden2", static_cast<std::int64_t>(c.surrogate.hidden2)));
  c.surrogate.latent = static_cast<std::size_t>(t.get_int("surrogate.latent", static_cast<std::int64_t>(c.surrogate.latent)));
  c.surrogate.lambda_kl = t.get_float("surrogate.lambda_kl", c.surrogate.lambda_kl);
  c.surrogate.lambda_mmd = t.get_float("surrogate.lambda_mmd", c.surrogate.lambda_mmd);
  c.surrogate.unitary_weight = t.get_float("surrogate.unitary_weight", c.surrogate.unitary_weight);
  c.surrogate.epochs = static_cast<std::uint64_t>(t.get_int("surrogate.epochs", static_cast<std::int64_t>(c.surrogate.epochs)));
  c.surrogate.batch_size = static_cast<std::size_t>(t.get_int("surrogate.batch_size", static_cast<std::int64_t>(c.surrogate.batch_size)));
  c.surrogate.learning_rate = t.get_float("surrogate.learning_rate", c.surrogate.learning_rate);
  c.surrogate.divergence_limit = t.get_float("surrogate.divergence_limit", c.surrogate.divergence_limit);
  c.surrogate_seed = static_cast<std::uint64_t>(t.get_int("surrogate.seed", static_cast<std::int64_t>(c.surrogate_seed)));

  c.horizon = static_cast<std::size_t>(t.get_int("rollout.horizon", static_cast<std::int64_t>(c.horizon)));
  c.surrogate_path = t.get_string("rollout.surrogate", "");
  c.baseline_surrogate_path = t.get_string("rollout.baseline", "");
  c.pdf_bins = static_cast<std::size_t>(t.get_int("metrics.pdf_bins", static_cast<std::int64_t>(c.pdf_bins)));
  c.pdf_sigmas = t.get_float("metrics.pdf_sigmas", c.pdf_sigmas);
  c.density_bins = static_cast<std::size_t>(t.get_int("metrics.density_bins", static_cast<std::int64_t>(c.density_bins)));

  c.snapshot_count = static_cast<std::size_t>(t.get_int("storage.snapshot_count", 0));
  c.dataset_path = t.get_string("storage.dataset", "");
  if (t.contains("storage.priors")) {
    // string arrays are rare enough that they ride in as one comma-free list
    const auto& entries = t.entries().at("storage.priors");
    for (const auto& item : entries.array) c.prior_paths.push_back(item.s);
  }

  if (args.seed_override) {
    // one global seed fans out to per-stage streams
    c.dynamics_seed = *args.seed_override;
    c.qcbm_seed = *args.seed_override + 1;
    c.surrogate_seed = *args.seed_override + 2;
  }
  return c;
}

TomlTable resolved_table(const RunConfig& c) {
  TomlTable t;
  t.set("output.dir", tv_string(c.output_dir));

  t.set("dynamics.ingest", tv_string(c.ingest));
  t.set("dynamics.length", tv_float(c.ks.length));
  t.set("dynamics.n", tv_int(static_cast<std::int64_t>(c.ks.n)));
  t.set("dynamics.nu", tv_float(c.ks.nu));
  t.set("dynamics.mu", tv_float(c.ks.mu));
  t.set("dynamics.dt", tv_float(c.ks.dt));
  t.set("dynamics.frames_per_save", tv_int(c.ks.frames_per_save));
  t.set("dynamics.transient_steps", tv_int(c.ks.transient_steps));
  t.set("dynamics.ic_amplitude", tv_float(c.ks.ic_amplitude));
  t.set("dynamics.ic_max_mode", tv_int(c.ks.ic_max_mode));
  t.set("dynamics.n_trajectories", tv_int(static_cast<std::int64_t>(c.n_trajectories)));
  t.set("dynamics.n_frames", tv_int(static_cast<std::int64_t>(c.n_frames)));
  t.set("dynamics.train_frac", tv_float(c.split.train));
  t.set("dynamics.val_frac", tv_float(c.split.val));
  t.set("dynamics.test_frac", tv_float(c.split.test));
  t.set("dynamics.seed", tv_int(static_cast<std::int64_t>(c.dynamics_seed)));

  t.set("qcbm.n_qubits", tv_int(c.n_qubits));
  t.set("qcbm.layers", tv_int(c.layers));
  t.set("qcbm.rotations_per_layer", tv_int(c.rotations_per_layer));
  t.set("qcbm.block", tv_int(static_cast<std::int64_t>(c.block)));
  t.set("qcbm.epochs", tv_int(static_cast<std::int64_t>(c.qcbm_epochs)));
  t.set("qcbm.learning_rate", tv_float(c.qcbm_lr));
  t.set("qcbm.mode", tv_string(c.qcbm_mode));
  t.set("qcbm.shots", tv_int(static_cast<std::int64_t>(c.shots)));
  t.set("qcbm.bandwidths", tv_float_array(c.bandwidths));
  t.set("qcbm.seed", tv_int(static_cast<std::int64_t>(c.qcbm_seed)));

  t.set("surrogate.hidden1", tv_int(static_cast<std::int64_t>(c.surrogate.hidden1)));
  t.set("surrogate.hidden2", tv_int(static_cast<std::int64_t>(c.surrogate.hidden2)));
  t.set("surrogate.latent", tv_int(static_cast<std::int64_t>(c.surrogate.latent)));
  t.set("surrogate.lambda_kl", tv_float(c.surrogate.lambda_kl));
  t.set("surrogate.lambda_mmd", tv_float(c.surrogate.lambda_mmd));
  t.set("surrogate.unitary_weight", tv_float(c.surrogate.unitary_weight));
  t.set("surrogate.epochs", tv_int(static_cast<std::int64_t>(c.surrogate.epochs)));
  t.set("surrogate.batch_size", tv_int(static_cast<std::int64_t>(c.surrogate.batch_size)));
  t.set("surrogate.learning_rate", tv_float(c.surrogate.learning_rate));
  t.set("surrogate.divergence_limit", tv_float(c.surrogate.divergence_limit));
  t.set("surrogate.seed", tv_int(static_cast<std::int64_t>(c.surrogate_seed)));

  t.set("rollout.horizon", tv_int(static_cast<std::int64_t>(c.horizon)));
  t.set("rollout.surrogate", tv_string(c.surrogate_path));
  t.set("rollout.baseline", tv_string(c.baseline_surrogate_path));
  t.set("metrics.pdf_bins", tv_int(static_cast<std::int64_t>(c.pdf_bins)));
  t.set("metrics.pdf_sigmas", tv_float(c.pdf_sigmas));
  t.set("metrics.density_bins", tv_int(static_cast<std::int64_t>(c.density_bins)));

  t.set("storage.snapshot_count", tv_int(static_cast<std::int64_t>(c.snapshot_count)));
  t.set("storage.dataset", tv_string(c.dataset_path));
  TomlValue priors;
  priors.kind = TomlValue::Kind::Array;
  for (const auto& p : c.prior_paths) priors.array.push_back(tv_string(p));
  t.set("storage.priors", priors);
  return t;
}

void archive_config(const RunConfig& c, const std::string& command) {
  fs::create_directories(c.output_dir);
  const auto path = fs::path(c.output_dir) / (command + ".resolved.toml");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << resolved_table(c).serialise();
}

std::string dataset_id(const RunConfig& c) {
  std::ostringstream id;
  id << "ks_n" << c.ks.n << "_traj" << c.n_trajectories << "_frames" << c.n_frames
     << "_seed" << c.dynamics_seed;
  return id.str();
}

fs::path split_path(const RunConfig& c, const char* name) {
  return fs::path(c.output_dir) / (std::string(name) + ".qimd");
}

// ---------------------------------------------------------------- gen-data

int cmd_gen_data(const CommonArgs& args, const RunConfig& c) {
  c.split.validate();
  if (args.dry_run) {
    const auto bytes =
        qimd_size_estimate(c.n_trajectories, c.n_frames, 1, c.ks.n);
    std::cout << "dry-run: dataset " << dataset_id(c) << "\n"
              << "  shape: " << c.n_trajectories << " traj x " << c.n_frames
              << " frames x " << c.ks.n << " points\n"
              << "  estimated bytes (before split): " << bytes << "\n";
    return 0;
  }

  FieldSeries series;
  if (!c.ingest.empty()) {
    std::cout << "ingesting " << c.ingest << "\n";
    series = ingest_field_series(c.ingest);
  } else {
    c.ks.validate();
    RandomStream rng(c.dynamics_seed);
    series = generate_ks_dataset(c.ks, c.n_trajectories, c.n_frames, rng);
  }
  const auto splits = split_dataset(series, c.split);

  archive_config(c, "gen-data");
  write_field_series(splits.train, split_path(c, "train").string());
  write_field_series(splits.val, split_path(c, "val").string());
  write_field_series(splits.test, split_path(c, "test").string());

  std::ofstream manifest(fs::path(c.output_dir) / "dataset_manifest.txt",
                         std::ios::binary);
  manifest << "dataset_id " << dataset_id(c) << "\n"
           << "train " << splits.train.n_trajectories << " trajectories\n"
           << "val " << splits.val.n_trajectories << " trajectories\n"
           << "test " << splits.test.n_trajectories << " trajectories\n"
           << "frames_per_trajectory " << c.n_frames << "\n"
           << "grid " << series.rows << "x" << series.cols << "\n"
           << "frame_dt " << series.dt << "\n";

  std::cout << "wrote " << split_path(c, "train").string() << " ("
            << splits.train.n_trajectories << " traj), "
            << split_path(c, "val").string() << " (" << splits.val.n_trajectories
            << "), " << split_path(c, "test").string() << " ("
            << splits.test.n_trajectories << ")\n";
  return 0;
}

// --------------------------------------------------------------- train-qcbm

int cmd_train_qcbm(const CommonArgs& args, const RunConfig& c) {
  const auto train = ingest_field_series(split_path(c, "train").string());
  const auto mapping = c.mapping(train.rows, train.cols);
  mapping.validate();
  const auto target = empirical_target(train, mapping);

  const Ansatz ansatz = build_ansatz(c.n_qubits, c.layers, c.rotations_per_layer);
  QcbmConfig qc;
  qc.epochs = c.qcbm_epochs;
  qc.learning_rate = c.qcbm_lr;
  qc.kernel = c.kernel();
  if (c.qcbm_mode == "exact")
    qc.mode = QcbmMode::Exact;
  else if (c.qcbm_mode == "shots")
    qc.mode = QcbmMode::Shots;
  else
    throw std::runtime_error("qcbm.mode must be 'exact' or 'shots', got '" +
                             c.qcbm_mode + "'");
  qc.shots = c.shots;
  qc.dataset_id = dataset_id(c);

  if (args.dry_run) {
    std::cout << "dry-run: " << ansatz.parameter_count() << " parameters, "
              << c.qcbm_epochs << " epochs, mode " << c.qcbm_mode << "\n";
    return 0;
  }

  RandomStream rng(c.qcbm_seed);
  auto result = train_qcbm(ansatz, target, mapping, qc, rng);
  result.prior.seed = c.qcbm_seed;
  if (const char* ts = std::getenv("QIML_TIMESTAMP"))
    result.prior.timestamp = std::strtoull(ts, nullptr, 10);

  archive_config(c, "train-qcbm");
  const auto prior_path = fs::path(c.output_dir) / "qprior.json";
  save_qprior(result.prior, prior_path.string());

  std::vector<double> epochs(result.loss_log.size());
  for (std::size_t i = 0; i < epochs.size(); ++i) epochs[i] = static_cast<double>(i);
  write_csv((fs::path(c.output_dir) / "qcbm_loss.csv").string(), "epoch,mmd",
            {epochs, result.loss_log});

  std::cout << "wrote " << prior_path.string() << " (final MMD "
            << result.prior.final_loss << ", " << ansatz.parameter_count()
            << " parameters)\n";
  if (result.collapse_warning)
    std::cout << "warning: distribution collapse detected during training\n";
  if (result.aborted_non_finite) {
    std::cerr << "error: training aborted on non-finite loss\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------- train-surrogate

int cmd_train_surrogate(const CommonArgs& args, RunConfig c) {
  const auto train = ingest_field_series(split_path(c, "train").string());
  const auto val = ingest_field_series(split_path(c, "val").string());

  std::optional<QPrior> prior;
  if (args.baseline) {
    c.surrogate.lambda_kl = 0.0;
    c.surrogate.lambda_mmd = 0.0;
  } else {
    std::string prior_path = args.prior_path;
    if (prior_path.empty())
      prior_path = (fs::path(c.output_dir) / "qprior.json").string();
    if (!fs::exists(prior_path))
      throw std::runtime_error(
          "no prior checkpoint at " + prior_path +
          "; pass --prior PATH, or --baseline for the classical run");
    prior = load_qprior(prior_path);
  }

  if (args.dry_run) {
    RandomStream probe(c.surrogate_seed);
    const auto m = SurrogateModel::init(train.grid_size(), c.surrogate.hidden1,
                                        c.surrogate.hidden2, c.surrogate.latent,
                                        probe);
    std::cout << "dry-run: " << m.param_count() << " parameters, "
              << c.surrogate.epochs << " epochs, "
              << (args.baseline ? "baseline" : "with-prior") << "\n";
    return 0;
  }

  RandomStream rng(c.surrogate_seed);
  const auto result = train_surrogate(train, val, prior ? &*prior : nullptr,
                                      c.surrogate, rng);

  archive_config(c, args.baseline ? "train-surrogate-baseline" : "train-surrogate");
  const char* stem = args.baseline ? "surrogate_baseline" : "surrogate";
  const auto ckpt = fs::path(c.output_dir) / (std::string(stem) + ".qims");
  save_surrogate(result.model, ckpt.string());

  std::vector<std::vector<double>> cols(7);
  for (const auto& row : result.log) {
    cols[0].push_back(static_cast<double>(row.epoch));
    cols[1].push_back(row.recon);
    cols[2].push_back(row.unitary);
    cols[3].push_back(row.kl);
    cols[4].push_back(row.mmd);
    cols[5].push_back(row.total);
    cols[6].push_back(row.val_recon);
  }
  write_csv((fs::path(c.output_dir) / (std::string(stem) + "_log.csv")).string(),
            "epoch,recon,unitary,kl,mmd,total,val_recon", cols);

  std::cout << "wrote " << ckpt.string();
  if (!result.log.empty())
    std::cout << " (best val MSE "
              << one_step_mse(result.model, val) << ")";
  std::cout << "\n";
  if (result.diverged) {
    std::cerr << "error: surrogate training diverged\n";
    return 1;
  }
  return 0;
}

// ------------------------------------------------------------- rollout-eval

struct EvalArtifacts {
  std::string name;
  FieldSeries frames;
  bool truncated = false;
  double latent_norm_drift = 0.0;
};

void emit_metrics(const RunConfig& c, const EvalArtifacts& model,
                  const FieldSeries& truth, std::ostream& manifest) {
  const fs::path dir(c.output_dir);
  const std::string& n = model.name;

  const auto spectrum = energy_spectrum_1d(model.frames);
  write_csv((dir / ("spectrum_" + n + ".csv")).string(),
            "k,energy  # E(k)=0.5|u_k|^2/N^2 folded +-k; ensemble mean",
            {spectrum.wavenumber, spectrum.energy});

  const auto pdf = value_pdf_auto(model.frames, truth, c.pdf_bins, c.pdf_sigmas);
  std::vector<double> centers(pdf.density.size());
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers[i] = 0.5 * (pdf.edges[i] + pdf.edges[i + 1]);
  write_csv((dir / ("pdf_" + n + ".csv")).string(),
            "u,density  # value histogram over all points/frames",
            {centers, pdf.density});

  const auto ac = temporal_autocorrelation(model.frames);
  write_csv((dir / ("autocorr_" + n + ".csv")).string(),
            "t_star,c  # per-point mean-subtracted, lag-0 normalised, "
            "spatially averaged",
            {ac.t_star, ac.c});

  const auto dens = invariant_density(model.frames, c.ks.length, c.density_bins);
  std::vector<double> dx, dy, dv;
  const double wx = (dens.x_hi - dens.x_lo) / static_cast<double>(dens.n_bins);
  const double wy = (dens.y_hi - dens.y_lo) / static_cast<double>(dens.n_bins);
  for (std::size_t r = 0; r < dens.n_bins; ++r)
    for (std::size_t col = 0; col < dens.n_bins; ++col) {
      dx.push_back(dens.x_lo + (static_cast<double>(col) + 0.5) * wx);
      dy.push_back(dens.y_lo + (static_cast<double>(r) + 0.5) * wy);
      dv.push_back(dens.density[r * dens.n_bins + col]);
    }
  write_csv((dir / ("invariant_density_" + n + ".csv")).string(),
            "u_x,u_xx,density  # (u_x,u_xx) occupation histogram",
            {dx, dy, dv});

  manifest << n << " frames " << model.frames.n_frames
           << (model.truncated ? " (truncated)" : "") << " latent_norm_drift "
           << model.latent_norm_drift << "\n";
}

int cmd_rollout_eval(const CommonArgs& args, const RunConfig& c) {
  const auto test = ingest_field_series(split_path(c, "test").string());
  if (test.n_frames == 0 || test.n_trajectories == 0)
    throw std::runtime_error("empty test split");

  std::string with_path = c.surrogate_path.empty()
                              ? (fs::path(c.output_dir) / "surrogate.qims").string()
                              : c.surrogate_path;
  std::string base_path =
      c.baseline_surrogate_path.empty()
          ? (fs::path(c.output_dir) / "surrogate_baseline.qims").string()
          : c.baseline_surrogate_path;

  if (args.dry_run) {
    std::cout << "dry-run: horizon " << c.horizon << ", surrogate " << with_path
              << ", baseline "
              << (fs::exists(base_path) ? base_path : std::string("(absent)"))
              << "\n";
    return 0;
  }

  archive_config(c, "rollout-eval");
  const fs::path dir(c.output_dir);
  std::ofstream manifest(dir / "metrics_manifest.txt", std::ios::binary);
  manifest << "E_r: per-frame relative L2 ||pred-ref||/||ref||\n"
           << "C(t*): per-point mean-subtracted autocorrelation, lag-0 "
              "normalised, averaged over points; t* = lag/t_end\n"
           << "E(k): 0.5|u_k|^2/N^2, conjugate modes folded, ensemble mean\n"
           << "horizon " << c.horizon << "\n";

  // ground-truth reference over the rollout window, continued with the solver
  const auto u0 = test.frame(0, 0);
  FieldSeries truth;
  truth.n_trajectories = 1;
  truth.rows = 1;
  truth.cols = test.cols;
  truth.dt = test.dt;
  if (test.n_frames >= c.horizon + 1) {
    for (std::size_t f = 1; f <= c.horizon; ++f) {
      const auto fr = test.frame(0, f);
      truth.values.insert(truth.values.end(), fr.begin(), fr.end());
    }
  } else {
    KSConfig kc = c.ks;
    kc.n = test.cols;
    KSSolver solver(kc);
    solver.set_initial(u0);
    for (std::size_t f = 0; f < c.horizon; ++f) {
      solver.advance(kc.frames_per_save);
      auto u = solver.physical_field();
      double mean = 0.0;
      for (double v : u) mean += v;
      mean /= static_cast<double>(u.size());
      for (double& v : u) v -= mean;
      truth.values.insert(truth.values.end(), u.begin(), u.end());
    }
  }
  truth.n_frames = c.horizon;

  bool any_truncated = false;
  std::vector<EvalArtifacts> models;
  {
    EvalArtifacts t;
    t.name = "truth";
    t.frames = truth;
    models.push_back(std::move(t));
  }
  const auto run_model = [&](const std::string& path, const std::string& name) {
    const auto model = load_surrogate(path);
    auto r = rollout(model, u0, c.horizon);
    if (r.truncated) {
      std::cerr << "warning: " << name << " rollout truncated at frame "
                << r.frames.n_frames << "\n";
      any_truncated = true;
    }
    EvalArtifacts a;
    a.name = name;
    a.frames = std::move(r.frames);
    a.frames.dt = test.dt;
    a.truncated = r.truncated;
    a.latent_norm_drift = r.latent_norm_drift;
    models.push_back(std::move(a));
  };
  run_model(with_path, "prior");
  if (fs::exists(base_path)) run_model(base_path, "baseline");

  for (const auto& m : models) {
    if (m.frames.n_frames == 0) {
      manifest << m.name << " produced no frames\n";
      continue;
    }
    emit_metrics(c, m, truth, manifest);
    if (m.name != "truth" && m.frames.n_frames == truth.n_frames) {
      const auto er = relative_error(m.frames, truth);
      std::vector<double> frame_idx(er.e_r.size());
      for (std::size_t i = 0; i < frame_idx.size(); ++i)
        frame_idx[i] = static_cast<double>(i + 1);
      write_csv((dir / ("relerr_" + m.name + ".csv")).string(),
                "frame,e_r  # per-frame relative L2 vs ground truth",
                {frame_idx, er.e_r});
    }
  }

  // headline numbers: PDF total variation and spectrum log-MAE vs truth
  const auto truth_pdf = value_pdf_auto(truth, truth, c.pdf_bins, c.pdf_sigmas);
  const auto truth_spec = energy_spectrum_1d(truth);
  const double bin_w = truth_pdf.edges[1] - truth_pdf.edges[0];
  for (const auto& m : models) {
    if (m.name == "truth" || m.frames.n_frames == 0) continue;
    const auto pdf = value_pdf_auto(m.frames, truth, c.pdf_bins, c.pdf_sigmas);
    std::vector<double> p(pdf.density.size()), q(pdf.density.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = truth_pdf.density[i] * bin_w;
      q[i] = pdf.density[i] * bin_w;
    }
    const auto [tv, kl] = distribution_distance(p, q);
    const auto spec = energy_spectrum_1d(m.frames);
    const double lmae = spectrum_log_mae(spec, truth_spec);
    manifest << m.name << " pdf_tv " << tv << " pdf_kl " << kl
             << " spectrum_log_mae " << lmae << "\n";
    std::cout << m.name << ": pdf TV " << tv << ", spectrum log-MAE " << lmae
              << "\n";
  }

  return any_truncated ? 3 : 0;
}

// ----------------------------------------------------------- report-storage

int cmd_report_storage(const CommonArgs& args, const RunConfig& c) {
  std::string dataset = c.dataset_path;
  if (dataset.empty()) dataset = split_path(c, "train").string();
  std::vector<std::string> priors = c.prior_paths;
  if (!args.prior_path.empty()) priors.push_back(args.prior_path);
  if (priors.empty()) {
    const auto def = fs::path(c.output_dir) / "qprior.json";
    if (fs::exists(def)) priors.push_back(def.string());
  }

  if (!fs::exists(dataset))
    throw std::runtime_error("dataset file missing: " + dataset);
  if (priors.empty())
    throw std::runtime_error("no prior checkpoints given; ratio undefined");
  for (const auto& p : priors)
    if (!fs::exists(p)) throw std::runtime_error("prior file missing: " + p);

  const std::uint64_t raw_bytes = fs::file_size(dataset);
  std::uint64_t ckpt_bytes = 0;
  for (const auto& p : priors) ckpt_bytes += fs::file_size(p);
  std::size_t count = priors.size();
  std::uint64_t total_prior = ckpt_bytes;
  if (c.snapshot_count > 0) {
    // per-snapshot accounting: one checkpoint per stored snapshot
    total_prior = (ckpt_bytes / count) * c.snapshot_count;
    count = c.snapshot_count;
  }
  const double ratio =
      static_cast<double>(raw_bytes) / static_cast<double>(total_prior);

  std::ostringstream report;
  report << "storage report\n"
         << "  raw dataset        " << dataset << "  " << raw_bytes << " bytes\n"
         << "  checkpoint bytes   " << (ckpt_bytes / priors.size())
         << " (mean over " << priors.size() << " measured)\n"
         << "  checkpoint count   " << count << "\n"
         << "  total prior bytes  " << total_prior << "\n"
         << "  compression ratio  " << ratio << "\n";
  std::cout << report.str();

  if (!args.dry_run) {
    fs::create_directories(c.output_dir);
    std::ofstream out(fs::path(c.output_dir) / "storage_report.txt",
                      std::ios::binary);
    out << report.str();
  }
  return 0;
}

// ----------------------------------------------------------------- run-all

int cmd_run_all(const CommonArgs& args, const RunConfig& c) {
  int rc = cmd_gen_data(args, c);
  if (rc != 0 || args.dry_run) return rc;
  rc = cmd_train_qcbm(args, c);
  if (rc != 0) return rc;
  CommonArgs base = args;
  base.baseline = true;
  rc = cmd_train_surrogate(base, c);
  if (rc != 0) return rc;
  CommonArgs with = args;
  with.baseline = false;
  rc = cmd_train_surrogate(with, c);
  if (rc != 0) return rc;
  rc = cmd_rollout_eval(args, c);
  if (rc != 0 && rc != 3) return rc;
  const int storage_rc = cmd_report_storage(args, c);
  return storage_rc != 0 ? storage_rc : rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-informed surrogate pipeline"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed_value = 0;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "run configuration (TOML)")
        ->required();
    cmd->add_option("--seed", seed_value, "override all stage seeds")
        ->each([&](const std::string&) { args.seed_override = seed_value; });
    cmd->add_flag("--dry-run", args.dry_run, "report work without writing");
    cmd->add_option("--prior", args.prior_path, "Q-prior checkpoint path");
    cmd->add_flag("--baseline", args.baseline,
                  "classical baseline (no prior, zero distribution weights)");
    cmd->add_option("--output", args.output_override, "output directory override");
  };

  auto* gen = app.add_subcommand("gen-data", "integrate/ingest and split a dataset");
  auto* qcbm = app.add_subcommand("train-qcbm", "train the Q-prior circuit");
  auto* surr = app.add_subcommand("train-surrogate", "train the surrogate");
  auto* eval = app.add_subcommand("rollout-eval", "roll out and evaluate");
  auto* storage = app.add_subcommand("report-storage", "storage-efficiency report");
  auto* all = app.add_subcommand("run-all", "full pipeline");
  for (auto* cmd : {gen, qcbm, surr, eval, storage, all}) add_common(cmd);

  CLI11_PARSE(app, argc, argv);
  configure_threads();

  try {
    const RunConfig config = load_config(args);
    if (gen->parsed()) return cmd_gen_data(args, config);
    if (qcbm->parsed()) return cmd_train_qcbm(args, config);
    if (surr->parsed()) return cmd_train_surrogate(args, config);
    if (eval->parsed()) return cmd_rollout_eval(args, config);
    if (storage->parsed()) return cmd_report_storage(args, config);
    if (all->parsed()) return cmd_run_all(args, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
