#include "qiml/qcbm/qprior.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace qiml {

using nlohmann::json;

static constexpr int kFormatVersion = 1;

void save_qprior(const QPrior& prior, const std::string& path) {
  if (static_cast<int>(prior.angles.size()) != prior.ansatz.parameter_count())
    throw std::invalid_argument("save_qprior: angle count mismatch");
  json j;
  j["format_version"] = kFormatVersion;
  j["n_qubits"] = prior.ansatz.n_qubits;
  j["n_rotation_layers"] = prior.ansatz.n_rotation_layers;
  j["rotations_per_layer"] = prior.ansatz.rotations_per_layer;
  j["entangler"] = "cz_ring";
  j["basis_order"] = "little-endian";
  j["grid"] = {{"rows", prior.mapping.rows},
               {"cols", prior.mapping.cols},
               {"block", prior.mapping.block}};
  j["kernel_bandwidths"] = prior.kernel.bandwidths;
  j["angles"] = prior.angles;
  j["final_loss"] = prior.final_loss;
  j["dataset_id"] = prior.dataset_id;
  j["seed"] = prior.seed;
  j["epochs"] = prior.epochs;
  j["timestamp"] = prior.timestamp;
  if (prior.cached_born) j["cached_born"] = *prior.cached_born;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_qprior: cannot open " + path);
  out << j.dump() << '\n';
}

QPrior load_qprior(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_qprior: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_qprior: corrupted checkpoint " + path +
                             ": " + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
    throw std::runtime_error("load_qprior: unsupported format version in " + path);

  QPrior p;
  p.ansatz = build_ansatz(j.at("n_qubits").get<int>(),
                          j.at("n_rotation_layers").get<int>(),
                          j.at("rotations_per_layer").get<int>());
  p.angles = j.at("angles").get<std::vector<double>>();
  if (static_cast<int>(p.angles.size()) != p.ansatz.parameter_count())
    throw std::runtime_error("load_qprior: angle count mismatch in " + path);
  p.mapping.rows = j.at("grid").at("rows").get<std::size_t>();
  p.mapping.cols = j.at("grid").at("cols").get<std::size_t>();
  p.mapping.block = j.at("grid").at("block").get<std::size_t>();
  p.mapping.n_qubits = p.ansatz.n_qubits;
  p.mapping.validate();
  p.kernel.bandwidths = j.at("kernel_bandwidths").get<std::vector<double>>();
  p.final_loss = j.at("final_loss").get<double>();
  p.dataset_id = j.at("dataset_id").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.epochs = j.at("epochs").get<std::uint64_t>();
  p.timestamp = j.at("timestamp").get<std::uint64_t>();
  if (j.contains("cached_born")) {
    p.cached_born = j["cached_born"].get<std::vector<double>>();
    const auto exact = p.born();
    if (p.cached_born->size() != exact.size())
      throw std::runtime_error("load_qprior: cached distribution size mismatch");
    for (std::size_t i = 0; i < exact.size(); ++i)
      if (std::abs((*p.cached_born)[i] - exact[i]) > 1e-12)
        throw std::runtime_error("load_qprior: cached distribution disagrees with circuit");
  }
  return p;
}

}  // namespace qiml
