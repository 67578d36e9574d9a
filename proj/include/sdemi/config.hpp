#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "sdemi/inputs.hpp"
#include "sdemi/mmse_info.hpp"

namespace sdemi {

// Config-file problems carry the offending key in the message and map to
// exit code 2 in the CLI.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string system_id;
  TimeGrid grid{1.0, 100};
  std::vector<double> r_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  int replicates = 2000;
  std::uint64_t master_seed = 20260808;
  bool common_noise = true;
  std::string out_dir = "out";
  ResidualTolerance tolerances;
  int probe_budget = 1000;
  CatalogParams params;
  std::optional<FiniteConstant> alphabet_override;
  nlohmann::json echo;  // parsed file, reproduced in the manifest

  // Catalog entry with overrides applied.
  SystemCatalogEntry resolve() const;

  EnsembleSpec ensemble_spec() const {
    EnsembleSpec spec;
    spec.system_id = system_id;
    spec.n_replicates = replicates;
    spec.master_seed = master_seed;
    spec.grid = grid;
    spec.r_grid = r_grid;
    spec.common_noise = common_noise;
    return spec;
  }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace sdemi
