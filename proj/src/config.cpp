#include "sdemi/config.hpp"

#include <fstream>
#include <sstream>

namespace sdemi {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config error: invalid value for key '" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config error: top level must be an object");

  ExperimentConfig cfg;
  cfg.echo = j;

  if (!j.contains("system") || !j.at("system").is_string())
    throw ConfigError("config error: key 'system' (string) is required");
  cfg.system_id = j.at("system").get<std::string>();

  double horizon = 1.0;
  int n_steps = 100;
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    horizon = get_or<double>(g, "T", horizon);
    n_steps = get_or<int>(g, "N", n_steps);
  }
  try {
    cfg.grid = TimeGrid(horizon, n_steps);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: key 'grid': ") + e.what());
  }

  cfg.r_grid = get_or<std::vector<double>>(j, "r_grid", cfg.r_grid);
  if (cfg.r_grid.empty()) throw ConfigError("config error: key 'r_grid' must be non-empty");
  for (std::size_t i = 0; i < cfg.r_grid.size(); ++i) {
    if (!(cfg.r_grid[i] >= 0.0))
      throw ConfigError("config error: key 'r_grid' values must be >= 0");
    if (i > 0 && !(cfg.r_grid[i] > cfg.r_grid[i - 1]))
      throw ConfigError("config error: key 'r_grid' must be strictly ascending");
  }

  cfg.replicates = get_or<int>(j, "replicates", cfg.replicates);
  if (cfg.replicates < 2) throw ConfigError("config error: key 'replicates' must be >= 2");
  cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", cfg.master_seed);
  cfg.common_noise = get_or<bool>(j, "common_noise", cfg.common_noise);
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);

  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tolerances.absolute = get_or<double>(t, "absolute", cfg.tolerances.absolute);
    cfg.tolerances.se_multiplier = get_or<double>(t, "se_multiplier", cfg.tolerances.se_multiplier);
    if (!(cfg.tolerances.absolute > 0.0))
      throw ConfigError("config error: key 'tolerances.absolute' must be positive");
    if (!(cfg.tolerances.se_multiplier > 0.0))
      throw ConfigError("config error: key 'tolerances.se_multiplier' must be positive");
  }

  if (j.contains("probes")) {
    cfg.probe_budget = get_or<int>(j.at("probes"), "budget", cfg.probe_budget);
    if (cfg.probe_budget < 1) throw ConfigError("config error: key 'probes.budget' must be >= 1");
  }

  if (j.contains("overrides")) {
    const auto& o = j.at("overrides");
    cfg.params.sigma2 = get_or<double>(o, "sigma2", cfg.params.sigma2);
    cfg.params.beta = get_or<double>(o, "beta", cfg.params.beta);
    cfg.params.gamma = get_or<double>(o, "gamma", cfg.params.gamma);
    cfg.params.lambda = get_or<double>(o, "lambda", cfg.params.lambda);
    if (!(cfg.params.sigma2 > 0.0))
      throw ConfigError("config error: key 'overrides.sigma2' must be positive");
    if (!(cfg.params.lambda >= 0.0))
      throw ConfigError("config error: key 'overrides.lambda' must be >= 0");
    if (!(std::abs(cfg.params.gamma) < 1.0))
      throw ConfigError("config error: key 'overrides.gamma' must satisfy |gamma| < 1");
    if (o.contains("alphabet")) {
      FiniteConstant alphabet;
      try {
        for (const auto& item : o.at("alphabet")) {
          alphabet.values.push_back(item.at("value").get<double>());
          alphabet.probs.push_back(item.at("prob").get<double>());
        }
        validate_model(InputModel{alphabet});
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config error: key 'overrides.alphabet': ") + e.what());
      }
      cfg.alphabet_override = alphabet;
    }
  }

  // Resolve now so an unknown system id fails at parse time.
  try {
    cfg.resolve();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config error: key 'system': ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

SystemCatalogEntry ExperimentConfig::resolve() const {
  auto entries = catalog(params);
  SystemCatalogEntry entry = find_entry(entries, system_id);
  if (alphabet_override) {
    if (!std::holds_alternative<FiniteConstant>(entry.input))
      throw ConfigError("config error: key 'overrides.alphabet' requires a finite-alphabet system");
    entry.input = *alphabet_override;
  }
  return entry;
}

}  // namespace sdemi
