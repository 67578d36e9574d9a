#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdemi/grid.hpp"
#include "sdemi/system.hpp"

namespace sdemi {

// Input process models. All samplers are pure functions of
// (seed, replicate, slot) and consume the input stream, disjoint from the
// Brownian noise stream.

struct GaussConstant {
  double variance = 1.0;  // X ~ N(0, variance), constant over the grid
};

struct FiniteConstant {
  std::vector<double> values;
  std::vector<double> probs;
};

// Symmetric two-state continuous-time chain discretized exactly: the per-step
// switch probability is (1 - exp(-2*rate*dt)) / 2.
struct TelegraphMarkov {
  std::array<double, 2> states{+1.0, -1.0};
  double rate = 1.0;
  std::array<double, 2> initial{0.5, 0.5};
};

using InputModel = std::variant<GaussConstant, FiniteConstant, TelegraphMarkov>;

void validate_model(const InputModel& model);  // throws InvalidModel

Path sample_input(const InputModel& model, const TimeGrid& grid, std::uint64_t seed,
                  std::uint64_t replicate, std::uint64_t slot = 0);

double telegraph_switch_probability(double rate, double dt);

// Enumerable trajectory representation for exact conditioning.
struct FinitePathSupport {
  std::vector<Path> paths;  // constant paths, one per alphabet element
  std::vector<double> probs;
};

struct MarkovChainSupport {
  std::array<double, 2> states;
  std::array<double, 2> initial;
  double p_switch = 0.0;  // per-step, rows of the transition matrix sum to 1

  std::array<std::array<double, 2>, 2> transition() const {
    return {{{1.0 - p_switch, p_switch}, {p_switch, 1.0 - p_switch}}};
  }
};

struct UnsupportedSupport {};

using TrajectorySupport = std::variant<FinitePathSupport, MarkovChainSupport, UnsupportedSupport>;

TrajectorySupport enumerate_support(const InputModel& model, const TimeGrid& grid);

enum class SnrClass { General, QuasiSnr, Snr, StrongSnr };

const char* to_string(SnrClass c);
std::optional<SnrClass> snr_class_from_string(const std::string& s);

// Parameters of the named catalog systems, overridable from configs.
struct CatalogParams {
  double sigma2 = 1.0;  // awgn-gauss input variance
  double beta = 0.5;    // awgn-feedback coupling
  double gamma = 0.5;   // modulated-bpsk modulation depth; G in [1-gamma, 1+gamma]
  double lambda = 1.0;  // telegraph-awgn switch rate
};

struct SystemCatalogEntry {
  std::string id;
  FunctionalSystem system;
  InputModel input;
  SnrClass expected_class = SnrClass::General;
  bool has_oracle = false;
};

// The fixed catalog of named systems used throughout tests and the CLI.
std::vector<SystemCatalogEntry> catalog(const CatalogParams& params = {});

SystemCatalogEntry find_entry(const std::vector<SystemCatalogEntry>& entries,
                              const std::string& id);

}  // namespace sdemi
