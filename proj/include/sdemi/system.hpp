#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdemi/grid.hpp"

namespace sdemi {

// Non-anticipative coefficient pair (F, G). At step k both functionals may
// read path values at indices 0..k only; the simulator and all filters rely
// on that convention. nondegeneracy_k is the bound K with G^2 >= K > 0.
struct FunctionalSystem {
  std::function<double(int k, const Path& x, const Path& y)> drift;  // F(k, x, y)
  std::function<double(int k, const Path& y)> diffusion;             // G(k, y)
  double nondegeneracy_k = 1.0;

  // Structural facts, set only when true by construction of the functionals.
  // awgn_form: F(k,f,g) == f(t_k) and G == 1 (enables conjugate Gaussian
  // conditioning through the sufficient statistic y(t_k)).
  // pointwise_input: F reads f only through f(t_k) (enables Markov-chain
  // filtering, where candidate states substitute for full input paths).
  bool awgn_form = false;
  bool pointwise_input = false;
};

// Evaluates G(k, y) and enforces the non-degeneracy bound.
double eval_diffusion_checked(const FunctionalSystem& system, int k, const Path& y);

// Brownian increments for one replicate: N values, each N(0, dt), fully
// determined by (master_seed, replicate, slot).
struct NoiseBundle {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate = 0;
  std::vector<double> increments;

  static NoiseBundle draw(const TimeGrid& grid, std::uint64_t master_seed,
                          std::uint64_t replicate, std::uint64_t slot = 0);
};

// Euler-Maruyama: y_{k+1} = y_k + sqrt(r) F(k,x,y) dt + G(k,y) dW_k, y_0 = 0.
// Throws NonFiniteState on blow-up and NonDegeneracyViolation if G^2 < K.
Path simulate_output(const FunctionalSystem& system, const Path& x, double r,
                     const NoiseBundle& noise, const TimeGrid& grid);

// One output path per r, all driven by the same increments (common random
// numbers). r_list must be ascending.
std::vector<Path> simulate_coupled(const FunctionalSystem& system, const Path& x,
                                   const std::vector<double>& r_list,
                                   const NoiseBundle& noise, const TimeGrid& grid);

struct ProbeWitness {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string what;
};

struct ProbeReport {
  std::string name;
  long n_probes = 0;
  long violations = 0;
  std::optional<ProbeWitness> first_witness;
  bool pass() const { return violations == 0; }
};

// Randomized check that F(k,.,.) and G(k,.) ignore path values beyond index
// k: pairs of paths agree on 0..k and differ afterwards, outputs must match
// bitwise.
ProbeReport probe_non_anticipativity(const FunctionalSystem& system, const TimeGrid& grid,
                                     int n_probes, std::uint64_t seed);

}  // namespace sdemi
