#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdemi/grid.hpp"
#include "sdemi/inputs.hpp"
#include "sdemi/system.hpp"

namespace sdemi {

// SNR-class decision procedure. The definitions quantify over all paths, so
// every verdict here is probabilistic: sampled probes can refute a class but
// never prove membership.

struct SnrClassReport {
  SnrClass verdict = SnrClass::General;
  bool probabilistic = true;
  std::vector<ProbeReport> evidence;
};

enum class PhiProbeMode { Value, Square };

// Checks that phi (mode Value) or phi^2 (mode Square) takes the same value on
// distinct output paths for random (k, f) draws; path pairs mix fresh
// redraws with single-coordinate bumps at indices <= k.
ProbeReport probe_phi_independence(const FunctionalSystem& system, const TimeGrid& grid,
                                   int n_probes, std::uint64_t seed, PhiProbeMode mode);

// Shared-noise coupling across r pairs: counts violations of the pathwise
// output ordering Y^{r1} <= Y^{r2} and of the ordering of r * phi^2.
struct MonotonicityReport {
  std::vector<std::pair<double, double>> r_pairs;
  int n_replicates = 0;
  long output_violations = 0;
  long phi2_violations = 0;
  long aborted = 0;
  bool phi2_pass() const { return phi2_violations == 0; }
};

MonotonicityReport coupled_monotonicity_test(const FunctionalSystem& system,
                                             const InputModel& input,
                                             const std::vector<std::pair<double, double>>& r_pairs,
                                             int n_replicates, const TimeGrid& grid,
                                             std::uint64_t seed);

inline std::vector<std::pair<double, double>> default_r_pairs() {
  return {{0.5, 1.0}, {1.0, 2.0}, {2.0, 4.0}};
}

// Strongest probe first: StrongSnr if phi ignores the output path, Snr if
// phi^2 does, QuasiSnr if r * phi^2 is monotone under coupling, else General.
SnrClassReport classify_system(const FunctionalSystem& system, const InputModel& input,
                               const TimeGrid& grid, std::uint64_t seed, int probe_budget = 1000);

// Z-transform of an output path: z_0 = 0, dz_k = dy_k / G(k, y). For a
// strong-SNR system z is distributed as an AWGN output with drift
// sqrt(r) eta(t, x) and the filtrations of z and y coincide.
Path z_transform(const FunctionalSystem& system, const Path& y);

// Inverse recursion y_{k+1} = y_k + G(k, y) dz_k.
Path z_inverse(const FunctionalSystem& system, const Path& z);

}  // namespace sdemi
