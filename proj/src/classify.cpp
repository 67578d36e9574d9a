#include "sdemi/classify.hpp"

#include <cmath>

#include "sdemi/errors.hpp"
#include "sdemi/estimate.hpp"
#include "sdemi/rng.hpp"

namespace sdemi {

namespace {

Path brownian_like(const rng::StreamKey& key, const TimeGrid& grid, std::uint64_t lane) {
  Path p(grid, 0.0);
  const double root_dt = std::sqrt(grid.dt());
  for (int k = 1; k < grid.n_points(); ++k)
    p.values[k] =
        p.values[k - 1] + rng::normal(key, lane * 4096 + static_cast<std::uint64_t>(k)) * root_dt;
  return p;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

ProbeReport probe_phi_independence(const FunctionalSystem& system, const TimeGrid& grid,
                                   int n_probes, std::uint64_t seed, PhiProbeMode mode) {
  if (n_probes < 1) throw std::invalid_argument("probe_phi_independence: n_probes must be >= 1");
  ProbeReport report;
  report.name = mode == PhiProbeMode::Value ? "phi_independence" : "phi_square_independence";
  report.n_probes = n_probes;

  const rng::StreamKey key{seed, rng::kStreamProbe, 1, 0};
  const int n = grid.n_points();
  for (int p = 0; p < n_probes; ++p) {
    const std::uint64_t lane = 16 * static_cast<std::uint64_t>(p);
    const int k = static_cast<int>(rng::bits(key, lane) % static_cast<std::uint64_t>(n));
    const Path f = brownian_like(key, grid, lane + 1);
    const Path g1 = brownian_like(key, grid, lane + 2);
    Path g2(grid, 0.0);
    if (p % 2 == 0) {
      g2 = brownian_like(key, grid, lane + 3);
    } else {
      // Adversarial variant: same path with a single bump at an index <= k,
      // the only region phi may legally read.
      g2 = g1;
      const int j = static_cast<int>(rng::bits(key, lane + 4) % static_cast<std::uint64_t>(k + 1));
      g2.values[j] += rng::normal(key, lane + 5);
    }

    double v1 = eval_phi(system, k, f, g1);
    double v2 = eval_phi(system, k, f, g2);
    if (mode == PhiProbeMode::Square) {
      v1 *= v1;
      v2 *= v2;
    }
    if (!close(v1, v2)) {
      ++report.violations;
      if (!report.first_witness)
        report.first_witness = ProbeWitness{k, v1, v2, "phi depends on the output path"};
    }
  }
  return report;
}

MonotonicityReport coupled_monotonicity_test(const FunctionalSystem& system,
                                             const InputModel& input,
                                             const std::vector<std::pair<double, double>>& r_pairs,
                                             int n_replicates, const TimeGrid& grid,
                                             std::uint64_t seed) {
  for (const auto& [r1, r2] : r_pairs)
    if (!(r1 <= r2)) throw std::invalid_argument("coupled_monotonicity_test: pairs must ascend");

  MonotonicityReport report;
  report.r_pairs = r_pairs;
  report.n_replicates = n_replicates;

  for (int m = 0; m < n_replicates; ++m) {
    const Path x = sample_input(input, grid, seed, static_cast<std::uint64_t>(m));
    const NoiseBundle noise = NoiseBundle::draw(grid, seed, static_cast<std::uint64_t>(m));
    for (const auto& [r1, r2] : r_pairs) {
      try {
        const auto ys = simulate_coupled(system, x, {r1, r2}, noise, grid);
        for (int k = 0; k < grid.n_points(); ++k) {
          if (ys[0].values[k] > ys[1].values[k]) ++report.output_violations;
          const double p1 = eval_phi(system, k, x, ys[0]);
          const double p2 = eval_phi(system, k, x, ys[1]);
          const double lhs = r1 * p1 * p1;
          const double rhs = r2 * p2 * p2;
          if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) ++report.phi2_violations;
        }
      } catch (const NonFiniteState&) {
        ++report.aborted;
      }
    }
  }
  return report;
}

SnrClassReport classify_system(const FunctionalSystem& system, const InputModel& input,
                               const TimeGrid& grid, std::uint64_t seed, int probe_budget) {
  if (probe_budget < 1) throw std::invalid_argument("classify_system: probe budget must be >= 1");
  SnrClassReport report;

  auto value = probe_phi_independence(system, grid, probe_budget, seed, PhiProbeMode::Value);
  report.evidence.push_back(value);
  if (value.pass()) {
    report.verdict = SnrClass::StrongSnr;
    return report;
  }

  auto square = probe_phi_independence(system, grid, probe_budget, seed, PhiProbeMode::Square);
  report.evidence.push_back(square);
  if (square.pass()) {
    report.verdict = SnrClass::Snr;
    return report;
  }

  const auto mono =
      coupled_monotonicity_test(system, input, default_r_pairs(), probe_budget, grid, seed);
  ProbeReport mono_probe;
  mono_probe.name = "coupled_r_phi2_monotonicity";
  mono_probe.n_probes = mono.n_replicates;
  mono_probe.violations = mono.phi2_violations;
  report.evidence.push_back(mono_probe);
  report.verdict = mono.phi2_pass() ? SnrClass::QuasiSnr : SnrClass::General;
  return report;
}

Path z_transform(const FunctionalSystem& system, const Path& y) {
  Path z(y.grid, 0.0);
  for (int k = 0; k < y.grid.n_steps(); ++k) {
    const double g = eval_diffusion_checked(system, k, y);
    z.values[k + 1] = z.values[k] + (y.values[k + 1] - y.values[k]) / g;
  }
  return z;
}

Path z_inverse(const FunctionalSystem& system, const Path& z) {
  Path y(z.grid, 0.0);
  for (int k = 0; k < z.grid.n_steps(); ++k) {
    const double g = eval_diffusion_checked(system, k, y);
    y.values[k + 1] = y.values[k] + g * (z.values[k + 1] - z.values[k]);
  }
  return y;
}

}  // namespace sdemi
