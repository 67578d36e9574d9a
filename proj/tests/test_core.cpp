#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdemi/errors.hpp"
#include "sdemi/grid.hpp"
#include "sdemi/inputs.hpp"
#include "sdemi/rng.hpp"
#include "sdemi/system.hpp"

using namespace sdemi;

TEST_CASE("time grid endpoints and spacing") {
  const TimeGrid grid(1.0, 200);
  CHECK(grid.time(0) == 0.0);
  CHECK(grid.time(200) == 1.0);  // t_N is the horizon exactly
  CHECK(grid.n_points() == 201);
  for (int k = 1; k <= 200; ++k) {
    const double spacing = grid.time(k) - grid.time(k - 1);
    CHECK(grid.time(k) > grid.time(k - 1));
    CHECK(spacing == doctest::Approx(grid.dt()).epsilon(1e-12));
  }
  CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(-1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("noise bundles are reproducible and stream-separated") {
  const TimeGrid grid(1.0, 100);
  const auto a = NoiseBundle::draw(grid, 42, 7);
  const auto b = NoiseBundle::draw(grid, 42, 7);
  CHECK(a.increments == b.increments);

  const auto other_rep = NoiseBundle::draw(grid, 42, 8);
  const auto other_seed = NoiseBundle::draw(grid, 43, 7);
  const auto other_slot = NoiseBundle::draw(grid, 42, 7, 1);
  CHECK(a.increments != other_rep.increments);
  CHECK(a.increments != other_seed.increments);
  CHECK(a.increments != other_slot.increments);

  // Input sampling must consume a stream disjoint from the noise stream.
  const rng::StreamKey noise_key{42, rng::kStreamNoise, 7, 0};
  const rng::StreamKey input_key{42, rng::kStreamInput, 7, 0};
  CHECK(rng::normal(noise_key, 0) != rng::normal(input_key, 0));
}

TEST_CASE("noise increments have the right moments") {
  const TimeGrid grid(1.0, 10);
  double sum = 0.0, sumsq = 0.0;
  const int reps = 20000;
  for (int m = 0; m < reps; ++m) {
    const auto noise = NoiseBundle::draw(grid, 5, m);
    for (double d : noise.increments) {
      sum += d;
      sumsq += d * d;
    }
  }
  const long n = static_cast<long>(reps) * grid.n_steps();
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(grid.dt() / n));
  CHECK(var == doctest::Approx(grid.dt()).epsilon(0.02));
}

namespace {

FunctionalSystem awgn_system() {
  FunctionalSystem sys;
  sys.drift = [](int k, const Path& x, const Path&) { return x.values[k]; };
  sys.diffusion = [](int, const Path&) { return 1.0; };
  sys.nondegeneracy_k = 1.0;
  sys.awgn_form = true;
  sys.pointwise_input = true;
  return sys;
}

}  // namespace

TEST_CASE("zero drift output is the running noise sum") {
  const TimeGrid grid(1.0, 50);
  FunctionalSystem sys = awgn_system();
  sys.drift = [](int, const Path&, const Path&) { return 0.0; };
  const auto noise = NoiseBundle::draw(grid, 1, 0);
  const Path x = constant_path(grid, 3.0);
  const Path y = simulate_output(sys, x, 2.0, noise, grid);
  double acc = 0.0;
  CHECK(y.values[0] == 0.0);
  for (int k = 0; k < grid.n_steps(); ++k) {
    acc += noise.increments[k];
    CHECK(y.values[k + 1] == acc);
  }
}

TEST_CASE("deterministic drift integrates to sqrt(r) * T") {
  const TimeGrid grid(1.0, 100);
  FunctionalSystem sys = awgn_system();
  sys.drift = [](int, const Path&, const Path&) { return 1.0; };
  NoiseBundle still;
  still.increments.assign(grid.n_steps(), 0.0);
  const Path x = constant_path(grid, 0.0);
  const Path y = simulate_output(sys, x, 4.0, still, grid);
  CHECK(y.values.back() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("r = 0 output coincides with the noise-only auxiliary path") {
  const TimeGrid grid(1.0, 80);
  const auto entries = catalog();
  for (const auto& entry : entries) {
    const auto noise = NoiseBundle::draw(grid, 9, 3);
    const Path x = sample_input(entry.input, grid, 9, 3);
    const Path y = simulate_output(entry.system, x, 0.0, noise, grid);
    // dxi = G dW with the same increments.
    Path xi(grid, 0.0);
    for (int k = 0; k < grid.n_steps(); ++k)
      xi.values[k + 1] = xi.values[k] + entry.system.diffusion(k, xi) * noise.increments[k];
    CHECK(y.values == xi.values);
  }
}

TEST_CASE("identical inputs give bitwise-identical outputs") {
  const TimeGrid grid(1.0, 64);
  const auto& entry = find_entry(catalog(), "modulated-bpsk");
  const auto noise = NoiseBundle::draw(grid, 123, 5);
  const Path x = sample_input(entry.input, grid, 123, 5);
  const Path y1 = simulate_output(entry.system, x, 1.7, noise, grid);
  const Path y2 = simulate_output(entry.system, x, 1.7, noise, grid);
  CHECK(y1.values == y2.values);
}

TEST_CASE("coupled simulation shares noise and obeys r ordering") {
  const TimeGrid grid(1.0, 100);
  const auto sys = awgn_system();

  SUBCASE("equal r values give identical paths") {
    const auto noise = NoiseBundle::draw(grid, 2, 0);
    const Path x = constant_path(grid, 0.7);
    const auto ys = simulate_coupled(sys, x, {1.5, 1.5}, noise, grid);
    CHECK(ys[0].values == ys[1].values);
  }

  SUBCASE("nonnegative additive drift orders outputs pointwise") {
    for (int m = 0; m < 200; ++m) {
      const auto noise = NoiseBundle::draw(grid, 3, m);
      const Path x = constant_path(grid, 0.25 + 0.5 * rng::uniform01({3, 99, (std::uint64_t)m}, 0));
      const auto ys = simulate_coupled(sys, x, {1.0, 4.0}, noise, grid);
      for (int k = 0; k <= grid.n_steps(); ++k) CHECK(ys[0].values[k] <= ys[1].values[k]);
    }
  }

  SUBCASE("rejects descending r lists") {
    const auto noise = NoiseBundle::draw(grid, 2, 0);
    CHECK_THROWS_AS(simulate_coupled(sys, constant_path(grid, 1.0), {2.0, 1.0}, noise, grid),
                    std::invalid_argument);
  }
}

TEST_CASE("modulated system with positive input keeps pathwise ordering") {
  // Monotone coupling for the state-dependent catalog system, checked over
  // a full ensemble of replicates.
  const TimeGrid grid(1.0, 100);
  const auto& modulated = find_entry(catalog(), "modulated-bpsk");
  const InputModel positive = FiniteConstant{{0.5, 1.5}, {0.5, 0.5}};
  long violations = 0;
  for (int m = 0; m < 1000; ++m) {
    const auto noise = NoiseBundle::draw(grid, 11, m);
    const Path x = sample_input(positive, grid, 11, m);
    const auto ys = simulate_coupled(modulated.system, x, {1.0, 4.0}, noise, grid);
    for (int k = 0; k <= grid.n_steps(); ++k)
      if (ys[0].values[k] > ys[1].values[k]) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("non-degeneracy guard fires exactly when G^2 < K") {
  const TimeGrid grid(1.0, 10);
  FunctionalSystem sys = awgn_system();
  sys.nondegeneracy_k = 0.25;
  sys.diffusion = [](int, const Path&) { return 0.5; };  // G^2 == K: allowed
  const auto noise = NoiseBundle::draw(grid, 4, 0);
  CHECK_NOTHROW(simulate_output(sys, constant_path(grid, 1.0), 1.0, noise, grid));

  sys.diffusion = [](int, const Path&) { return 0.4; };  // G^2 < K
  CHECK_THROWS_AS(simulate_output(sys, constant_path(grid, 1.0), 1.0, noise, grid),
                  NonDegeneracyViolation);
}

TEST_CASE("state blow-up aborts the replicate") {
  const TimeGrid grid(1.0, 40);
  FunctionalSystem sys = awgn_system();
  sys.drift = [](int k, const Path&, const Path& y) { return 1e200 * (1.0 + y.values[k] * y.values[k]); };
  const auto noise = NoiseBundle::draw(grid, 4, 1);
  CHECK_THROWS_AS(simulate_output(sys, constant_path(grid, 1.0), 1.0, noise, grid), NonFiniteState);
}

TEST_CASE("non-anticipativity probe") {
  const TimeGrid grid(1.0, 60);

  SUBCASE("catalog systems pass") {
    for (const auto& entry : catalog()) {
      const auto report = probe_non_anticipativity(entry.system, grid, 500, 77);
      CHECK(report.pass());
    }
  }

  SUBCASE("anticipative drift fails with a witness") {
    FunctionalSystem sys = awgn_system();
    sys.drift = [](int, const Path&, const Path& y) { return y.values.back(); };
    const auto report = probe_non_anticipativity(sys, grid, 200, 77);
    CHECK_FALSE(report.pass());
    REQUIRE(report.first_witness.has_value());
    CHECK(report.first_witness->what.find("drift") != std::string::npos);
  }

  SUBCASE("telegraph catalog system passes a large probe set") {
    const auto& entry = find_entry(catalog(), "telegraph-awgn");
    CHECK(probe_non_anticipativity(entry.system, grid, 1000, 13).pass());
  }
}
