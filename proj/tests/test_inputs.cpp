#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "sdemi/errors.hpp"
#include "sdemi/inputs.hpp"
#include "sdemi/rng.hpp"

using namespace sdemi;

TEST_CASE("model validation") {
  CHECK_THROWS_AS(validate_model(GaussConstant{0.0}), InvalidModel);
  CHECK_THROWS_AS(validate_model(GaussConstant{-1.0}), InvalidModel);
  CHECK_THROWS_AS(validate_model(FiniteConstant{{}, {}}), InvalidModel);
  CHECK_THROWS_AS(validate_model(FiniteConstant{{1.0}, {0.9}}), InvalidModel);
  CHECK_THROWS_AS(validate_model(FiniteConstant{{1.0, -1.0}, {0.7, 0.4}}), InvalidModel);
  CHECK_THROWS_AS(validate_model(FiniteConstant{{1.0, -1.0}, {1.2, -0.2}}), InvalidModel);
  TelegraphMarkov bad;
  bad.rate = -0.5;
  CHECK_THROWS_AS(validate_model(bad), InvalidModel);
  CHECK_NOTHROW(validate_model(TelegraphMarkov{}));
}

TEST_CASE("finite constant sampler matches its distribution") {
  const TimeGrid grid(1.0, 20);
  const FiniteConstant model{{+1.0, -1.0}, {0.5, 0.5}};
  int plus = 0;
  const int reps = 100000;
  for (int m = 0; m < reps; ++m) {
    const Path p = sample_input(model, grid, 21, m);
    // Constant over the grid, valued in the alphabet.
    CHECK(p.values[0] == p.values.back());
    CHECK((p.values[0] == 1.0 || p.values[0] == -1.0));
    if (p.values[0] == 1.0) ++plus;
  }
  const double freq = static_cast<double>(plus) / reps;
  const double se = std::sqrt(0.25 / reps);
  CHECK(std::abs(freq - 0.5) < 3.0 * se);
}

TEST_CASE("telegraph with zero rate never switches") {
  const TimeGrid grid(2.0, 50);
  TelegraphMarkov model;
  model.rate = 0.0;
  for (int m = 0; m < 50; ++m) {
    const Path p = sample_input(model, grid, 3, m);
    for (double v : p.values) CHECK(v == p.values[0]);
  }
}

TEST_CASE("telegraph per-step switch frequency matches the exact chain") {
  const TimeGrid grid(1.0, 200);
  TelegraphMarkov model;
  model.rate = 1.0;
  const double expected = telegraph_switch_probability(model.rate, grid.dt());

  long switches = 0;
  long steps = 0;
  const int reps = 100000;
  for (int m = 0; m < reps; ++m) {
    const Path p = sample_input(model, grid, 17, m);
    for (int k = 1; k < grid.n_points(); ++k) {
      ++steps;
      if (p.values[k] != p.values[k - 1]) ++switches;
    }
  }
  const double freq = static_cast<double>(switches) / steps;
  const double se = std::sqrt(expected * (1.0 - expected) / steps);
  CHECK(std::abs(freq - expected) < 3.0 * se);
}

TEST_CASE("gauss constant sampler moments") {
  const TimeGrid grid(1.0, 4);
  const GaussConstant model{2.0};
  double sum = 0.0, sumsq = 0.0;
  const int reps = 100000;
  for (int m = 0; m < reps; ++m) {
    const Path p = sample_input(model, grid, 33, m);
    CHECK(p.values[0] == p.values.back());
    sum += p.values[0];
    sumsq += p.values[0] * p.values[0];
  }
  const double mean = sum / reps;
  const double var = sumsq / reps - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(2.0 / reps));
  CHECK(var == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("enumerate_support") {
  const TimeGrid grid(1.0, 10);

  SUBCASE("finite constant lists the constant paths") {
    const auto support = enumerate_support(FiniteConstant{{+1.0, -1.0}, {0.5, 0.5}}, grid);
    const auto& finite = std::get<FinitePathSupport>(support);
    REQUIRE(finite.paths.size() == 2);
    CHECK(finite.probs[0] + finite.probs[1] == 1.0);
    for (double v : finite.paths[0].values) CHECK(v == 1.0);
    for (double v : finite.paths[1].values) CHECK(v == -1.0);
  }

  SUBCASE("gauss constant is unsupported") {
    const auto support = enumerate_support(GaussConstant{1.0}, grid);
    CHECK(std::holds_alternative<UnsupportedSupport>(support));
  }

  SUBCASE("telegraph handle has stochastic rows") {
    TelegraphMarkov model;
    model.rate = 1.0;
    const auto support = enumerate_support(model, grid);
    const auto& chain = std::get<MarkovChainSupport>(support);
    const auto trans = chain.transition();
    for (int i = 0; i < 2; ++i) CHECK(trans[i][0] + trans[i][1] == doctest::Approx(1.0));
    CHECK(chain.p_switch == doctest::Approx((1.0 - std::exp(-2.0 * grid.dt())) / 2.0));
  }
}

TEST_CASE("catalog contents") {
  const auto entries = catalog();
  REQUIRE(entries.size() == 6);

  std::set<std::string> ids;
  for (const auto& e : entries) ids.insert(e.id);
  CHECK(ids.size() == 6);

  const auto gauss = find_entry(entries, "awgn-gauss");
  CHECK(gauss.system.nondegeneracy_k == 1.0);
  CHECK(gauss.has_oracle);
  const TimeGrid grid(1.0, 16);
  const Path probe(grid, 0.0);
  for (int k = 0; k < grid.n_points(); ++k) CHECK(gauss.system.diffusion(k, probe) == 1.0);

  const auto modulated = find_entry(entries, "modulated-bpsk");
  CHECK(modulated.system.nondegeneracy_k == 0.25);
  const rng::StreamKey key{5, rng::kStreamProbe, 0, 0};
  for (int p = 0; p < 2000; ++p) {
    Path y(grid, 0.0);
    for (auto& v : y.values) v = 10.0 * rng::normal(key, 1000 * p + (&v - y.values.data()));
    const int k = static_cast<int>(rng::bits(key, 999999 + p) % grid.n_points());
    const double g = modulated.system.diffusion(k, y);
    CHECK(g * g >= 0.25);
    CHECK(g * g <= 2.25);
  }

  const auto shifted = find_entry(entries, "shifted-positive");
  const auto& alphabet = std::get<FiniteConstant>(shifted.input);
  for (double v : alphabet.values) CHECK(v > 0.0);  // nonnegative drift for coupling tests

  CHECK(find_entry(entries, "awgn-feedback").expected_class == SnrClass::General);
  CHECK_THROWS_AS(find_entry(entries, "no-such-system"), std::invalid_argument);
}

TEST_CASE("catalog parameter overrides") {
  CatalogParams params;
  params.gamma = 0.25;
  params.beta = 1.0;
  const auto entries = catalog(params);
  const auto modulated = find_entry(entries, "modulated-bpsk");
  CHECK(modulated.system.nondegeneracy_k == doctest::Approx(0.5625));

  const TimeGrid grid(1.0, 8);
  const auto feedback = find_entry(entries, "awgn-feedback");
  Path x = constant_path(grid, 1.0);
  Path y = constant_path(grid, 2.0);
  CHECK(feedback.system.drift(0, x, y) == doctest::Approx(1.0 - 1.0 * 2.0));
}
