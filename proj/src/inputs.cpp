#include "sdemi/inputs.hpp"

#include <cmath>

#include "sdemi/errors.hpp"
#include "sdemi/rng.hpp"

namespace sdemi {

namespace {

void check_probs(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidModel("probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidModel("probabilities must sum to 1");
}

}  // namespace

void validate_model(const InputModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussConstant>) {
          if (!(m.variance > 0.0)) throw InvalidModel("GaussConstant: variance must be positive");
        } else if constexpr (std::is_same_v<T, FiniteConstant>) {
          if (m.values.empty()) throw InvalidModel("FiniteConstant: alphabet must be non-empty");
          if (m.values.size() != m.probs.size())
            throw InvalidModel("FiniteConstant: values and probs must have equal length");
          check_probs(m.probs);
        } else {
          if (!(m.rate >= 0.0)) throw InvalidModel("TelegraphMarkov: rate must be >= 0");
          check_probs({m.initial[0], m.initial[1]});
        }
      },
      model);
}

double telegraph_switch_probability(double rate, double dt) {
  return (1.0 - std::exp(-2.0 * rate * dt)) / 2.0;
}

Path sample_input(const InputModel& model, const TimeGrid& grid, std::uint64_t seed,
                  std::uint64_t replicate, std::uint64_t slot) {
  validate_model(model);
  const rng::StreamKey key{seed, rng::kStreamInput, replicate, slot};
  return std::visit(
      [&](const auto& m) -> Path {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussConstant>) {
          return constant_path(grid, rng::normal(key, 0) * std::sqrt(m.variance));
        } else if constexpr (std::is_same_v<T, FiniteConstant>) {
          const double u = rng::uniform01(key, 0);
          double acc = 0.0;
          std::size_t pick = m.values.size() - 1;
          for (std::size_t i = 0; i < m.values.size(); ++i) {
            acc += m.probs[i];
            if (u <= acc) {
              pick = i;
              break;
            }
          }
          return constant_path(grid, m.values[pick]);
        } else {
          Path p(grid, 0.0);
          int state = rng::uniform01(key, 0) <= m.initial[0] ? 0 : 1;
          p.values[0] = m.states[state];
          const double p_switch = telegraph_switch_probability(m.rate, grid.dt());
          for (int k = 1; k < grid.n_points(); ++k) {
            if (rng::uniform01(key, static_cast<std::uint64_t>(k)) <= p_switch) state = 1 - state;
            p.values[k] = m.states[state];
          }
          return p;
        }
      },
      model);
}

TrajectorySupport enumerate_support(const InputModel& model, const TimeGrid& grid) {
  validate_model(model);
  return std::visit(
      [&](const auto& m) -> TrajectorySupport {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GaussConstant>) {
          (void)m;
          return UnsupportedSupport{};
        } else if constexpr (std::is_same_v<T, FiniteConstant>) {
          FinitePathSupport s;
          for (std::size_t i = 0; i < m.values.size(); ++i) {
            s.paths.push_back(constant_path(grid, m.values[i]));
            s.probs.push_back(m.probs[i]);
          }
          return s;
        } else {
          MarkovChainSupport s;
          s.states = m.states;
          s.initial = m.initial;
          s.p_switch = telegraph_switch_probability(m.rate, grid.dt());
          return s;
        }
      },
      model);
}

const char* to_string(SnrClass c) {
  switch (c) {
    case SnrClass::General: return "General";
    case SnrClass::QuasiSnr: return "QuasiSnr";
    case SnrClass::Snr: return "Snr";
    case SnrClass::StrongSnr: return "StrongSnr";
  }
  return "General";
}

std::optional<SnrClass> snr_class_from_string(const std::string& s) {
  if (s == "General") return SnrClass::General;
  if (s == "QuasiSnr") return SnrClass::QuasiSnr;
  if (s == "Snr") return SnrClass::Snr;
  if (s == "StrongSnr") return SnrClass::StrongSnr;
  return std::nullopt;
}

std::vector<SystemCatalogEntry> catalog(const CatalogParams& params) {
  std::vector<SystemCatalogEntry> entries;

  const auto input_at_k = [](int k, const Path& x, const Path&) { return x.values[k]; };
  const auto unit = [](int, const Path&) { return 1.0; };

  FunctionalSystem awgn;
  awgn.drift = input_at_k;
  awgn.diffusion = unit;
  awgn.nondegeneracy_k = 1.0;
  awgn.awgn_form = true;
  awgn.pointwise_input = true;

  const FiniteConstant bpsk{{+1.0, -1.0}, {0.5, 0.5}};

  entries.push_back({"awgn-gauss", awgn, GaussConstant{params.sigma2}, SnrClass::StrongSnr, true});
  entries.push_back({"awgn-bpsk", awgn, bpsk, SnrClass::StrongSnr, true});

  TelegraphMarkov telegraph;
  telegraph.rate = params.lambda;
  entries.push_back({"telegraph-awgn", awgn, telegraph, SnrClass::StrongSnr, false});

  FunctionalSystem feedback;
  const double beta = params.beta;
  feedback.drift = [beta](int k, const Path& x, const Path& y) {
    return x.values[k] - beta * y.values[k];
  };
  feedback.diffusion = unit;
  feedback.nondegeneracy_k = 1.0;
  feedback.pointwise_input = true;
  entries.push_back({"awgn-feedback", feedback, bpsk, SnrClass::General, false});

  FunctionalSystem modulated;
  const double gamma = params.gamma;
  modulated.drift = [gamma](int k, const Path& x, const Path& y) {
    return x.values[k] * (1.0 + gamma * std::sin(y.values[k]));
  };
  modulated.diffusion = [gamma](int k, const Path& y) {
    return 1.0 + gamma * std::sin(y.values[k]);
  };
  const double g_min = 1.0 - std::abs(gamma);
  modulated.nondegeneracy_k = g_min * g_min;
  modulated.pointwise_input = true;
  entries.push_back({"modulated-bpsk", modulated, bpsk, SnrClass::StrongSnr, true});

  const FiniteConstant shifted{{0.5, 1.5}, {0.5, 0.5}};
  entries.push_back({"shifted-positive", awgn, shifted, SnrClass::StrongSnr, true});

  return entries;
}

SystemCatalogEntry find_entry(const std::vector<SystemCatalogEntry>& entries,
                              const std::string& id) {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw std::invalid_argument("unknown catalog system id: " + id);
}

}  // namespace sdemi
