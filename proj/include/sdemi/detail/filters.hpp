#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sdemi/errors.hpp"
#include "sdemi/estimate.hpp"
#include "sdemi/inputs.hpp"

namespace sdemi::detail {

// Shared filtering internals. Both the estimate API and the ensemble hot
// loop go through these so the two routes produce identical arithmetic.

// Prefix log-likelihood per candidate: out[k*a + i] = sum of the first k
// step terms for candidate i; row 0 is zero.
inline std::vector<double> candidate_prefix_logliks(const FunctionalSystem& system,
                                                    const std::vector<Path>& candidates,
                                                    const Path& y, double r, int n_steps) {
  const std::size_t a = candidates.size();
  std::vector<double> prefix((n_steps + 1) * a, 0.0);
  for (int k = 0; k < n_steps; ++k)
    for (std::size_t i = 0; i < a; ++i)
      prefix[(k + 1) * a + i] = prefix[k * a + i] + step_loglik(system, k, candidates[i], y, r);
  return prefix;
}

inline void softmax_into(std::span<const double> logw, std::span<double> out) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logw) m = std::max(m, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    out[i] = std::exp(logw[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < logw.size(); ++i) out[i] /= sum;
}

struct HmmForward {
  // pred[k]: P(x_k | steps 0..k-1); filt[k]: P(x_k | steps 0..k);
  // log_marginal[k]: log p(steps 0..k-1); emission[k]: per-step shifted
  // emission values kept for backward passes (shifts cancel on
  // normalization).
  std::vector<std::array<double, 2>> pred, filt, emission;
  std::vector<double> log_marginal;
};

inline HmmForward hmm_forward(const FunctionalSystem& system, const MarkovChainSupport& chain,
                              const std::array<Path, 2>& candidates, const Path& y, double r,
                              int n_steps) {
  if (!system.pointwise_input)
    throw UnsupportedInput(
        "Markov-chain filtering requires a drift reading the input only at the current index");
  HmmForward fw;
  fw.pred.resize(n_steps + 1);
  fw.filt.resize(n_steps);
  fw.emission.resize(n_steps);
  fw.log_marginal.assign(n_steps + 1, 0.0);

  const auto trans = chain.transition();
  fw.pred[0] = chain.initial;
  for (int k = 0; k < n_steps; ++k) {
    const double l0 = step_loglik(system, k, candidates[0], y, r);
    const double l1 = step_loglik(system, k, candidates[1], y, r);
    const double shift = std::max(l0, l1);
    const std::array<double, 2> e{std::exp(l0 - shift), std::exp(l1 - shift)};
    fw.emission[k] = e;
    const std::array<double, 2> joint{fw.pred[k][0] * e[0], fw.pred[k][1] * e[1]};
    const double c = joint[0] + joint[1];
    fw.filt[k] = {joint[0] / c, joint[1] / c};
    fw.log_marginal[k + 1] = fw.log_marginal[k] + std::log(c) + shift;
    for (int j = 0; j < 2; ++j)
      fw.pred[k + 1][j] = fw.filt[k][0] * trans[0][j] + fw.filt[k][1] * trans[1][j];
  }
  return fw;
}

// Smoothed marginals P(x_s | steps 0..K-1) for s = 0..K, written into gamma
// (K+1 entries). The window-end marginal is the causal predictive
// distribution, copied so the diagonal identity holds bitwise. Valid for any
// forward pass covering at least K steps.
inline void hmm_window_marginals(const HmmForward& fw, const MarkovChainSupport& chain, int K,
                                 std::array<double, 2>* gamma) {
  const auto trans = chain.transition();
  gamma[K] = fw.pred[K];
  std::array<double, 2> beta{1.0, 1.0};
  for (int s = K - 1; s >= 0; --s) {
    std::array<double, 2> g{fw.filt[s][0] * beta[0], fw.filt[s][1] * beta[1]};
    const double norm = g[0] + g[1];
    gamma[s] = {g[0] / norm, g[1] / norm};
    if (s > 0) {
      std::array<double, 2> next{};
      for (int i = 0; i < 2; ++i)
        next[i] = trans[i][0] * fw.emission[s][0] * beta[0] +
                  trans[i][1] * fw.emission[s][1] * beta[1];
      const double scale = next[0] + next[1];
      beta = {next[0] / scale, next[1] / scale};
    }
  }
}

inline std::array<Path, 2> markov_candidates(const MarkovChainSupport& chain,
                                             const TimeGrid& grid) {
  return {constant_path(grid, chain.states[0]), constant_path(grid, chain.states[1])};
}

}  // namespace sdemi::detail
