#pragma once

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "sdemi/grid.hpp"
#include "sdemi/inputs.hpp"
#include "sdemi/system.hpp"

namespace sdemi {

// Exact conditional-expectation machinery on the discretized model. The
// conditional law targeted is that of the Euler-Maruyama transition model;
// continuous-time bias is controlled only through grid refinement.

// phi(k, x, y) = F(k, x, y) / G(k, y).
double eval_phi(const FunctionalSystem& system, int k, const Path& x, const Path& y);

// log N(dy_k ; sqrt(r) F(k,x,y) dt, G(k,y)^2 dt). Single source for every
// likelihood, filter and marginal computation in this module.
double step_loglik(const FunctionalSystem& system, int k, const Path& x, const Path& y, double r);

// Sum of step_loglik over the first n_steps steps (defaults to all N).
double path_loglik(const FunctionalSystem& system, const Path& x, const Path& y, double r,
                   int n_steps = -1);

// Posterior over the input given observations of y. Weights at index k use
// observation steps 0..k-1, so index 0 carries the prior.
struct FinitePosterior {
  std::vector<double> values;   // alphabet
  int n_points = 0;             // grid points covered (N+1 causal, t_index+1 smoothed)
  std::vector<double> weights;  // row-major: weights[k * values.size() + i]
};

struct MarkovPosterior {
  std::array<double, 2> states{};
  int n_points = 0;
  std::vector<double> weights;  // row-major: weights[k * 2 + i]
};

struct GaussPosterior {
  std::vector<double> mean;
  std::vector<double> variance;
};

using PosteriorState = std::variant<FinitePosterior, MarkovPosterior, GaussPosterior>;

// Filtering distribution at every grid index.
PosteriorState causal_posterior(const FunctionalSystem& system, const InputModel& input,
                                const Path& y, double r);

// Forward-backward smoothing over the observation window 0..t_index: the
// returned state covers indices s = 0..t_index, each conditioned on the full
// window. The marginal at s = t_index coincides bitwise with the causal one.
PosteriorState smoothed_posterior(const FunctionalSystem& system, const InputModel& input,
                                  const Path& y, double r, int t_index);

// E[phi(k, X, y) | .] under the posterior's index-k marginal.
double conditional_phi(const FunctionalSystem& system, const PosteriorState& posterior, int k,
                       const Path& y);

// Variant over explicit weights and candidate paths; shared with the
// ensemble hot loop so both routes use the same arithmetic.
double conditional_phi(const FunctionalSystem& system, std::span<const double> weights,
                       std::span<const Path> candidates, int k, const Path& y);

// Running log Radon-Nikodym derivative log d mu_{X,Y} / d[mu_X x mu_Y] at
// every grid index: log p(y | x) - log p(y) on the discretized model, exact
// for enumerable inputs and in closed form for the Gaussian AWGN case.
// Value at index 0 is 0; the ensemble mean at T is the mutual information.
std::vector<double> log_rn_curve(const FunctionalSystem& system, const InputModel& input,
                                 const Path& x, const Path& y, double r);

double log_rn(const FunctionalSystem& system, const InputModel& input, const Path& x,
              const Path& y, double r, int t_index);

}  // namespace sdemi
