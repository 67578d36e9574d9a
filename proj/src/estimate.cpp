#include "sdemi/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "sdemi/detail/filters.hpp"
#include "sdemi/errors.hpp"
#include "sdemi/numeric.hpp"

namespace sdemi {

double eval_phi(const FunctionalSystem& system, int k, const Path& x, const Path& y) {
  const double g = eval_diffusion_checked(system, k, y);
  return system.drift(k, x, y) / g;
}

double step_loglik(const FunctionalSystem& system, int k, const Path& x, const Path& y, double r) {
  const double dt = y.grid.dt();
  const double g = eval_diffusion_checked(system, k, y);
  const double mean = std::sqrt(r) * system.drift(k, x, y) * dt;
  const double dy = y.values[k + 1] - y.values[k];
  return normal_logpdf(dy, mean, g * g * dt);
}

double path_loglik(const FunctionalSystem& system, const Path& x, const Path& y, double r,
                   int n_steps) {
  const int n = n_steps < 0 ? y.grid.n_steps() : n_steps;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += step_loglik(system, k, x, y, r);
  return sum;
}

namespace {

FinitePosterior finite_causal(const FunctionalSystem& system, const FinitePathSupport& support,
                              const Path& y, double r, int n_points) {
  const std::size_t a = support.paths.size();
  FinitePosterior post;
  post.n_points = n_points;
  for (const auto& p : support.paths) post.values.push_back(p.values[0]);
  post.weights.resize(n_points * a);

  const auto prefix = detail::candidate_prefix_logliks(system, support.paths, y, r, n_points - 1);
  std::vector<double> logw(a);
  for (int k = 0; k < n_points; ++k) {
    for (std::size_t i = 0; i < a; ++i) logw[i] = std::log(support.probs[i]) + prefix[k * a + i];
    detail::softmax_into(logw, std::span<double>(post.weights).subspan(k * a, a));
  }
  return post;
}

GaussPosterior gauss_conjugate(const FunctionalSystem& system, const GaussConstant& model,
                               const Path& y, double r, int n_points) {
  if (!system.awgn_form)
    throw UnsupportedInput(
        "GaussConstant conditioning is implemented only for the pure AWGN form");
  GaussPosterior post;
  post.mean.resize(n_points);
  post.variance.resize(n_points);
  const double s2 = model.variance;
  const double root_r = std::sqrt(r);
  for (int k = 0; k < n_points; ++k) {
    const double denom = 1.0 + r * s2 * y.grid.time(k);
    post.mean[k] = root_r * s2 * y.values[k] / denom;
    post.variance[k] = s2 / denom;
  }
  return post;
}

}  // namespace

PosteriorState causal_posterior(const FunctionalSystem& system, const InputModel& input,
                                const Path& y, double r) {
  const auto support = enumerate_support(input, y.grid);
  if (const auto* finite = std::get_if<FinitePathSupport>(&support))
    return finite_causal(system, *finite, y, r, y.grid.n_points());
  if (const auto* chain = std::get_if<MarkovChainSupport>(&support)) {
    const auto candidates = detail::markov_candidates(*chain, y.grid);
    const auto fw = detail::hmm_forward(system, *chain, candidates, y, r, y.grid.n_steps());
    MarkovPosterior post;
    post.states = chain->states;
    post.n_points = y.grid.n_points();
    post.weights.resize(2 * post.n_points);
    for (int k = 0; k < post.n_points; ++k) {
      post.weights[2 * k] = fw.pred[k][0];
      post.weights[2 * k + 1] = fw.pred[k][1];
    }
    return post;
  }
  return gauss_conjugate(system, std::get<GaussConstant>(input), y, r, y.grid.n_points());
}

PosteriorState smoothed_posterior(const FunctionalSystem& system, const InputModel& input,
                                  const Path& y, double r, int t_index) {
  if (t_index < 0 || t_index > y.grid.n_steps())
    throw std::invalid_argument("smoothed_posterior: t_index out of range");
  const auto support = enumerate_support(input, y.grid);
  if (const auto* finite = std::get_if<FinitePathSupport>(&support)) {
    // Constant input: every s <= t shares the window posterior.
    auto window = finite_causal(system, *finite, y, r, t_index + 1);
    const std::size_t a = window.values.size();
    for (int s = 0; s < t_index; ++s)
      std::copy_n(window.weights.begin() + t_index * a, a, window.weights.begin() + s * a);
    return window;
  }
  if (const auto* chain = std::get_if<MarkovChainSupport>(&support)) {
    const auto candidates = detail::markov_candidates(*chain, y.grid);
    const auto fw = detail::hmm_forward(system, *chain, candidates, y, r, t_index);
    std::vector<std::array<double, 2>> gamma(t_index + 1);
    detail::hmm_window_marginals(fw, *chain, t_index, gamma.data());
    MarkovPosterior post;
    post.states = chain->states;
    post.n_points = t_index + 1;
    post.weights.resize(2 * post.n_points);
    for (int s = 0; s <= t_index; ++s) {
      post.weights[2 * s] = gamma[s][0];
      post.weights[2 * s + 1] = gamma[s][1];
    }
    return post;
  }

  auto post = gauss_conjugate(system, std::get<GaussConstant>(input), y, r, t_index + 1);
  for (int s = 0; s < t_index; ++s) {
    post.mean[s] = post.mean[t_index];
    post.variance[s] = post.variance[t_index];
  }
  return post;
}

double conditional_phi(const FunctionalSystem& system, std::span<const double> weights,
                       std::span<const Path> candidates, int k, const Path& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    acc += weights[i] * eval_phi(system, k, candidates[i], y);
  return acc;
}

double conditional_phi(const FunctionalSystem& system, const PosteriorState& posterior, int k,
                       const Path& y) {
  if (const auto* finite = std::get_if<FinitePosterior>(&posterior)) {
    if (k < 0 || k >= finite->n_points)
      throw std::invalid_argument("conditional_phi: index outside posterior window");
    std::vector<Path> candidates;
    candidates.reserve(finite->values.size());
    for (double v : finite->values) candidates.push_back(constant_path(y.grid, v));
    const std::size_t a = finite->values.size();
    return conditional_phi(system, std::span<const double>(finite->weights).subspan(k * a, a),
                           candidates, k, y);
  }
  if (const auto* chain = std::get_if<MarkovPosterior>(&posterior)) {
    if (k < 0 || k >= chain->n_points)
      throw std::invalid_argument("conditional_phi: index outside posterior window");
    const std::vector<Path> candidates{constant_path(y.grid, chain->states[0]),
                                       constant_path(y.grid, chain->states[1])};
    return conditional_phi(system, std::span<const double>(chain->weights).subspan(2 * k, 2),
                           candidates, k, y);
  }
  const auto& gauss = std::get<GaussPosterior>(posterior);
  if (k < 0 || k >= static_cast<int>(gauss.mean.size()))
    throw std::invalid_argument("conditional_phi: index outside posterior window");
  // Pure AWGN form: phi(k, X, y) = X, so the conditional is the posterior mean.
  return gauss.mean[k];
}

std::vector<double> log_rn_curve(const FunctionalSystem& system, const InputModel& input,
                                 const Path& x, const Path& y, double r) {
  const int n_steps = y.grid.n_steps();
  std::vector<double> out(n_steps + 1, 0.0);
  const auto support = enumerate_support(input, y.grid);

  if (const auto* finite = std::get_if<FinitePathSupport>(&support)) {
    const std::size_t a = finite->paths.size();
    const auto prefix = detail::candidate_prefix_logliks(system, finite->paths, y, r, n_steps);

    // The realized input is one of the candidates whenever it was sampled
    // from the support; reuse its prefix in that case.
    int match = -1;
    for (std::size_t i = 0; i < a; ++i)
      if (finite->paths[i].values == x.values) match = static_cast<int>(i);

    std::vector<double> true_prefix(n_steps + 1, 0.0);
    if (match < 0)
      for (int k = 0; k < n_steps; ++k)
        true_prefix[k + 1] = true_prefix[k] + step_loglik(system, k, x, y, r);

    // Marginal relative to the realized candidate's prefix: the shifted form
    // cancels exactly when the likelihood is flat (r = 0) and stays well
    // conditioned at large N * r.
    std::vector<double> logw(a);
    for (int k = 1; k <= n_steps; ++k) {
      const double lt = match >= 0 ? prefix[k * a + match] : true_prefix[k];
      for (std::size_t i = 0; i < a; ++i)
        logw[i] = std::log(finite->probs[i]) + (prefix[k * a + i] - lt);
      out[k] = -logsumexp(logw);
    }
    return out;
  }

  if (const auto* chain = std::get_if<MarkovChainSupport>(&support)) {
    const auto candidates = detail::markov_candidates(*chain, y.grid);
    const auto fw = detail::hmm_forward(system, *chain, candidates, y, r, n_steps);
    double true_prefix = 0.0;
    for (int k = 1; k <= n_steps; ++k) {
      true_prefix += step_loglik(system, k - 1, x, y, r);
      out[k] = true_prefix - fw.log_marginal[k];
    }
    return out;
  }

  if (!system.awgn_form)
    throw UnsupportedInput("log_rn: GaussConstant input requires the pure AWGN form");
  const double s2 = std::get<GaussConstant>(input).variance;
  const double root_r = std::sqrt(r);
  const double xv = x.values[0];
  for (int k = 1; k <= n_steps; ++k) {
    const double t = y.grid.time(k);
    const double yk = y.values[k];
    out[k] = root_r * xv * yk - r * xv * xv * t / 2.0 + 0.5 * std::log1p(r * s2 * t) -
             r * s2 * yk * yk / (2.0 * (1.0 + r * s2 * t));
  }
  return out;
}

double log_rn(const FunctionalSystem& system, const InputModel& input, const Path& x,
              const Path& y, double r, int t_index) {
  if (t_index < 0 || t_index > y.grid.n_steps())
    throw std::invalid_argument("log_rn: t_index out of range");
  return log_rn_curve(system, input, x, y, r)[t_index];
}

}  // namespace sdemi
