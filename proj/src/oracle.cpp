#include "sdemi/oracle.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <map>
#include <mutex>
#include <limits>
#include <stdexcept>
#include <string>

#include "sdemi/errors.hpp"
#include "sdemi/estimate.hpp"
#include "sdemi/numeric.hpp"

namespace sdemi {

OracleValue gauss_cmmse(double t, double r, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gauss oracle: sigma2 must be positive");
  return {sigma2 / (1.0 + r * sigma2 * t), OracleMethod::ClosedForm, 0};
}

OracleValue gauss_ncmmse(double horizon, double /*s*/, double r, double sigma2) {
  // Constant input: smoothing over the whole window is conditioning on Y_T.
  return gauss_cmmse(horizon, r, sigma2);
}

OracleValue gauss_mi(double r, double sigma2, double horizon) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gauss oracle: sigma2 must be positive");
  return {0.5 * std::log1p(r * sigma2 * horizon), OracleMethod::ClosedForm, 0};
}

OracleValue gauss_dmi_dr(double r, double sigma2, double horizon) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gauss oracle: sigma2 must be positive");
  return {sigma2 * horizon / (2.0 * (1.0 + r * sigma2 * horizon)), OracleMethod::ClosedForm, 0};
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  // Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
  // weight exp(-x^2) (zero diagonal, off-diagonal sqrt(j/2)); weights come
  // from the first eigenvector components. Implicit-shift QL on the
  // tridiagonal matrix, tracking only the first row of the rotations.
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");
  std::vector<double> d(n, 0.0), e(n, 0.0), q(n, 0.0);
  for (int j = 1; j < n; ++j) e[j - 1] = std::sqrt(j / 2.0);
  q[0] = 1.0;

  constexpr int kMaxIt = 60;
  for (int l = 0; l < n; ++l) {
    for (int it = 0;; ++it) {
      int m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (it >= kMaxIt) throw std::runtime_error("gauss_hermite: QL iteration failed");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      for (int i = m - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = q[i + 1];
        q[i + 1] = s * q[i] + c * f;
        q[i] = c * q[i] - s * f;
      }
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  const double mu0 = std::sqrt(3.14159265358979323846264338328);
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    nodes[i] = d[order[i]];
    weights[i] = mu0 * q[order[i]] * q[order[i]];
  }
}

namespace {

struct HermiteRule {
  std::vector<double> nodes, weights;
};

const HermiteRule& cached_rule(int n_nodes) {
  static std::mutex mutex;
  static std::map<int, HermiteRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n_nodes);
  if (it == cache.end()) {
    HermiteRule rule;
    gauss_hermite(n_nodes, rule.nodes, rule.weights);
    it = cache.emplace(n_nodes, std::move(rule)).first;
  }
  return it->second;
}

// E[h(U)] for U ~ N(0,1) via Gauss-Hermite: substitute u = sqrt(2) * xi.
double gauss_expectation(int n_nodes, const std::function<double(double)>& h) {
  const HermiteRule& rule = cached_rule(n_nodes);
  const double inv_root_pi = 1.0 / std::sqrt(3.14159265358979323846264338328);
  double acc = 0.0;
  for (int i = 0; i < n_nodes; ++i)
    acc += rule.weights[i] * h(std::sqrt(2.0) * rule.nodes[i]);
  return acc * inv_root_pi;
}

struct Quadrature {
  double value = 0.0;
  int nodes = 0;
};

// Doubles the node count until one more doubling moves the value by at most
// 1e-8; the transition region of the integrand drifts away from the Gaussian
// bulk as r*t grows, so mid-range arguments legitimately need more nodes.
Quadrature stable_quadrature(int n_nodes, const std::function<double(double)>& h,
                             const char* what) {
  if (n_nodes < 32) throw std::invalid_argument("bpsk oracle: n_nodes must be >= 32");
  constexpr int kMaxNodes = 8192;
  double value = gauss_expectation(n_nodes, h);
  for (int n = n_nodes; n <= kMaxNodes; n *= 2) {
    const double refined = gauss_expectation(2 * n, h);
    if (std::abs(refined - value) <= 1e-8) return {value, n};
    value = refined;
  }
  throw QuadratureUnstable(std::string(what) + ": value did not stabilize by " +
                           std::to_string(kMaxNodes) + " nodes");
}

}  // namespace

OracleValue bpsk_cmmse(double t, double r, int n_nodes) {
  const double a = r * t;
  if (a == 0.0) return {1.0, OracleMethod::Quadrature, n_nodes};
  // cmmse(t, r) = 1 - E[tanh^2(a + sqrt(a) U)], U ~ N(0,1), by symmetry of
  // the +-1 mixture.
  const double root_a = std::sqrt(a);
  const auto q = stable_quadrature(
      n_nodes, [&](double u) { const double th = std::tanh(a + root_a * u); return th * th; },
      "bpsk_cmmse");
  return {1.0 - q.value, OracleMethod::Quadrature, q.nodes};
}

OracleValue bpsk_ncmmse(double horizon, double /*s*/, double r, int n_nodes) {
  return bpsk_cmmse(horizon, r, n_nodes);
}

OracleValue bpsk_mi(double r, double horizon, int n_nodes) {
  const double a = r * horizon;
  if (a == 0.0) return {0.0, OracleMethod::Quadrature, n_nodes};
  const double root_a = std::sqrt(a);
  const auto q = stable_quadrature(
      n_nodes,
      [&](double u) { return std::log1p(std::exp(-2.0 * (a + root_a * u))); },
      "bpsk_mi");
  return {std::log(2.0) - q.value, OracleMethod::Quadrature, q.nodes};
}

OracleValue bpsk_dmi_dr(double r, double horizon, int n_nodes) {
  // dI/dr = (1/2) * integral of ncmmse over [0, T]; ncmmse is constant in s.
  const auto c = bpsk_cmmse(horizon, r, n_nodes);
  return {0.5 * horizon * c.value, OracleMethod::Quadrature, c.nodes};
}

std::vector<std::array<double, 2>> telegraph_bruteforce(const FunctionalSystem& system,
                                                        const TelegraphMarkov& model,
                                                        const Path& y, double r) {
  const int n = y.grid.n_steps();
  if (n > 10) throw TooLarge("telegraph_bruteforce: grid must have at most 10 steps");

  const double p_switch = telegraph_switch_probability(model.rate, y.grid.dt());
  const int n_states = n + 1;
  std::vector<std::array<double, 2>> marginal(n_states, {0.0, 0.0});
  double total = 0.0;

  Path candidate(y.grid, 0.0);
  std::vector<int> states(n_states);
  const long n_sequences = 1L << n_states;
  for (long code = 0; code < n_sequences; ++code) {
    double log_prior = 0.0;
    for (int k = 0; k < n_states; ++k) {
      states[k] = static_cast<int>((code >> k) & 1);
      candidate.values[k] = model.states[states[k]];
      if (k == 0)
        log_prior += std::log(model.initial[states[0]]);
      else
        log_prior += std::log(states[k] == states[k - 1] ? 1.0 - p_switch : p_switch);
    }
    const double weight = std::exp(log_prior + path_loglik(system, candidate, y, r));
    total += weight;
    for (int k = 0; k < n_states; ++k) marginal[k][states[k]] += weight;
  }
  for (auto& m : marginal) {
    m[0] /= total;
    m[1] /= total;
  }
  return marginal;
}

}  // namespace sdemi
