#pragma once

#include <array>
#include <vector>

#include "sdemi/grid.hpp"
#include "sdemi/inputs.hpp"
#include "sdemi/system.hpp"

namespace sdemi {

// Independent reference values for the Gaussian and BPSK AWGN systems, used
// as ground truth in acceptance tests. The oracles work with the
// continuous-time sufficient statistic, not the grid; acceptance tolerances
// absorb the O(dt) gap.

enum class OracleMethod { ClosedForm, Quadrature, Enumeration };

struct OracleValue {
  double value = 0.0;
  OracleMethod method = OracleMethod::ClosedForm;
  int nodes = 0;
};

// Constant Gaussian input through the AWGN channel, all closed form.
OracleValue gauss_cmmse(double t, double r, double sigma2);
OracleValue gauss_ncmmse(double horizon, double s, double r, double sigma2);
OracleValue gauss_mi(double r, double sigma2, double horizon);
OracleValue gauss_dmi_dr(double r, double sigma2, double horizon);

// Equiprobable +-1 input through the AWGN channel; Gauss-Hermite quadrature
// over the sufficient statistic Y_t ~ sqrt(r) X t + N(0, t). Values are
// checked by node doubling; a shift larger than 1e-8 raises
// QuadratureUnstable.
OracleValue bpsk_cmmse(double t, double r, int n_nodes = 64);
OracleValue bpsk_ncmmse(double horizon, double s, double r, int n_nodes = 64);
OracleValue bpsk_mi(double r, double horizon, int n_nodes = 64);
OracleValue bpsk_dmi_dr(double r, double horizon, int n_nodes = 64);

// Nodes and weights for the weight function exp(-x^2) on (-inf, inf).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Exact smoothed state marginals over the full window by enumerating all 2^N
// state sequences; reference for the forward-backward recursion. N <= 10.
std::vector<std::array<double, 2>> telegraph_bruteforce(const FunctionalSystem& system,
                                                        const TelegraphMarkov& model,
                                                        const Path& y, double r);

}  // namespace sdemi
