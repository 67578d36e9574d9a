#include "sdemi/mmse_info.hpp"

#include <chrono>
#include <cmath>
#include <exception>

#include "sdemi/detail/filters.hpp"
#include "sdemi/errors.hpp"
#include "sdemi/estimate.hpp"
#include "sdemi/numeric.hpp"
#include "sdemi/rng.hpp"

namespace sdemi {

namespace {

inline std::size_t tri_base(int k) { return static_cast<std::size_t>(k) * (k + 1) / 2; }

inline std::size_t smooth_stride(int n_points, SmoothingMode mode) {
  switch (mode) {
    case SmoothingMode::AllWindows: return tri_base(n_points);
    case SmoothingMode::FinalWindow: return static_cast<std::size_t>(n_points);
    case SmoothingMode::None: return 0;
  }
  return 0;
}

inline double sq(double v) { return v * v; }

// Everything one replicate contributes, for all r values, before reduction.
struct ReplicateRecord {
  bool aborted = false;
  int n_points = 0;
  std::size_t stride = 0;
  SmoothingMode mode = SmoothingMode::None;
  // Per (ri, k) arrays with stride n_points.
  std::vector<double> phi, cond, causal_sq, logrn, expneg, causal_prefix, smooth_trapz, cor3_inner;
  // Smoothing cells: lower triangle (AllWindows) or row t = T (FinalWindow).
  std::vector<double> smooth;

  void allocate(int n_r, int n_pts, SmoothingMode m) {
    n_points = n_pts;
    mode = m;
    stride = smooth_stride(n_pts, m);
    const std::size_t nk = static_cast<std::size_t>(n_r) * n_pts;
    phi.assign(nk, 0.0);
    cond.assign(nk, 0.0);
    causal_sq.assign(nk, 0.0);
    logrn.assign(nk, 0.0);
    expneg.assign(nk, 0.0);
    causal_prefix.assign(nk, 0.0);
    smooth_trapz.assign(nk, 0.0);
    cor3_inner.assign(nk, 0.0);
    smooth.assign(static_cast<std::size_t>(n_r) * stride, 0.0);
  }

  double* row(std::vector<double>& v, int ri) { return v.data() + static_cast<std::size_t>(ri) * n_points; }
  double* cells(int ri) { return smooth.data() + static_cast<std::size_t>(ri) * stride; }
  const double* row(const std::vector<double>& v, int ri) const {
    return v.data() + static_cast<std::size_t>(ri) * n_points;
  }
  const double* cells(int ri) const { return smooth.data() + static_cast<std::size_t>(ri) * stride; }
};

class Worker {
 public:
  Worker(const SystemCatalogEntry& entry, const EnsembleSpec& spec) : entry_(entry), spec_(spec) {
    const auto support = enumerate_support(entry.input, spec.grid);
    if (const auto* finite = std::get_if<FinitePathSupport>(&support)) {
      finite_ = *finite;
      for (double p : finite_->probs) log_probs_.push_back(std::log(p));
    } else if (const auto* chain = std::get_if<MarkovChainSupport>(&support)) {
      chain_ = *chain;
      markov_cands_ = detail::markov_candidates(*chain, spec.grid);
    } else {
      if (!entry.system.awgn_form)
        throw UnsupportedInput("ensemble: GaussConstant input requires the pure AWGN form");
      gauss_variance_ = std::get<GaussConstant>(entry.input).variance;
    }
  }

  void compute(std::uint64_t m, ReplicateRecord& rec) const {
    rec.aborted = false;
    const int n_r = static_cast<int>(spec_.r_grid.size());
    try {
      if (spec_.common_noise) {
        const Path x = sample_input(entry_.input, spec_.grid, spec_.master_seed, m);
        const NoiseBundle noise = NoiseBundle::draw(spec_.grid, spec_.master_seed, m);
        for (int ri = 0; ri < n_r; ++ri) {
          const Path y = simulate_output(entry_.system, x, spec_.r_grid[ri], noise, spec_.grid);
          fill(ri, x, y, spec_.r_grid[ri], rec);
        }
      } else {
        for (int ri = 0; ri < n_r; ++ri) {
          const std::uint64_t slot = static_cast<std::uint64_t>(ri) + 1;
          const Path x = sample_input(entry_.input, spec_.grid, spec_.master_seed, m, slot);
          const NoiseBundle noise = NoiseBundle::draw(spec_.grid, spec_.master_seed, m, slot);
          const Path y = simulate_output(entry_.system, x, spec_.r_grid[ri], noise, spec_.grid);
          fill(ri, x, y, spec_.r_grid[ri], rec);
        }
      }
    } catch (const NonFiniteState&) {
      rec.aborted = true;
    }
  }

 private:
  void fill(int ri, const Path& x, const Path& y, double r, ReplicateRecord& rec) const {
    if (finite_)
      fill_finite(ri, x, y, r, rec);
    else if (chain_)
      fill_markov(ri, x, y, r, rec);
    else
      fill_gauss(ri, x, y, r, rec);
    finish_common(ri, r, rec);
  }

  void fill_finite(int ri, const Path& x, const Path& y, double r, ReplicateRecord& rec) const {
    const int np = rec.n_points;
    const int n = np - 1;
    const std::size_t a = finite_->paths.size();

    int match = -1;
    for (std::size_t i = 0; i < a; ++i)
      if (finite_->paths[i].values[0] == x.values[0]) match = static_cast<int>(i);
    if (match < 0) throw std::logic_error("ensemble: sampled input not in enumerated support");

    std::vector<double> phi_cand(a * np);
    for (std::size_t i = 0; i < a; ++i)
      for (int k = 0; k < np; ++k)
        phi_cand[i * np + k] = eval_phi(entry_.system, k, finite_->paths[i], y);

    const auto prefix = detail::candidate_prefix_logliks(entry_.system, finite_->paths, y, r, n);

    std::vector<double> w(static_cast<std::size_t>(np) * a);
    std::vector<double> logw(a);
    double* phi = rec.row(rec.phi, ri);
    double* cond = rec.row(rec.cond, ri);
    double* causal = rec.row(rec.causal_sq, ri);
    double* logrn = rec.row(rec.logrn, ri);
    for (int k = 0; k < np; ++k) {
      for (std::size_t i = 0; i < a; ++i) logw[i] = log_probs_[i] + prefix[k * a + i];
      detail::softmax_into(logw, std::span<double>(w).subspan(k * a, a));
      phi[k] = phi_cand[static_cast<std::size_t>(match) * np + k];
      double c = 0.0;
      for (std::size_t i = 0; i < a; ++i) c += w[k * a + i] * phi_cand[i * np + k];
      cond[k] = c;
      causal[k] = sq(phi[k] - c);
      // Marginal shifted by the realized candidate's prefix: cancels exactly
      // under a flat likelihood.
      const double lt = prefix[k * a + match];
      for (std::size_t i = 0; i < a; ++i) logw[i] = log_probs_[i] + (prefix[k * a + i] - lt);
      logrn[k] = -logsumexp(logw);
    }

    if (rec.mode == SmoothingMode::None) return;
    double* cells = rec.cells(ri);
    const auto fill_window = [&](int window, double* out_row) {
      const double* wk = w.data() + static_cast<std::size_t>(window) * a;
      for (int s = 0; s <= window; ++s) {
        double c = 0.0;
        for (std::size_t i = 0; i < a; ++i) c += wk[i] * phi_cand[i * np + s];
        out_row[s] = sq(phi[s] - c);
      }
    };
    if (rec.mode == SmoothingMode::AllWindows) {
      for (int window = 0; window <= n; ++window) fill_window(window, cells + tri_base(window));
    } else {
      fill_window(n, cells);
    }
  }

  void fill_markov(int ri, const Path& x, const Path& y, double r, ReplicateRecord& rec) const {
    const int np = rec.n_points;
    const int n = np - 1;

    std::array<std::vector<double>, 2> phi_cand;
    for (int i = 0; i < 2; ++i) {
      phi_cand[i].resize(np);
      for (int k = 0; k < np; ++k) phi_cand[i][k] = eval_phi(entry_.system, k, markov_cands_[i], y);
    }
    const auto fw = detail::hmm_forward(entry_.system, *chain_, markov_cands_, y, r, n);

    double* phi = rec.row(rec.phi, ri);
    double* cond = rec.row(rec.cond, ri);
    double* causal = rec.row(rec.causal_sq, ri);
    double* logrn = rec.row(rec.logrn, ri);
    double true_prefix = 0.0;
    for (int k = 0; k < np; ++k) {
      phi[k] = eval_phi(entry_.system, k, x, y);
      cond[k] = fw.pred[k][0] * phi_cand[0][k] + fw.pred[k][1] * phi_cand[1][k];
      causal[k] = sq(phi[k] - cond[k]);
      if (k > 0) {
        true_prefix += step_loglik(entry_.system, k - 1, x, y, r);
        logrn[k] = true_prefix - fw.log_marginal[k];
      }
    }

    if (rec.mode == SmoothingMode::None) return;
    double* cells = rec.cells(ri);
    std::vector<std::array<double, 2>> gamma(np);
    const auto fill_window = [&](int window, double* out_row) {
      detail::hmm_window_marginals(fw, *chain_, window, gamma.data());
      for (int s = 0; s <= window; ++s) {
        const double c = gamma[s][0] * phi_cand[0][s] + gamma[s][1] * phi_cand[1][s];
        out_row[s] = sq(phi[s] - c);
      }
    };
    if (rec.mode == SmoothingMode::AllWindows) {
      for (int window = 0; window <= n; ++window) fill_window(window, cells + tri_base(window));
    } else {
      fill_window(n, cells);
    }
  }

  void fill_gauss(int ri, const Path& x, const Path& y, double r, ReplicateRecord& rec) const {
    const int np = rec.n_points;
    const int n = np - 1;
    const double s2 = gauss_variance_;
    const double root_r = std::sqrt(r);
    const double xv = x.values[0];

    double* phi = rec.row(rec.phi, ri);
    double* cond = rec.row(rec.cond, ri);
    double* causal = rec.row(rec.causal_sq, ri);
    double* logrn = rec.row(rec.logrn, ri);
    for (int k = 0; k < np; ++k) {
      const double t = spec_.grid.time(k);
      const double denom = 1.0 + r * s2 * t;
      const double m = root_r * s2 * y.values[k] / denom;
      phi[k] = eval_phi(entry_.system, k, x, y);
      cond[k] = m;
      causal[k] = sq(phi[k] - m);
      if (k > 0) {
        const double yk = y.values[k];
        logrn[k] = root_r * xv * yk - r * xv * xv * t / 2.0 + 0.5 * std::log1p(r * s2 * t) -
                   r * s2 * yk * yk / (2.0 * (1.0 + r * s2 * t));
      }
    }

    if (rec.mode == SmoothingMode::None) return;
    double* cells = rec.cells(ri);
    // Constant input and sufficient statistic y(t_K): the window-K smoothed
    // error does not depend on s.
    if (rec.mode == SmoothingMode::AllWindows) {
      for (int window = 0; window <= n; ++window) {
        double* out_row = cells + tri_base(window);
        for (int s = 0; s <= window; ++s) out_row[s] = causal[window];
      }
    } else {
      for (int s = 0; s <= n; ++s) cells[s] = causal[n];
    }
  }

  // Quantities derived from the filled record: per-window time integrals,
  // the running Duncan integral, exp(-log_rn), and the inner integral of
  // the mixed-derivative identity.
  void finish_common(int ri, double /*r*/, ReplicateRecord& rec) const {
    const int np = rec.n_points;
    const int n = np - 1;
    const double dt = spec_.grid.dt();

    const double* causal = rec.row(rec.causal_sq, ri);
    const double* logrn = rec.row(rec.logrn, ri);
    double* prefix = rec.row(rec.causal_prefix, ri);
    double* expneg = rec.row(rec.expneg, ri);
    prefix[0] = 0.0;
    expneg[0] = std::exp(-logrn[0]);
    for (int k = 1; k < np; ++k) {
      prefix[k] = prefix[k - 1] + 0.5 * (causal[k - 1] + causal[k]) * dt;
      expneg[k] = std::exp(-logrn[k]);
    }

    if (rec.mode == SmoothingMode::None) return;
    double* sw = rec.row(rec.smooth_trapz, ri);
    const double* cells = rec.cells(ri);
    if (rec.mode == SmoothingMode::AllWindows) {
      for (int window = 0; window <= n; ++window)
        sw[window] = trapezoid(std::span<const double>(cells + tri_base(window),
                                                       static_cast<std::size_t>(window) + 1),
                               dt);
      // Inner integral of the mixed identity: int_0^t d/dt ncmmse(t, s) ds,
      // central stencils in the window index, one-sided at s = t.
      double* inner = rec.row(rec.cor3_inner, ri);
      std::vector<double> integrand(np);
      for (int k = 1; k < n; ++k) {
        const double* below = cells + tri_base(k - 1);
        const double* here = cells + tri_base(k);
        const double* above = cells + tri_base(k + 1);
        for (int s = 0; s < k; ++s) integrand[s] = (above[s] - below[s]) / (2.0 * dt);
        integrand[k] = (above[k] - here[k]) / dt;
        inner[k] = trapezoid(std::span<const double>(integrand.data(),
                                                     static_cast<std::size_t>(k) + 1),
                             dt);
      }
    } else {
      sw[n] = trapezoid(std::span<const double>(cells, static_cast<std::size_t>(np)), dt);
    }
  }

  const SystemCatalogEntry& entry_;
  const EnsembleSpec& spec_;
  std::optional<FinitePathSupport> finite_;
  std::vector<double> log_probs_;
  std::optional<MarkovChainSupport> chain_;
  std::array<Path, 2> markov_cands_{Path(TimeGrid(1.0, 1)), Path(TimeGrid(1.0, 1))};
  double gauss_variance_ = 1.0;
};

class Accumulator {
 public:
  Accumulator(const EnsembleSpec& spec, const EnsembleOptions& options)
      : spec_(spec), options_(options) {
    const int n_r = static_cast<int>(spec.r_grid.size());
    const int np = spec.grid.n_points();
    const std::size_t nk = static_cast<std::size_t>(n_r) * np;
    const std::size_t nc = static_cast<std::size_t>(n_r) * smooth_stride(np, options.smoothing);
    cm_sum_.assign(nk, 0.0);
    cm_sumsq_.assign(nk, 0.0);
    nc_sum_.assign(nc, 0.0);
    nc_sumsq_.assign(nc, 0.0);
    ii_sum_.assign(nk, 0.0);
    ii_sumsq_.assign(nk, 0.0);
    dunc_sum_.assign(nk, 0.0);
    dunc_sumsq_.assign(nk, 0.0);
    expneg_sum_.assign(nk, 0.0);
    expneg_sumsq_.assign(nk, 0.0);
    innov_sum_.assign(nk, 0.0);
    innov_sumsq_.assign(nk, 0.0);

    resid_.duncan.resize(n_r);
    resid_.gsv.resize(n_r);
    resid_.cor1.resize(n_r);
    resid_.d1_time.resize(nk);
    resid_.d1_snr.resize(nk);
    resid_.cor3.resize(nk);
    resid_.gsv_int_sum.assign(n_r, 0.0);
    resid_.gsv_int_sumsq.assign(n_r, 0.0);
    resid_.cross_r = spec.common_noise;
    resid_.r0_is_zero = !spec.r_grid.empty() && spec.r_grid.front() == 0.0;
  }

  void fold(const ReplicateRecord& rec) {
    if (rec.aborted) {
      ++n_aborted_;
      return;
    }
    ++n_eff_;
    const int n_r = static_cast<int>(spec_.r_grid.size());
    const int np = spec_.grid.n_points();
    const int n = np - 1;
    const double dt = spec_.grid.dt();
    const double horizon = spec_.grid.horizon();

    for (int ri = 0; ri < n_r; ++ri) {
      const double r = spec_.r_grid[ri];
      const std::size_t base = static_cast<std::size_t>(ri) * np;
      const double* causal = rec.row(rec.causal_sq, ri);
      const double* logrn = rec.row(rec.logrn, ri);
      const double* prefix = rec.row(rec.causal_prefix, ri);
      const double* expneg = rec.row(rec.expneg, ri);
      const double* phi = rec.row(rec.phi, ri);
      const double* cond = rec.row(rec.cond, ri);
      for (int k = 0; k < np; ++k) {
        const std::size_t i = base + k;
        cm_sum_[i] += causal[k];
        cm_sumsq_[i] += sq(causal[k]);
        ii_sum_[i] += logrn[k];
        ii_sumsq_[i] += sq(logrn[k]);
        const double dunc = 0.5 * r * prefix[k];
        dunc_sum_[i] += dunc;
        dunc_sumsq_[i] += sq(dunc);
        expneg_sum_[i] += expneg[k];
        expneg_sumsq_[i] += sq(expneg[k]);
        const double innov = phi[k] - cond[k];
        innov_sum_[i] += innov;
        innov_sumsq_[i] += sq(innov);
      }
      if (rec.stride > 0) {
        const double* cells = rec.cells(ri);
        const std::size_t cbase = static_cast<std::size_t>(ri) * rec.stride;
        for (std::size_t c = 0; c < rec.stride; ++c) {
          nc_sum_[cbase + c] += cells[c];
          nc_sumsq_[cbase + c] += sq(cells[c]);
        }
      }

      // Duncan residual: log-RN mean at T against (r/2) * time integral.
      add(resid_.duncan[ri], logrn[n], 0.5 * r * prefix[n]);

      // Instantaneous time identity at interior grid points.
      for (int k = 1; k < n; ++k) {
        const double lhs = (logrn[k + 1] - logrn[k - 1]) / (2.0 * dt);
        add(resid_.d1_time[base + k], lhs, 0.5 * r * causal[k]);
      }
    }

    if (rec.stride == 0) return;
    const bool all_windows = rec.mode == SmoothingMode::AllWindows;

    // Cross-r families. Per-replicate differences are unbiased with or
    // without common noise; common noise just makes them far less variable.
    for (int ri = 1; ri + 1 < n_r; ++ri) {
      const double dr2 = spec_.r_grid[ri + 1] - spec_.r_grid[ri - 1];
      const double* lo = rec.row(rec.logrn, ri - 1);
      const double* hi = rec.row(rec.logrn, ri + 1);
      const double* sw = rec.row(rec.smooth_trapz, ri);
      add(resid_.gsv[ri], (hi[n] - lo[n]) / dr2, 0.5 * sw[n]);

      const std::size_t base = static_cast<std::size_t>(ri) * np;
      if (all_windows) {
        for (int k = 0; k < np; ++k)
          add(resid_.d1_snr[base + k], (hi[k] - lo[k]) / dr2, 0.5 * sw[k]);
        const double* clo = rec.row(rec.causal_sq, ri - 1);
        const double* chi = rec.row(rec.causal_sq, ri + 1);
        const double* inner = rec.row(rec.cor3_inner, ri);
        const double r = spec_.r_grid[ri];
        for (int k = 1; k < n; ++k)
          add(resid_.cor3[base + k], r * (chi[k] - clo[k]) / dr2, inner[k]);
      } else {
        add(resid_.d1_snr[base + n], (hi[n] - lo[n]) / dr2, 0.5 * sw[n]);
      }
    }

    if (resid_.r0_is_zero) {
      // Averaged-over-r identity and the integrated-GSV estimator need the
      // time-integrated smoothed error at every u in [0, r].
      std::vector<double> swn(n_r);
      for (int ri = 0; ri < n_r; ++ri) swn[ri] = rec.row(rec.smooth_trapz, ri)[n];
      for (int ri = 0; ri < n_r; ++ri) {
        const double r = spec_.r_grid[ri];
        const double g =
            0.5 * trapezoid_nonuniform(std::span<const double>(spec_.r_grid.data(), ri + 1),
                                       std::span<const double>(swn.data(), ri + 1));
        resid_.gsv_int_sum[ri] += g;
        resid_.gsv_int_sumsq[ri] += sq(g);
        if (r > 0.0) {
          const double lhs = rec.row(rec.causal_prefix, ri)[n] / horizon;
          const double rhs = 2.0 * g / (r * horizon);
          add(resid_.cor1[ri], lhs, rhs);
        }
      }
    }
  }

  EnsembleResult finalize(const SystemCatalogEntry& entry, double wall_seconds) const {
    if (n_eff_ == 0)
      throw TooFewReplicates("ensemble: all " + std::to_string(n_aborted_) +
                             " replicates aborted");
    (void)entry;
    EnsembleResult result;
    result.spec = spec_;

    const int n_r = static_cast<int>(spec_.r_grid.size());
    const int np = spec_.grid.n_points();
    const long n = n_eff_;

    MmseSurface& s = result.surface;
    s.grid = spec_.grid;
    s.r_grid = spec_.r_grid;
    s.smoothing = options_.smoothing;
    s.n_effective = n_eff_;
    s.n_aborted = n_aborted_;
    s.cmmse.resize(cm_sum_.size());
    s.cmmse_se.resize(cm_sum_.size());
    for (std::size_t i = 0; i < cm_sum_.size(); ++i) {
      s.cmmse[i] = mean_of(cm_sum_[i], n);
      s.cmmse_se[i] = se_of(cm_sum_[i], cm_sumsq_[i], n);
    }
    s.ncmmse.resize(nc_sum_.size());
    s.ncmmse_se.resize(nc_sum_.size());
    for (std::size_t i = 0; i < nc_sum_.size(); ++i) {
      s.ncmmse[i] = mean_of(nc_sum_[i], n);
      s.ncmmse_se[i] = se_of(nc_sum_[i], nc_sumsq_[i], n);
    }

    InfoCurve& info = result.info;
    info.grid = spec_.grid;
    info.r_grid = spec_.r_grid;
    info.ii_direct.resize(ii_sum_.size());
    info.ii_direct_se.resize(ii_sum_.size());
    info.ii_duncan.resize(ii_sum_.size());
    info.ii_duncan_se.resize(ii_sum_.size());
    for (std::size_t i = 0; i < ii_sum_.size(); ++i) {
      info.ii_direct[i] = mean_of(ii_sum_[i], n);
      info.ii_direct_se[i] = se_of(ii_sum_[i], ii_sumsq_[i], n);
      info.ii_duncan_se[i] = se_of(dunc_sum_[i], dunc_sumsq_[i], n);
    }
    for (int ri = 0; ri < n_r; ++ri)
      for (int k = 0; k < np; ++k)
        info.ii_duncan[static_cast<std::size_t>(ri) * np + k] =
            instantaneous_info(s, k, spec_.r_grid[ri]);
    info.i_gsv.assign(n_r, std::numeric_limits<double>::quiet_NaN());
    info.i_gsv_se.assign(n_r, std::numeric_limits<double>::quiet_NaN());

    EnsembleDiagnostics& d = result.diag;
    d.expneg_mean.resize(expneg_sum_.size());
    d.expneg_se.resize(expneg_sum_.size());
    d.innov_mean.resize(innov_sum_.size());
    d.innov_se.resize(innov_sum_.size());
    for (std::size_t i = 0; i < expneg_sum_.size(); ++i) {
      d.expneg_mean[i] = mean_of(expneg_sum_[i], n);
      d.expneg_se[i] = se_of(expneg_sum_[i], expneg_sumsq_[i], n);
      d.innov_mean[i] = mean_of(innov_sum_[i], n);
      d.innov_se[i] = se_of(innov_sum_[i], innov_sumsq_[i], n);
    }
    d.wall_seconds = wall_seconds;

    result.resid = resid_;
    return result;
  }

 private:
  static void add(TwoSidedAccum& acc, double lhs, double rhs) {
    acc.lhs_sum += lhs;
    acc.rhs_sum += rhs;
    const double diff = lhs - rhs;
    acc.d_sum += diff;
    acc.d_sumsq += sq(diff);
  }

  const EnsembleSpec& spec_;
  const EnsembleOptions& options_;
  long n_eff_ = 0;
  long n_aborted_ = 0;
  std::vector<double> cm_sum_, cm_sumsq_, nc_sum_, nc_sumsq_, ii_sum_, ii_sumsq_, dunc_sum_,
      dunc_sumsq_, expneg_sum_, expneg_sumsq_, innov_sum_, innov_sumsq_;
  ResidualAccums resid_;
};

void validate_spec(const SystemCatalogEntry& entry, const EnsembleSpec& spec) {
  if (spec.system_id != entry.id)
    throw std::invalid_argument("ensemble: spec system_id does not match the catalog entry");
  if (spec.n_replicates < 2) throw std::invalid_argument("ensemble: n_replicates must be >= 2");
  if (spec.r_grid.empty()) throw std::invalid_argument("ensemble: r_grid must be non-empty");
  for (std::size_t i = 0; i < spec.r_grid.size(); ++i) {
    if (!(spec.r_grid[i] >= 0.0)) throw std::invalid_argument("ensemble: r values must be >= 0");
    if (i > 0 && !(spec.r_grid[i] > spec.r_grid[i - 1]))
      throw std::invalid_argument("ensemble: r_grid must be strictly ascending");
  }
}

}  // namespace

int MmseSurface::r_index(double r) const {
  for (std::size_t i = 0; i < r_grid.size(); ++i)
    if (r_grid[i] == r) return static_cast<int>(i);
  throw std::invalid_argument("surface does not cover r = " + std::to_string(r));
}

bool MmseSurface::has_window(int k) const {
  switch (smoothing) {
    case SmoothingMode::AllWindows: return k >= 0 && k < n_points();
    case SmoothingMode::FinalWindow: return k == grid.n_steps();
    case SmoothingMode::None: return false;
  }
  return false;
}

double MmseSurface::ncmmse_at(int ri, int k, int j) const {
  const std::size_t stride = smooth_stride(n_points(), smoothing);
  if (!has_window(k) || j < 0 || j > k) throw std::invalid_argument("ncmmse cell not computed");
  const std::size_t off = smoothing == SmoothingMode::AllWindows
                              ? tri_base(k) + j
                              : static_cast<std::size_t>(j);
  return ncmmse[static_cast<std::size_t>(ri) * stride + off];
}

double MmseSurface::ncmmse_se_at(int ri, int k, int j) const {
  const std::size_t stride = smooth_stride(n_points(), smoothing);
  if (!has_window(k) || j < 0 || j > k) throw std::invalid_argument("ncmmse cell not computed");
  const std::size_t off = smoothing == SmoothingMode::AllWindows
                              ? tri_base(k) + j
                              : static_cast<std::size_t>(j);
  return ncmmse_se[static_cast<std::size_t>(ri) * stride + off];
}

EnsembleResult run_ensemble(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                            const EnsembleOptions& options) {
  validate_spec(entry, spec);
  const auto t0 = std::chrono::steady_clock::now();

  const Worker worker(entry, spec);
  Accumulator accum(spec, options);

  const int n_r = static_cast<int>(spec.r_grid.size());
  const int block = std::max(1, options.block_size);
  std::vector<ReplicateRecord> records(block);
  for (auto& rec : records) rec.allocate(n_r, spec.grid.n_points(), options.smoothing);
  std::vector<std::exception_ptr> errors(block);

  for (int start = 0; start < spec.n_replicates; start += block) {
    const int count = std::min(block, spec.n_replicates - start);
    if (options.execution == Execution::OpenMp) {
#pragma omp parallel for schedule(dynamic)
      for (int b = 0; b < count; ++b) {
        try {
          worker.compute(static_cast<std::uint64_t>(start + b), records[b]);
          errors[b] = nullptr;
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    } else {
      for (int b = 0; b < count; ++b) {
        try {
          worker.compute(static_cast<std::uint64_t>(start + b), records[b]);
          errors[b] = nullptr;
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    }
    for (int b = 0; b < count; ++b)
      if (errors[b]) std::rethrow_exception(errors[b]);
    // Reduction strictly in replicate order: ensemble statistics do not
    // depend on the parallel schedule.
    for (int b = 0; b < count; ++b) accum.fold(records[b]);
  }

  const auto t1 = std::chrono::steady_clock::now();
  return accum.finalize(entry, std::chrono::duration<double>(t1 - t0).count());
}

MmseSurface estimate_mmse_surface(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                                  const EnsembleOptions& options) {
  return run_ensemble(entry, spec, options).surface;
}

double instantaneous_info(const MmseSurface& surface, int t_index, double r) {
  if (t_index < 0 || t_index >= surface.n_points())
    throw std::invalid_argument("instantaneous_info: t_index out of range");
  const int ri = surface.r_index(r);
  const double dt = surface.grid.dt();
  double acc = 0.0;
  for (int k = 0; k < t_index; ++k)
    acc += 0.5 * (surface.cmmse_at(ri, k) + surface.cmmse_at(ri, k + 1)) * dt;
  return 0.5 * r * acc;
}

double mi_duncan(const MmseSurface& surface, double r) {
  return instantaneous_info(surface, surface.grid.n_steps(), r);
}

MiEstimate mi_direct(const InfoCurve& info, double r) {
  for (std::size_t ri = 0; ri < info.r_grid.size(); ++ri)
    if (info.r_grid[ri] == r)
      return {info.i_direct(static_cast<int>(ri)), info.i_direct_se(static_cast<int>(ri))};
  throw std::invalid_argument("info curve does not cover r = " + std::to_string(r));
}

MiEstimate mi_direct(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                     const EnsembleOptions& options) {
  EnsembleOptions opts = options;
  opts.smoothing = SmoothingMode::None;  // the direct route needs no smoothing
  const auto result = run_ensemble(entry, spec, opts);
  if (spec.r_grid.size() != 1)
    throw std::invalid_argument("mi_direct convenience overload expects a single r");
  return mi_direct(result.info, spec.r_grid.front());
}

double mi_gsv(const MmseSurface& surface, double r, const SnrClassReport& verdict) {
  if (verdict.verdict != SnrClass::StrongSnr)
    throw NotStrongSnr("mi_gsv: the integrated-GSV route is asserted only for StrongSnr systems");
  if (surface.smoothing == SmoothingMode::None)
    throw std::invalid_argument("mi_gsv: surface carries no smoothing data");
  if (surface.r_grid.front() != 0.0)
    throw std::invalid_argument("mi_gsv: r_grid must start at 0 to integrate over [0, r]");
  const int ri = surface.r_index(r);
  const int n = surface.grid.n_steps();
  const double dt = surface.grid.dt();

  std::vector<double> g(ri + 1);
  std::vector<double> row(surface.n_points());
  for (int u = 0; u <= ri; ++u) {
    for (int j = 0; j <= n; ++j) row[j] = surface.ncmmse_at(u, n, j);
    g[u] = trapezoid(row, dt);
  }
  return 0.5 * trapezoid_nonuniform(std::span<const double>(surface.r_grid.data(), ri + 1),
                                    std::span<const double>(g.data(), ri + 1));
}

void attach_gsv(EnsembleResult& result, const SnrClassReport& verdict) {
  if (verdict.verdict != SnrClass::StrongSnr) return;
  if (result.surface.smoothing == SmoothingMode::None) return;
  if (!result.resid.r0_is_zero) return;
  const int n_r = static_cast<int>(result.spec.r_grid.size());
  for (int ri = 0; ri < n_r; ++ri) {
    result.info.i_gsv[ri] = mi_gsv(result.surface, result.spec.r_grid[ri], verdict);
    result.info.i_gsv_se[ri] =
        se_of(result.resid.gsv_int_sum[ri], result.resid.gsv_int_sumsq[ri],
              result.surface.n_effective);
  }
  result.info.gsv_available = true;
}

namespace {

ResidualEntry make_entry(const std::string& family, double r, std::optional<double> t,
                         const TwoSidedAccum& acc, long n, const ResidualTolerance& tol,
                         bool diagnostic) {
  ResidualEntry e;
  e.family = family;
  e.r = r;
  e.t = t;
  e.lhs = mean_of(acc.lhs_sum, n);
  e.rhs = mean_of(acc.rhs_sum, n);
  e.residual = std::abs(mean_of(acc.d_sum, n));
  e.se = se_of(acc.d_sum, acc.d_sumsq, n);
  e.tolerance = std::max(tol.absolute, tol.se_multiplier * e.se);
  e.pass = e.residual <= e.tolerance;
  e.diagnostic = diagnostic;
  return e;
}

}  // namespace

const ResidualEntry* IdentityResidualReport::worst(const std::string& family) const {
  const ResidualEntry* out = nullptr;
  for (const auto& e : entries)
    if (e.family == family && (!out || e.residual - e.tolerance > out->residual - out->tolerance))
      out = &e;
  return out;
}

IdentityResidualReport identity_residuals(const EnsembleResult& result,
                                          const SnrClassReport& verdict,
                                          const ResidualTolerance& tol) {
  IdentityResidualReport report;
  const auto& spec = result.spec;
  const int n_r = static_cast<int>(spec.r_grid.size());
  const int np = spec.grid.n_points();
  const int n = np - 1;
  const long m = result.surface.n_effective;
  const bool strong = verdict.verdict == SnrClass::StrongSnr;
  const bool smoothed = result.surface.smoothing != SmoothingMode::None;
  const bool all_windows = result.surface.smoothing == SmoothingMode::AllWindows;

  for (int ri = 0; ri < n_r; ++ri)
    report.entries.push_back(make_entry("duncan", spec.r_grid[ri], std::nullopt,
                                        result.resid.duncan[ri], m, tol, false));

  for (int ri = 0; ri < n_r; ++ri)
    for (int k = 1; k < n; ++k)
      report.entries.push_back(make_entry("d1_time", spec.r_grid[ri], spec.grid.time(k),
                                          result.resid.d1_time[static_cast<std::size_t>(ri) * np + k],
                                          m, tol, false));

  if (!smoothed) {
    report.skipped.push_back("gsv: smoothing disabled");
    report.skipped.push_back("cor1: smoothing disabled");
    report.skipped.push_back("d1_snr: smoothing disabled");
    report.skipped.push_back("cor3_mixed: smoothing disabled");
  } else {
    if (n_r < 3) {
      report.skipped.push_back("gsv: needs at least 3 r values");
      report.skipped.push_back("d1_snr: needs at least 3 r values");
      report.skipped.push_back("cor3_mixed: needs at least 3 r values");
    } else {
      for (int ri = 1; ri + 1 < n_r; ++ri)
        report.entries.push_back(make_entry("gsv", spec.r_grid[ri], std::nullopt,
                                            result.resid.gsv[ri], m, tol, !strong));
      for (int ri = 1; ri + 1 < n_r; ++ri) {
        if (all_windows) {
          for (int k = 0; k < np; ++k)
            report.entries.push_back(
                make_entry("d1_snr", spec.r_grid[ri], spec.grid.time(k),
                           result.resid.d1_snr[static_cast<std::size_t>(ri) * np + k], m, tol,
                           !strong));
        } else {
          report.entries.push_back(
              make_entry("d1_snr", spec.r_grid[ri], spec.grid.horizon(),
                         result.resid.d1_snr[static_cast<std::size_t>(ri) * np + n], m, tol,
                         !strong));
        }
      }
      if (all_windows) {
        for (int ri = 1; ri + 1 < n_r; ++ri)
          for (int k = 1; k < n; ++k)
            report.entries.push_back(
                make_entry("cor3_mixed", spec.r_grid[ri], spec.grid.time(k),
                           result.resid.cor3[static_cast<std::size_t>(ri) * np + k], m, tol,
                           !strong));
      } else {
        report.skipped.push_back("cor3_mixed: needs the full smoothing tensor");
      }
    }
    if (!result.resid.r0_is_zero) {
      report.skipped.push_back("cor1: r_grid must start at 0");
    } else {
      for (int ri = 0; ri < n_r; ++ri)
        if (spec.r_grid[ri] > 0.0)
          report.entries.push_back(make_entry("cor1", spec.r_grid[ri], std::nullopt,
                                              result.resid.cor1[ri], m, tol, !strong));
    }
  }

  report.all_applicable_pass = true;
  for (const auto& e : report.entries)
    if (!e.diagnostic && !e.pass) report.all_applicable_pass = false;
  return report;
}

}  // namespace sdemi
