#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdemi/classify.hpp"
#include "sdemi/grid.hpp"
#include "sdemi/inputs.hpp"

namespace sdemi {

// Outer Monte Carlo ensembles: CMMSE/NCMMSE surfaces, the three mutual
// information estimators, and per-replicate residual statistics for every
// identity. Replicates are computed in parallel (OpenMP) or serially; the
// two paths are bitwise identical because records are always folded into the
// accumulators in replicate-index order.

enum class Execution { Serial, OpenMp };

// How much of the smoothing tensor to compute. AllWindows is the full
// ncmmse(t, s, r) tensor on s <= t; FinalWindow keeps only the t = T row;
// None skips smoothing entirely (causal quantities and log-RN curves only).
enum class SmoothingMode { None, FinalWindow, AllWindows };

struct EnsembleSpec {
  std::string system_id;
  int n_replicates = 0;
  std::uint64_t master_seed = 0;
  TimeGrid grid{1.0, 1};
  std::vector<double> r_grid;
  bool common_noise = true;  // share (X, W) draws across r values
};

struct EnsembleOptions {
  Execution execution = Execution::OpenMp;
  SmoothingMode smoothing = SmoothingMode::AllWindows;
  int block_size = 32;  // replicates per parallel block
};

struct MmseSurface {
  TimeGrid grid{1.0, 1};
  std::vector<double> r_grid;
  SmoothingMode smoothing = SmoothingMode::AllWindows;
  long n_effective = 0;
  long n_aborted = 0;

  // cmmse and its standard error, indexed [ri * n_points + k].
  std::vector<double> cmmse, cmmse_se;
  // ncmmse tensor: AllWindows stores the lower triangle (k, j <= k) per r;
  // FinalWindow stores the single row k = N per r.
  std::vector<double> ncmmse, ncmmse_se;

  int n_points() const { return grid.n_points(); }
  int r_index(double r) const;
  bool has_window(int k) const;
  double cmmse_at(int ri, int k) const { return cmmse[ri * n_points() + k]; }
  double cmmse_se_at(int ri, int k) const { return cmmse_se[ri * n_points() + k]; }
  double ncmmse_at(int ri, int k, int j) const;
  double ncmmse_se_at(int ri, int k, int j) const;
};

struct InfoCurve {
  TimeGrid grid{1.0, 1};
  std::vector<double> r_grid;
  // Instantaneous information per estimator, indexed [ri * n_points + k].
  std::vector<double> ii_direct, ii_direct_se;
  std::vector<double> ii_duncan, ii_duncan_se;
  // Integrated-GSV estimate per r; filled by attach_gsv once a StrongSnr
  // verdict is available.
  std::vector<double> i_gsv, i_gsv_se;
  bool gsv_available = false;

  int n_points() const { return grid.n_points(); }
  double i_direct(int ri) const { return ii_direct[ri * n_points() + grid.n_steps()]; }
  double i_direct_se(int ri) const { return ii_direct_se[ri * n_points() + grid.n_steps()]; }
  double i_duncan(int ri) const { return ii_duncan[ri * n_points() + grid.n_steps()]; }
};

struct EnsembleDiagnostics {
  // Martingale normalization: mean and SE of exp(-log_rn(t_k)) per (ri, k).
  std::vector<double> expneg_mean, expneg_se;
  // Tower check: mean and SE of phi - E[phi | F_t] per (ri, k).
  std::vector<double> innov_mean, innov_se;
  double wall_seconds = 0.0;
};

// Raw two-sided accumulators for identity residuals (per-replicate lhs, rhs
// and their difference).
struct TwoSidedAccum {
  double lhs_sum = 0.0, rhs_sum = 0.0, d_sum = 0.0, d_sumsq = 0.0;
};

struct ResidualAccums {
  std::vector<TwoSidedAccum> duncan;   // per ri
  std::vector<TwoSidedAccum> gsv;      // per ri, interior only
  std::vector<TwoSidedAccum> cor1;     // per ri with r > 0 (needs r_grid[0] == 0)
  std::vector<TwoSidedAccum> d1_time;  // [ri * n_points + k], interior k
  std::vector<TwoSidedAccum> d1_snr;   // [ri * n_points + k], interior ri
  std::vector<TwoSidedAccum> cor3;     // [ri * n_points + k], interior ri and k
  std::vector<double> gsv_int_sum, gsv_int_sumsq;  // per-replicate integrated GSV, per ri
  bool cross_r = false;  // cross-r statistics valid (common noise, >= 3 r values)
  bool r0_is_zero = false;
};

struct EnsembleResult {
  EnsembleSpec spec;
  MmseSurface surface;
  InfoCurve info;
  EnsembleDiagnostics diag;
  ResidualAccums resid;
};

EnsembleResult run_ensemble(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                            const EnsembleOptions& options = {});

MmseSurface estimate_mmse_surface(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                                  const EnsembleOptions& options = {});

// Duncan route: (r / 2) * trapezoid of cmmse(., r) over [0, T].
double mi_duncan(const MmseSurface& surface, double r);

// Partial Duncan integral up to t_k; instantaneous_info(surface, N, r) and
// mi_duncan(surface, r) are the same sum.
double instantaneous_info(const MmseSurface& surface, int t_index, double r);

struct MiEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Direct route: ensemble mean of the log Radon-Nikodym derivative at T.
MiEstimate mi_direct(const InfoCurve& info, double r);
MiEstimate mi_direct(const SystemCatalogEntry& entry, const EnsembleSpec& spec,
                     const EnsembleOptions& options = {});

// Integrated-GSV route: (1/2) * trapezoid in u over [0, r] of the
// time-integrated ncmmse. Requires a StrongSnr verdict and r_grid starting
// at 0; throws NotStrongSnr otherwise.
double mi_gsv(const MmseSurface& surface, double r, const SnrClassReport& verdict);

// Fills info.i_gsv for every reachable r when the verdict allows it.
void attach_gsv(EnsembleResult& result, const SnrClassReport& verdict);

struct ResidualTolerance {
  double absolute = 0.01;
  double se_multiplier = 3.0;
};

struct ResidualEntry {
  std::string family;
  double r = 0.0;
  std::optional<double> t;
  double lhs = 0.0, rhs = 0.0, residual = 0.0, se = 0.0, tolerance = 0.0;
  bool pass = true;
  bool diagnostic = false;  // reported but excluded from pass/fail
};

struct IdentityResidualReport {
  std::vector<ResidualEntry> entries;
  std::vector<std::string> skipped;  // "family: reason"
  bool all_applicable_pass = true;

  const ResidualEntry* worst(const std::string& family) const;
};

IdentityResidualReport identity_residuals(const EnsembleResult& result,
                                          const SnrClassReport& verdict,
                                          const ResidualTolerance& tol = {});

}  // namespace sdemi
