#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "proxama/fista.hpp"
#include "proxama/linop.hpp"
#include "proxama/prox.hpp"
#include "proxama/types.hpp"

namespace proxama {

/// min f(x) + h1(x) + g(z) + h2(z)  s.t.  Ax + Bz = b
///
/// f is strongly convex, h1/h2 are smooth. `f_argmin_linear(w)` returns
/// argmin_x f(x) - <w, x> when the problem can provide it in closed form.
struct TwoBlockProblem {
  ProxFn f;
  ProxFn h1;
  ProxFn g;
  ProxFn h2;
  LinearMap A;
  LinearMap B;
  Vec b;
  std::function<Vec(const Vec&)> f_argmin_linear;
  /// Operator norms; filled by prepare() when unset.
  std::optional<double> a_norm;
  std::optional<double> b_norm;
};

/// Fills in missing operator norms and checks dimensions. Throws
/// DimensionError / ArgumentError on malformed problems.
void prepare(TwoBlockProblem& problem);

/// A constant schedule k -> value.
std::function<double(long)> constant_schedule(double value);

// Metrics ---------------------------------------------------------------------

enum class MetricKind { zero, scaled_identity, induced, dense, custom_solve };

std::string to_string(MetricKind kind);

struct IterateState {
  Vec x;
  Vec z;
  Vec p;
  long k = 0;
};

/// argmin_x f(x) - <w, x> + 1/2 |x - x_k|^2_{M^k}, with (x_k, p_k, k) from `state`.
using XSolveHook = std::function<Vec(const IterateState& state, const Vec& w)>;

/// argmin_z g(z) - <w, z> + c/2 |Bz - r|^2 + 1/2 |z - z_k|^2_{M^k}
using ZSolveHook =
    std::function<Vec(const IterateState& state, const Vec& w, const Vec& r, double c)>;

/// Sequence of positive semidefinite proximal metrics M^k.
///
/// The structured kinds are checked analytically; dense metrics by
/// factorization. The induced kind is (1/sigma_k) Id - c_k B*B and only makes
/// sense for the z-block. Solve hooks, when present, replace the default
/// subproblem route for their block.
struct MetricRule {
  MetricKind kind = MetricKind::zero;
  std::function<double(long)> parameter;           // alpha_k or sigma_k
  std::function<Mat(long)> matrix;                 // dense
  std::function<Vec(long, const Vec&)> custom_apply;  // custom_solve, optional
  XSolveHook x_solve;
  ZSolveHook z_solve;
  /// Schedule does not depend on k; validation checks k = 0 only.
  bool stationary = false;

  static MetricRule zero();
  static MetricRule scaled_identity(std::function<double(long)> alpha);
  static MetricRule induced(std::function<double(long)> sigma);
  static MetricRule dense(std::function<Mat(long)> matrix);
  static MetricRule custom(std::function<Vec(long, const Vec&)> apply = {});

  MetricRule& with_x_solve(XSolveHook hook);
  MetricRule& with_z_solve(ZSolveHook hook);

  /// M^k v. The induced kind needs c_k and B; custom needs custom_apply.
  Vec apply(long k, const Vec& v, double c_k, const LinearMap* B) const;
  bool can_apply() const;
};

// Configuration and state -------------------------------------------------------

struct SolverConfig {
  std::function<double(long)> stepsize = constant_schedule(1.0);
  double epsilon = 1e-9;
  long max_iter = 1000;
  double feasibility_tol = 1e-8;
  FistaSettings inner;
  std::uint64_t seed = 42;
  /// Store every iterate in the RunRecord.
  bool keep_iterates = false;
};

/// All-zero starting point matching the problem's dimensions.
IterateState zero_state(const TwoBlockProblem& problem);

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  double a_norm = 0.0;
  double b_norm = 0.0;
  double gamma = 0.0;
  bool assumption_i = false;
  /// "certified", "not certified" or "not checked"
  std::string assumption_ii = "not checked";
  bool z_step_unique = false;

  std::string summary() const;
  /// Throws ConfigError naming every violated constraint.
  void throw_if_invalid() const;
};

ValidationReport validate(const TwoBlockProblem& problem, const SolverConfig& config,
                          const MetricRule& m1, const MetricRule& m2);

// Steps -------------------------------------------------------------------------

/// Generic z-subproblem solve by inner FISTA warm-started at z_k:
/// argmin g(z) - <w, z> + c/2 |Bz - r|^2 + 1/2 |z - z_k|^2_M  (M omitted when null).
Vec solve_z_subproblem(const TwoBlockProblem& problem, const Vec& z_k, const Vec& w, const Vec& r,
                       double c, const std::function<Vec(const Vec&)>& metric, double metric_norm,
                       const FistaSettings& inner);

/// One iteration of Tseng's AMA. Requires h1 = h2 = 0.
IterateState ama_step(const TwoBlockProblem& problem, const IterateState& state, double c_k,
                      const FistaSettings& inner);

/// One iteration of Proximal AMA with metrics M1^k, M2^k (k = state.k).
IterateState proximal_ama_step(const TwoBlockProblem& problem, const IterateState& state,
                               double c_k, const MetricRule& m1, const MetricRule& m2,
                               const FistaSettings& inner);

/// z-update of Proximal AMA through the generic inner solver, whatever the
/// metric kind. Used to cross-check the closed-form prox route.
Vec proximal_ama_z_generic(const TwoBlockProblem& problem, const IterateState& state,
                           const Vec& x_next, double c_k, const MetricRule& m2,
                           const FistaSettings& inner);

// Diagnostics -------------------------------------------------------------------

struct KktResiduals {
  double r_f = 0.0;
  double r_g = 0.0;
  double r_feas = 0.0;
  double max() const;
};

KktResiduals kkt_residuals(const TwoBlockProblem& problem, const IterateState& state);

struct LyapunovDiagnostics {
  /// |p - p*|^2 + c |z - z*|^2_{M2} at k and k+1.
  double v_k = 0.0;
  double v_next = 0.0;
  /// c |x - x*|^2_{M1} at k and k+1. Zero when M1 = 0; needed for the
  /// decrease to hold once M1 is nonzero.
  double x_term_k = 0.0;
  double x_term_next = 0.0;
  std::vector<std::string> summand_names;
  std::vector<double> summands;

  double total_k() const { return v_k + x_term_k; }
  double total_next() const { return v_next + x_term_next; }
  double r_sum() const;
};

LyapunovDiagnostics lyapunov_diagnostics(const TwoBlockProblem& problem,
                                         const IterateState& state_k,
                                         const IterateState& state_next,
                                         const IterateState& saddle, double c_k, double c_next,
                                         const MetricRule& m1, const MetricRule& m2);

// Driver ------------------------------------------------------------------------

enum class Algorithm { ama, proximal_ama };
enum class RunStatus { converged, max_iter, invalid_config };

std::string to_string(Algorithm algorithm);
std::string to_string(RunStatus status);

struct TraceRow {
  long iter = 0;
  double elapsed_s = 0.0;
  double objective_primal = 0.0;
  std::optional<double> objective_dual;
  double feasibility = 0.0;
  double kkt_f = 0.0;
  double kkt_g = 0.0;
  std::optional<double> metric;
  std::optional<double> lyapunov;
  std::vector<double> r_summands;
};

struct RunRecord {
  std::vector<TraceRow> rows;
  std::vector<IterateState> iterates;  // only with keep_iterates
  IterateState final_state;
  RunStatus status = RunStatus::max_iter;
  ValidationReport validation;
  std::vector<std::string> flags;
};

struct SolveCallbacks {
  /// Called once per recorded row, after the solver has filled it.
  std::function<void(const IterateState&, TraceRow&)> on_row;
  /// Known saddle point; enables the Lyapunov columns.
  std::optional<IterateState> saddle;
};

RunRecord solve(const TwoBlockProblem& problem, const SolverConfig& config, const MetricRule& m1,
                const MetricRule& m2, Algorithm algorithm, const SolveCallbacks& callbacks = {},
                std::optional<IterateState> start = std::nullopt);

}  // namespace proxama
