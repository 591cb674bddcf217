#include "proxama/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "proxama/errors.hpp"

namespace proxama {

namespace {

double norm_of_a(const TwoBlockProblem& problem) {
  return problem.a_norm ? *problem.a_norm : operator_norm(problem.A);
}

double norm_of_b(const TwoBlockProblem& problem) {
  return problem.b_norm ? *problem.b_norm : operator_norm(problem.B);
}

void require_finite(const IterateState& s, long iteration) {
  if (!s.x.allFinite() || !s.z.allFinite() || !s.p.allFinite()) {
    throw NumericalError("non-finite iterate", iteration);
  }
}

// |v|^2_M for the metric at iteration k.
double metric_sq(const MetricRule& rule, long k, const Vec& v, double c_k, const LinearMap& B) {
  if (rule.kind == MetricKind::zero) return 0.0;
  return v.dot(rule.apply(k, v, c_k, &B));
}

// Spectral norm of a symmetric matrix.
double symmetric_norm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double symmetric_min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Positive semidefiniteness by LDLT with pivot tolerance.
bool is_psd(const Mat& m, double pivot_tol = 1e-12) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::LDLT<Mat> ldlt(0.5 * (m + m.transpose()));
  if (ldlt.info() != Eigen::Success) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return ldlt.vectorD().minCoeff() >= -pivot_tol * scale;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Lower bound (over k) of the smallest eigenvalue of M^k - (L/2) Id, when the
// metric kind allows computing it. Records violations in the report.
std::optional<double> check_metric(const MetricRule& rule, double lipschitz, bool z_block,
                                   const SolverConfig& config, double b_norm,
                                   ValidationReport& report) {
  const std::string name = z_block ? "M2" : "M1";
  const std::string half_l = "(" + fmt(lipschitz) + "/2) Id";
  switch (rule.kind) {
    case MetricKind::zero:
      if (lipschitz > 0.0) {
        report.violations.push_back(name + "^k - " + half_l +
                                    " is not positive semidefinite: zero metric needs L = 0");
      }
      return -0.5 * lipschitz;

    case MetricKind::scaled_identity: {
      if (!rule.parameter) throw ArgumentError("scaled_identity metric without schedule");
      double lower = kInfinity;
      const long last = rule.stationary ? 0 : config.max_iter;
      for (long k = 0; k <= last; ++k) {
        const double a = rule.parameter(k);
        lower = std::min(lower, a - 0.5 * lipschitz);
        if (a - 0.5 * lipschitz < 0.0) {
          report.violations.push_back(name + "^k - " + half_l + " >= 0 fails at k=" +
                                      std::to_string(k) + " (alpha_k=" + fmt(a) + ")");
          break;
        }
        if (k < last && rule.parameter(k + 1) > a) {
          report.violations.push_back(name + "^k >= " + name + "^{k+1} fails at k=" +
                                      std::to_string(k));
          break;
        }
      }
      return lower;
    }

    case MetricKind::induced: {
      if (!z_block) {
        report.violations.push_back("induced metric is only defined for the z-block (M2)");
        return std::nullopt;
      }
      if (!rule.parameter) throw ArgumentError("induced metric without schedule");
      const double b2 = b_norm * b_norm;
      double lower = kInfinity;
      for (long k = 0; k <= config.max_iter; ++k) {
        const double sigma = rule.parameter(k);
        const double c = config.stepsize(k);
        if (!(sigma > 0.0)) {
          report.violations.push_back("sigma_k > 0 fails at k=" + std::to_string(k));
          break;
        }
        if (sigma * c * b2 > 1.0) {
          report.violations.push_back("sigma_k c_k |B|^2 <= 1 fails at k=" + std::to_string(k) +
                                      " (" + fmt(sigma * c * b2) + ")");
          break;
        }
        const double floor = 1.0 / sigma - c * b2 - 0.5 * lipschitz;
        lower = std::min(lower, floor);
        if (floor < -1e-12 / sigma) {
          report.violations.push_back(name + "^k - " + half_l + " >= 0 fails at k=" +
                                      std::to_string(k));
          break;
        }
        if (k < config.max_iter) {
          const double d_sigma = 1.0 / sigma - 1.0 / rule.parameter(k + 1);
          const double d_c = c - config.stepsize(k + 1);
          if (d_sigma - std::max(d_c, 0.0) * b2 < -1e-12 / sigma) {
            report.violations.push_back(name + "^k >= " + name + "^{k+1} fails at k=" +
                                        std::to_string(k));
            break;
          }
        }
      }
      return lower;
    }

    case MetricKind::dense: {
      if (!rule.matrix) throw ArgumentError("dense metric without matrix schedule");
      Mat prev = rule.matrix(0);
      const Index n = prev.rows();
      const Mat shift = 0.5 * lipschitz * Mat::Identity(n, n);
      if (!is_psd(prev - shift)) {
        report.violations.push_back(name + "^0 - " + half_l + " is not positive semidefinite");
        return std::nullopt;
      }
      const long last = rule.stationary ? 0 : config.max_iter;
      for (long k = 1; k <= last; ++k) {
        Mat cur = rule.matrix(k);
        if (cur == prev) continue;
        if (!is_psd(cur - shift)) {
          report.violations.push_back(name + "^k - " + half_l + " >= 0 fails at k=" +
                                      std::to_string(k));
          return std::nullopt;
        }
        if (!is_psd(prev - cur)) {
          report.violations.push_back(name + "^k >= " + name + "^{k+1} fails at k=" +
                                      std::to_string(k - 1));
          return std::nullopt;
        }
        prev = std::move(cur);
      }
      // Loewner-decreasing, so the last matrix has the smallest spectrum.
      return symmetric_min_eig(prev - shift);
    }

    case MetricKind::custom_solve:
      report.warnings.push_back(name + " is a custom metric; positivity and monotonicity not checked");
      return std::nullopt;
  }
  return std::nullopt;
}

void check_hooks(const TwoBlockProblem& problem, const MetricRule& m1, const MetricRule& m2,
                 Algorithm algorithm) {
  if (algorithm == Algorithm::ama) {
    if (!problem.h1.identically_zero || !problem.h2.identically_zero) {
      throw UnsupportedProblemError("AMA requires h1 = h2 = 0");
    }
    if (!problem.f_argmin_linear) throw UnsupportedProblemError("AMA requires f_argmin_linear");
    return;
  }
  if (!m1.x_solve) {
    switch (m1.kind) {
      case MetricKind::zero:
        if (!problem.f_argmin_linear) {
          throw UnsupportedProblemError("zero M1 requires f_argmin_linear or an x-solve hook");
        }
        break;
      case MetricKind::scaled_identity:
        break;
      case MetricKind::induced:
        throw UnsupportedProblemError("induced metric cannot be used for the x-block");
      case MetricKind::dense:
      case MetricKind::custom_solve:
        throw UnsupportedProblemError("M1 of kind " + to_string(m1.kind) +
                                      " requires an x-solve hook");
    }
  }
  if (!m2.z_solve && m2.kind == MetricKind::custom_solve) {
    throw UnsupportedProblemError("custom M2 requires a z-solve hook");
  }
}

double metric_operator_norm(const MetricRule& rule, long k) {
  switch (rule.kind) {
    case MetricKind::zero:
      return 0.0;
    case MetricKind::scaled_identity:
      return std::abs(rule.parameter(k));
    case MetricKind::induced:
      return 1.0 / rule.parameter(k);
    case MetricKind::dense:
      return symmetric_norm(rule.matrix(k));
    case MetricKind::custom_solve:
      break;
  }
  throw UnsupportedProblemError("norm of a custom metric is unknown");
}

Vec x_update(const TwoBlockProblem& problem, const IterateState& s, const MetricRule& m1) {
  const Vec w = problem.A.adjoint(s.p) - problem.h1.gradient(s.x);
  if (m1.x_solve) return m1.x_solve(s, w);
  switch (m1.kind) {
    case MetricKind::zero:
      if (!problem.f_argmin_linear) {
        throw UnsupportedProblemError("zero M1 requires f_argmin_linear or an x-solve hook");
      }
      return problem.f_argmin_linear(w);
    case MetricKind::scaled_identity: {
      const double alpha = m1.parameter(s.k);
      if (alpha == 0.0) return problem.f_argmin_linear(w);
      return problem.f.prox(1.0 / alpha, s.x + w / alpha);
    }
    default:
      throw UnsupportedProblemError("M1 of kind " + to_string(m1.kind) + " requires an x-solve hook");
  }
}

double lyapunov_value(const TwoBlockProblem& problem, const IterateState& s,
                      const IterateState& saddle, double c, const MetricRule& m1,
                      const MetricRule& m2) {
  return (s.p - saddle.p).squaredNorm() + c * metric_sq(m2, s.k, s.z - saddle.z, c, problem.B) +
         c * metric_sq(m1, s.k, s.x - saddle.x, c, problem.B);
}

}  // namespace

// ---------------------------------------------------------------------------

void prepare(TwoBlockProblem& problem) {
  const auto& p = problem;
  if (p.A.out_dim() != p.B.out_dim() || p.A.out_dim() != p.b.size()) {
    throw DimensionError("TwoBlockProblem: A, B and b must share the constraint dimension");
  }
  if (p.f.dim != p.A.in_dim() || p.h1.dim != p.A.in_dim()) {
    throw DimensionError("TwoBlockProblem: f/h1 dimension differs from A's domain");
  }
  if (p.g.dim != p.B.in_dim() || p.h2.dim != p.B.in_dim()) {
    throw DimensionError("TwoBlockProblem: g/h2 dimension differs from B's domain");
  }
  if (!p.h1.gradient || !p.h2.gradient || !p.h1.lipschitz || !p.h2.lipschitz) {
    throw ArgumentError("TwoBlockProblem: h1 and h2 need a gradient and a Lipschitz constant");
  }
  if (!problem.a_norm) problem.a_norm = operator_norm(problem.A);
  if (!problem.b_norm) problem.b_norm = operator_norm(problem.B);
}

std::function<double(long)> constant_schedule(double value) {
  return [value](long) { return value; };
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::zero:
      return "zero";
    case MetricKind::scaled_identity:
      return "scaled_identity";
    case MetricKind::induced:
      return "induced";
    case MetricKind::dense:
      return "dense";
    case MetricKind::custom_solve:
      return "custom_solve";
  }
  return "unknown";
}

MetricRule MetricRule::zero() { return MetricRule{}; }

MetricRule MetricRule::scaled_identity(std::function<double(long)> alpha) {
  MetricRule r;
  r.kind = MetricKind::scaled_identity;
  r.parameter = std::move(alpha);
  return r;
}

MetricRule MetricRule::induced(std::function<double(long)> sigma) {
  MetricRule r;
  r.kind = MetricKind::induced;
  r.parameter = std::move(sigma);
  return r;
}

MetricRule MetricRule::dense(std::function<Mat(long)> matrix) {
  MetricRule r;
  r.kind = MetricKind::dense;
  r.matrix = std::move(matrix);
  return r;
}

MetricRule MetricRule::custom(std::function<Vec(long, const Vec&)> apply) {
  MetricRule r;
  r.kind = MetricKind::custom_solve;
  r.custom_apply = std::move(apply);
  return r;
}

MetricRule& MetricRule::with_x_solve(XSolveHook hook) {
  x_solve = std::move(hook);
  return *this;
}

MetricRule& MetricRule::with_z_solve(ZSolveHook hook) {
  z_solve = std::move(hook);
  return *this;
}

bool MetricRule::can_apply() const {
  return kind != MetricKind::custom_solve || static_cast<bool>(custom_apply);
}

Vec MetricRule::apply(long k, const Vec& v, double c_k, const LinearMap* B) const {
  switch (kind) {
    case MetricKind::zero:
      return Vec::Zero(v.size());
    case MetricKind::scaled_identity:
      return parameter(k) * v;
    case MetricKind::induced:
      if (B == nullptr) throw ArgumentError("induced metric needs B");
      return v / parameter(k) - c_k * B->adjoint(B->apply(v));
    case MetricKind::dense:
      return matrix(k) * v;
    case MetricKind::custom_solve:
      if (!custom_apply) throw UnsupportedProblemError("custom metric has no operator form");
      return custom_apply(k, v);
  }
  return v;
}

IterateState zero_state(const TwoBlockProblem& problem) {
  return IterateState{Vec::Zero(problem.A.in_dim()), Vec::Zero(problem.B.in_dim()),
                      Vec::Zero(problem.b.size()), 0};
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (valid ? "valid" : "invalid") << "; |A|=" << a_norm << " |B|=" << b_norm
     << " gamma=" << gamma << "; assumption (i) " << (assumption_i ? "certified" : "not certified")
     << "; assumption (ii) " << assumption_ii;
  for (const auto& v : violations) os << "\n  violation: " << v;
  for (const auto& w : warnings) os << "\n  warning: " << w;
  return os.str();
}

void ValidationReport::throw_if_invalid() const {
  if (valid) return;
  std::string msg = "invalid configuration:";
  for (const auto& v : violations) msg += " [" + v + "]";
  throw ConfigError(msg);
}

ValidationReport validate(const TwoBlockProblem& problem, const SolverConfig& config,
                          const MetricRule& m1, const MetricRule& m2) {
  ValidationReport report;
  report.gamma = problem.f.strong_convexity;
  report.a_norm = norm_of_a(problem);
  report.b_norm = norm_of_b(problem);
  const double gamma = report.gamma;
  const double a2 = report.a_norm * report.a_norm;
  const double eps = config.epsilon;

  if (!(gamma > 0.0)) report.violations.push_back("f must be strongly convex (gamma > 0)");
  if (!(report.a_norm > 0.0)) report.violations.push_back("A must not be the zero map");
  if (config.max_iter < 0) report.violations.push_back("max_iter must be nonnegative");
  if (!config.stepsize) throw ArgumentError("SolverConfig: stepsize schedule missing");

  if (report.violations.empty()) {
    const double upper = 2.0 * gamma / a2 - eps;
    if (!(eps > 0.0 && eps < gamma / a2)) {
      report.violations.push_back("epsilon in (0, gamma/|A|^2) fails (epsilon=" + fmt(eps) +
                                  ", gamma/|A|^2=" + fmt(gamma / a2) + ")");
    }
    double prev = kInfinity;
    for (long k = 0; k <= config.max_iter; ++k) {
      const double c = config.stepsize(k);
      if (!(c >= eps)) {
        report.violations.push_back("epsilon <= c_k fails at k=" + std::to_string(k) + " (c_k=" +
                                    fmt(c) + ")");
        break;
      }
      if (c > upper) {
        report.violations.push_back("c_k <= 2 gamma/|A|^2 - epsilon fails at k=" +
                                    std::to_string(k) + " (c_k=" + fmt(c) + ", bound=" +
                                    fmt(upper) + ")");
        break;
      }
      if (c > prev) {
        report.violations.push_back("c_{k+1} <= c_k fails at k=" + std::to_string(k - 1));
        break;
      }
      prev = c;
    }
  }

  const double l1 = problem.h1.lipschitz.value_or(0.0);
  const double l2 = problem.h2.lipschitz.value_or(0.0);
  if (report.violations.empty()) {
    check_metric(m1, l1, false, config, report.b_norm, report);
    const auto alpha2 = check_metric(m2, l2, true, config, report.b_norm, report);
    report.assumption_i = alpha2 && *alpha2 > 0.0;
  }

  double beta = 0.0;
  if (const Mat* bm = problem.B.dense(); bm != nullptr && bm->cols() <= 2048) {
    const Mat btb = bm->transpose() * *bm;
    beta = symmetric_min_eig(btb);
    const bool ok = beta > 1e-12 * std::max(1.0, report.b_norm * report.b_norm);
    report.assumption_ii = ok ? "certified" : "not certified";
  }
  if (!report.assumption_i && report.assumption_ii != "certified") {
    report.warnings.push_back(
        "neither assumption (i) nor (ii) is certified; convergence is not guaranteed");
  }

  switch (m2.kind) {
    case MetricKind::induced:
      report.z_step_unique = true;
      break;
    case MetricKind::scaled_identity:
      report.z_step_unique = m2.parameter && m2.parameter(0) > 0.0 &&
                             m2.parameter(std::max<long>(config.max_iter, 0)) > 0.0;
      break;
    case MetricKind::dense:
      report.z_step_unique =
          m2.matrix && symmetric_min_eig(m2.matrix(std::max<long>(config.max_iter, 0))) > 1e-12;
      break;
    default:
      break;
  }
  if (report.assumption_ii == "certified") report.z_step_unique = true;

  report.valid = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------

Vec solve_z_subproblem(const TwoBlockProblem& problem, const Vec& z_k, const Vec& w, const Vec& r,
                       double c, const std::function<Vec(const Vec&)>& metric, double metric_norm,
                       const FistaSettings& inner) {
  const double b_norm = norm_of_b(problem);
  double lipschitz = c * b_norm * b_norm + metric_norm;
  if (!(lipschitz > 0.0)) lipschitz = 1.0;
  const LinearMap& B = problem.B;
  auto gradient = [&](const Vec& z) -> Vec {
    Vec grad = c * B.adjoint(B.apply(z) - r) - w;
    if (metric) grad += metric(z - z_k);
    return grad;
  };
  auto prox = [&](double step, const Vec& v) -> Vec { return problem.g.prox(step, v); };
  return fista(gradient, lipschitz, prox, z_k, inner).x;
}

IterateState ama_step(const TwoBlockProblem& problem, const IterateState& state, double c_k,
                      const FistaSettings& inner) {
  if (!problem.h1.identically_zero || !problem.h2.identically_zero) {
    throw UnsupportedProblemError("AMA requires h1 = h2 = 0");
  }
  if (!problem.f_argmin_linear) throw UnsupportedProblemError("AMA requires f_argmin_linear");
  IterateState next;
  next.k = state.k + 1;
  const Vec w_x = problem.A.adjoint(state.p) - problem.h1.gradient(state.x);
  next.x = problem.f_argmin_linear(w_x);
  const Vec r = problem.b - problem.A.apply(next.x);
  const Vec w_z = problem.B.adjoint(state.p) - problem.h2.gradient(state.z);
  next.z = solve_z_subproblem(problem, state.z, w_z, r, c_k, {}, 0.0, inner);
  next.p = state.p + c_k * (r - problem.B.apply(next.z));
  return next;
}

Vec proximal_ama_z_generic(const TwoBlockProblem& problem, const IterateState& state,
                           const Vec& x_next, double c_k, const MetricRule& m2,
                           const FistaSettings& inner) {
  const Vec r = problem.b - problem.A.apply(x_next);
  const Vec w = problem.B.adjoint(state.p) - problem.h2.gradient(state.z);
  const long k = state.k;
  std::function<Vec(const Vec&)> metric;
  if (m2.kind != MetricKind::zero) {
    metric = [&](const Vec& v) { return m2.apply(k, v, c_k, &problem.B); };
  }
  return solve_z_subproblem(problem, state.z, w, r, c_k, metric,
                            metric ? metric_operator_norm(m2, k) : 0.0, inner);
}

IterateState proximal_ama_step(const TwoBlockProblem& problem, const IterateState& state,
                               double c_k, const MetricRule& m1, const MetricRule& m2,
                               const FistaSettings& inner) {
  IterateState next;
  next.k = state.k + 1;
  next.x = x_update(problem, state, m1);
  const Vec r = problem.b - problem.A.apply(next.x);

  if (m2.z_solve) {
    const Vec w = problem.B.adjoint(state.p) - problem.h2.gradient(state.z);
    next.z = m2.z_solve(state, w, r, c_k);
  } else if (m2.kind == MetricKind::induced) {
    const double sigma = m2.parameter(state.k);
    const LinearMap& B = problem.B;
    const Vec v = state.z - sigma * problem.h2.gradient(state.z) +
                  sigma * c_k * B.adjoint(r - B.apply(state.z)) + sigma * B.adjoint(state.p);
    next.z = problem.g.prox(sigma, v);
  } else if (m2.kind == MetricKind::custom_solve) {
    throw UnsupportedProblemError("custom M2 requires a z-solve hook");
  } else {
    next.z = proximal_ama_z_generic(problem, state, next.x, c_k, m2, inner);
  }

  next.p = state.p + c_k * (r - problem.B.apply(next.z));
  return next;
}

// ---------------------------------------------------------------------------

double KktResiduals::max() const { return std::max({r_f, r_g, r_feas}); }

KktResiduals kkt_residuals(const TwoBlockProblem& problem, const IterateState& s) {
  KktResiduals res;
  const Vec u = problem.A.adjoint(s.p) - problem.h1.gradient(s.x);
  res.r_f = (s.x - problem.f.prox(1.0, s.x + u)).norm();
  const Vec v = problem.B.adjoint(s.p) - problem.h2.gradient(s.z);
  res.r_g = (s.z - problem.g.prox(1.0, s.z + v)).norm();
  res.r_feas = (problem.A.apply(s.x) + problem.B.apply(s.z) - problem.b).norm();
  return res;
}

double LyapunovDiagnostics::r_sum() const {
  double s = 0.0;
  for (double v : summands) s += v;
  return s;
}

LyapunovDiagnostics lyapunov_diagnostics(const TwoBlockProblem& problem,
                                         const IterateState& state_k,
                                         const IterateState& state_next,
                                         const IterateState& saddle, double c_k, double c_next,
                                         const MetricRule& m1, const MetricRule& m2) {
  const LinearMap& B = problem.B;
  const long k = state_k.k;
  const double l1 = problem.h1.lipschitz.value_or(0.0);
  const double l2 = problem.h2.lipschitz.value_or(0.0);
  const double gamma = problem.f.strong_convexity;
  const double a_norm = norm_of_a(problem);

  LyapunovDiagnostics d;
  d.v_k = (state_k.p - saddle.p).squaredNorm() + c_k * metric_sq(m2, k, state_k.z - saddle.z, c_k, B);
  d.v_next = (state_next.p - saddle.p).squaredNorm() +
             c_next * metric_sq(m2, k + 1, state_next.z - saddle.z, c_next, B);
  d.x_term_k = c_k * metric_sq(m1, k, state_k.x - saddle.x, c_k, B);
  d.x_term_next = c_next * metric_sq(m1, k + 1, state_next.x - saddle.x, c_next, B);

  auto add = [&](std::string name, double value) {
    d.summand_names.push_back(std::move(name));
    d.summands.push_back(value);
  };

  const Vec dx = state_k.x - state_next.x;
  const Vec dz = state_k.z - state_next.z;
  add("strong_convexity",
      c_k * (2.0 * gamma - c_k * a_norm * a_norm) * (state_next.x - saddle.x).squaredNorm());
  add("constraint", c_k * c_k * (B.apply(state_next.z) - B.apply(saddle.z)).squaredNorm());
  add("z_metric", c_k * (metric_sq(m2, k, dz, c_k, B) - 0.5 * l2 * dz.squaredNorm()));
  add("x_metric", c_k * (metric_sq(m1, k, dx, c_k, B) - 0.5 * l1 * dx.squaredNorm()));
  if (l1 > 0.0) {
    const Vec t = (problem.h1.gradient(saddle.x) - problem.h1.gradient(state_k.x)) / l1 + 0.5 * dx;
    add("h1_cocoercive", 2.0 * c_k * l1 * t.squaredNorm());
  }
  if (l2 > 0.0) {
    const Vec t = (problem.h2.gradient(saddle.z) - problem.h2.gradient(state_k.z)) / l2 + 0.5 * dz;
    add("h2_cocoercive", 2.0 * c_k * l2 * t.squaredNorm());
  }
  return d;
}

// ---------------------------------------------------------------------------

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::ama ? "ama" : "proximal-ama";
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iter:
      return "max_iter";
    case RunStatus::invalid_config:
      return "invalid_config";
  }
  return "unknown";
}

RunRecord solve(const TwoBlockProblem& problem_in, const SolverConfig& config,
                const MetricRule& m1_in, const MetricRule& m2_in, Algorithm algorithm,
                const SolveCallbacks& callbacks, std::optional<IterateState> start) {
  TwoBlockProblem problem = problem_in;
  prepare(problem);
  const MetricRule m1 = algorithm == Algorithm::ama ? MetricRule::zero() : m1_in;
  const MetricRule m2 = algorithm == Algorithm::ama ? MetricRule::zero() : m2_in;
  check_hooks(problem, m1, m2, algorithm);

  RunRecord record;
  record.validation = validate(problem, config, m1, m2);
  if (!record.validation.valid) {
    record.status = RunStatus::invalid_config;
    return record;
  }
  const bool generic_z = !m2.z_solve && m2.kind != MetricKind::induced;
  if (generic_z && !record.validation.z_step_unique) {
    record.flags.push_back("z-subproblem uniqueness not certified; inner solver limit returned");
  }
  const bool track_lyapunov = callbacks.saddle && m1.can_apply() && m2.can_apply();

  IterateState state = start ? *start : zero_state(problem);
  if (state.x.size() != problem.A.in_dim() || state.z.size() != problem.B.in_dim() ||
      state.p.size() != problem.b.size()) {
    throw DimensionError("solve: starting point has wrong dimensions");
  }
  require_finite(state, state.k);

  const auto t0 = std::chrono::steady_clock::now();
  auto make_row = [&](const IterateState& s, const IterateState* prev) {
    TraceRow row;
    row.iter = s.k;
    row.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.objective_primal = problem.f.value(s.x) + problem.h1.value(s.x) + problem.g.value(s.z) +
                           problem.h2.value(s.z);
    const KktResiduals kkt = kkt_residuals(problem, s);
    row.feasibility = kkt.r_feas;
    row.kkt_f = kkt.r_f;
    row.kkt_g = kkt.r_g;
    if (track_lyapunov) {
      const IterateState& saddle = *callbacks.saddle;
      if (prev == nullptr) {
        row.lyapunov = lyapunov_value(problem, s, saddle, config.stepsize(s.k), m1, m2);
      } else {
        const auto d = lyapunov_diagnostics(problem, *prev, s, saddle, config.stepsize(prev->k),
                                            config.stepsize(s.k), m1, m2);
        row.lyapunov = d.total_next();
        row.r_summands = d.summands;
      }
    }
    if (callbacks.on_row) callbacks.on_row(s, row);
    return row;
  };

  record.rows.push_back(make_row(state, nullptr));
  if (config.keep_iterates) record.iterates.push_back(state);
  auto converged = [&](const TraceRow& row) {
    return std::max({row.feasibility, row.kkt_f, row.kkt_g}) <= config.feasibility_tol;
  };

  record.status = RunStatus::max_iter;
  if (converged(record.rows.back())) {
    record.status = RunStatus::converged;
  } else {
    for (long k = 0; k < config.max_iter; ++k) {
      const double c = config.stepsize(state.k);
      IterateState next;
      try {
        next = algorithm == Algorithm::ama ? ama_step(problem, state, c, config.inner)
                                           : proximal_ama_step(problem, state, c, m1, m2, config.inner);
      } catch (const NumericalError& e) {
        // Inner solvers report their own counter; rethrow with the outer one.
        throw NumericalError(std::string("step failed: ") + e.what(), state.k + 1);
      }
      require_finite(next, next.k);
      record.rows.push_back(make_row(next, &state));
      if (config.keep_iterates) record.iterates.push_back(next);
      state = std::move(next);
      if (converged(record.rows.back())) {
        record.status = RunStatus::converged;
        break;
      }
    }
  }
  record.final_state = state;
  return record;
}

}  // namespace proxama
