#include "proxama/svm.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "proxama/errors.hpp"
#include "proxama/prox.hpp"

namespace proxama::svm {

namespace {

constexpr double kSingularTol = 1e-12;

// Largest and smallest eigenvalue of a symmetric positive matrix.
std::pair<double, double> extreme_eigenvalues(const Mat& K) {
  if (K.rows() <= 2048) {
    Eigen::SelfAdjointEigenSolver<Mat> es(K, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[K.rows() - 1]};
  }
  const LinearMap op = make_dense(K);
  const double lmax = operator_norm(op);
  // Inverse power iteration for the smallest eigenvalue.
  Eigen::LDLT<Mat> ldlt(K);
  Vec v = Vec::Ones(K.rows()).normalized();
  double mu = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vec w = ldlt.solve(v);
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw)) return {0.0, lmax};
    const double next = v.dot(w);
    v = w / nw;
    if (std::abs(next - mu) <= 1e-10 * std::abs(next)) {
      mu = next;
      break;
    }
    mu = next;
  }
  return {mu > 0.0 ? 1.0 / mu : 0.0, lmax};
}

}  // namespace

Mat cross_kernel(const Mat& query, const Mat& train, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("kernel width sigma must be positive");
  if (query.cols() != train.cols()) throw DimensionError("cross_kernel: feature counts differ");
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Mat k(query.rows(), train.rows());
  for (Index i = 0; i < query.rows(); ++i) {
    for (Index j = 0; j < train.rows(); ++j) {
      k(i, j) = std::exp(-(query.row(i) - train.row(j)).squaredNorm() * scale);
    }
  }
  return k;
}

Mat gram_matrix(const Mat& data, double sigma) {
  if (data.rows() == 0 || data.cols() == 0) throw ArgumentError("gram_matrix: empty data");
  if (!(sigma > 0.0)) throw ArgumentError("kernel width sigma must be positive");
  const Index n = data.rows();
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Mat k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-(data.row(i) - data.row(j)).squaredNorm() * scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double SvmInstance::recommended_stepsize() const {
  return 2.0 * lambda_min / (lambda_max * lambda_max) - 1e-8;
}

SvmInstance build_svm(const Mat& data, const Vec& labels, double C, double sigma, double tau) {
  if (data.rows() != labels.size()) throw DimensionError("build_svm: one label per row required");
  check_labels(labels);
  if (!(C > 0.0)) throw ArgumentError("build_svm: C must be positive");
  if (!(tau >= 0.0)) throw ArgumentError("build_svm: tau must be nonnegative");
  const Index n = data.rows();

  Mat K = gram_matrix(data, sigma);
  const auto [lmin, lmax] = extreme_eigenvalues(K);
  if (!(lmin > kSingularTol)) {
    throw IllConditionedError("Gram matrix is numerically singular (lambda_min = " +
                              std::to_string(lmin) + "); remove duplicate points or change sigma");
  }

  auto ldlt = std::make_shared<const Eigen::LDLT<Mat>>(K);
  ProxFn f = quadratic_function(K, Vec::Zero(n));
  f.strong_convexity = lmin;
  f.lipschitz = lmax;
  TwoBlockProblem problem{std::move(f),
                          zero_function(n),
                          hinge_loss(labels, C),
                          zero_function(n),
                          make_dense(K),
                          make_scaled_identity(n, -1.0),
                          Vec::Zero(n),
                          [ldlt](const Vec& w) -> Vec { return ldlt->solve(w); },
                          lmax,
                          1.0};

  MetricRule m1 = MetricRule::zero();
  if (tau > 0.0) {
    auto tk = std::make_shared<const Mat>(tau * K);
    m1 = MetricRule::dense([tk](long) { return *tk; });
    m1.stationary = true;
  }
  m1.with_x_solve([tau](const IterateState& s, const Vec&) -> Vec {
    return (s.p + tau * s.x) / (1.0 + tau);
  });

  const ProxFn g = problem.g;
  MetricRule m2 = MetricRule::zero();
  m2.with_z_solve([g](const IterateState& s, const Vec&, const Vec& r, double c) -> Vec {
    return g.prox(1.0 / c, -r - s.p / c);
  });

  return SvmInstance{data,   labels, C,     sigma, tau, std::move(K), lmin, lmax,
                     std::move(problem), std::move(m1), std::move(m2)};
}

Vec decision_values(const Vec& coefficients, const Mat& train, const Mat& query, double sigma) {
  if (coefficients.size() != train.rows()) throw DimensionError("decision_values: coefficient count");
  return cross_kernel(query, train, sigma) * coefficients;
}

double misclassification_rate(const Vec& values, const Vec& labels) {
  if (values.size() != labels.size()) throw DimensionError("misclassification_rate: length mismatch");
  if (values.size() == 0) return 0.0;
  Index wrong = 0;
  for (Index i = 0; i < values.size(); ++i) {
    if (!(values[i] * labels[i] > 0.0)) ++wrong;
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(values.size());
}

Dataset synthetic_blobs(int n_train, int n_test, std::uint64_t seed) {
  if (n_train < 2 || n_test < 0) throw ArgumentError("synthetic_blobs: need at least two training points");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.2);

  auto draw = [&](double y, const Mat* existing, Index count) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Eigen::RowVector2d pt(2.0 * y + noise(rng), noise(rng));
      if (y * pt[0] < 0.3) continue;
      bool close = false;
      for (Index j = 0; existing != nullptr && j < count && !close; ++j) {
        close = (existing->row(j) - pt).squaredNorm() < 0.04;
      }
      if (!close) return pt;
    }
    throw ArgumentError("synthetic_blobs: cannot place points with the required separation");
  };

  Dataset d;
  d.train.resize(n_train, 2);
  d.train_labels.resize(n_train);
  for (Index i = 0; i < n_train; ++i) {
    const double y = i % 2 == 0 ? 1.0 : -1.0;
    d.train.row(i) = draw(y, &d.train, i);
    d.train_labels[i] = y;
  }
  d.test.resize(n_test, 2);
  d.test_labels.resize(n_test);
  for (Index i = 0; i < n_test; ++i) {
    const double y = i % 2 == 0 ? 1.0 : -1.0;
    d.test.row(i) = draw(y, nullptr, 0);
    d.test_labels[i] = y;
  }
  return d;
}

Vec reference_solution(const SvmInstance& instance, double c, long iters) {
  SolverConfig cfg;
  cfg.stepsize = constant_schedule(c);
  cfg.max_iter = iters;
  cfg.feasibility_tol = 1e-12;
  const RunRecord rec =
      solve(instance.problem, cfg, instance.m1, instance.m2, Algorithm::proximal_ama);
  if (rec.status == RunStatus::invalid_config) rec.validation.throw_if_invalid();
  return rec.final_state.x;
}

}  // namespace proxama::svm
