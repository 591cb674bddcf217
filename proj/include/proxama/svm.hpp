#pragma once

#include <cstdint>

#include "proxama/solver.hpp"
#include "proxama/types.hpp"

namespace proxama::svm {

/// K_ij = exp(-|X_i - X_j|^2 / (2 sigma^2)) over the rows of `data`.
Mat gram_matrix(const Mat& data, double sigma);

/// kappa(query_i, train_j) for every pair.
Mat cross_kernel(const Mat& query, const Mat& train, double sigma);

/// min 1/2 x'Kx + C sum_i max(1 - (Kx)_i Y_i, 0), split as f(x) + g(z)
/// with Kx - z = 0. The multiplier update is p + c(z - Kx).
struct SvmInstance {
  Mat data;
  Vec labels;
  double C = 1.0;
  double sigma = 1.0;
  double tau = 0.0;
  Mat K;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  TwoBlockProblem problem;
  /// tau K with the closed-form x-update (p + tau x) / (1 + tau); for
  /// tau = 0 this is the AMA update x = p.
  MetricRule m1;
  /// Zero metric with the closed-form z-update prox_{g/c}(Kx - p/c).
  MetricRule m2;

  /// 2 lambda_min / lambda_max^2 - 1e-8
  double recommended_stepsize() const;
};

/// Throws IllConditionedError when lambda_min(K) <= 1e-12.
SvmInstance build_svm(const Mat& data, const Vec& labels, double C, double sigma, double tau);

/// Kernel expansion sum_i x_i kappa(q, X_i) at every query row.
Vec decision_values(const Vec& coefficients, const Mat& train, const Mat& query, double sigma);

/// Percentage of entries with sign(value) != label; a zero value counts as wrong.
double misclassification_rate(const Vec& values, const Vec& labels);

struct Dataset {
  Mat train;
  Vec train_labels;
  Mat test;
  Vec test_labels;
};

/// Two Gaussian blobs in the plane centered at (+-2, 0) with std 1.2, kept
/// separable by rejecting points with y * first coordinate < 0.3. Training
/// points closer than 0.2 to an earlier one are redrawn so K stays well
/// conditioned.
Dataset synthetic_blobs(int n_train, int n_test, std::uint64_t seed);

/// High-accuracy solution used as the RMSE reference: Proximal AMA with
/// the instance metrics for `iters` iterations or tolerance 1e-12.
Vec reference_solution(const SvmInstance& instance, double c, long iters);

}  // namespace proxama::svm
