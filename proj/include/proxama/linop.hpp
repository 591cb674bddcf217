#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "proxama/types.hpp"

namespace proxama {

/// Image geometry. Pixel (i, j), zero-based, lives at flat index i * cols + j.
struct ImageShape {
  Index rows = 0;
  Index cols = 0;

  Index size() const { return rows * cols; }
  Index flat(Index i, Index j) const { return i * cols + j; }
};

/// Immutable linear operator R^in_dim -> R^out_dim with its adjoint.
///
/// Copies share the underlying callables, so a LinearMap is cheap to pass by
/// value and safe to use from several solves at once.
class LinearMap {
 public:
  using Action = std::function<Vec(const Vec&)>;

  LinearMap(Index in_dim, Index out_dim, Action apply, Action adjoint,
            std::optional<double> norm_bound = std::nullopt,
            std::shared_ptr<const Mat> dense = nullptr);

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }

  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& y) const;

  /// Analytic upper bound on the operator norm, when one is known.
  const std::optional<double>& norm_bound() const { return norm_bound_; }

  /// Explicit matrix, available for operators built from one.
  const Mat* dense() const { return dense_.get(); }

  /// The adjoint operator as a map of its own.
  LinearMap transposed() const;

  /// alpha * this
  LinearMap scaled(double alpha) const;

 private:
  Index in_dim_;
  Index out_dim_;
  Action apply_;
  Action adjoint_;
  std::optional<double> norm_bound_;
  std::shared_ptr<const Mat> dense_;
};

LinearMap make_dense(Mat matrix);

/// alpha * Id on R^n. Stored densely for n <= 2048 so that spectral checks
/// can see it.
LinearMap make_scaled_identity(Index n, double alpha = 1.0);

/// Forward differences (L1 x, L2 x) with zero rows at the last row / column.
/// Output is the two blocks stacked, each of length rows * cols.
LinearMap make_discrete_gradient(const ImageShape& shape);

/// Normalized Gaussian kernel of odd side `size`, sampled at integer offsets.
/// Row-major, size * size entries summing to one.
Vec gaussian_kernel(int size, double std_dev);

/// Periodic convolution with gaussian_kernel(kernel_size, std_dev).
/// Self-adjoint with operator norm exactly one.
LinearMap make_gaussian_blur(const ImageShape& shape, int kernel_size, double std_dev);

/// sqrt of the top eigenvalue of op* op, by power iteration from a seeded
/// random start. Returns 0 for the zero operator.
double estimate_norm(const LinearMap& op, int max_iters = 500, double tol = 1e-12,
                     std::uint64_t seed = 0x5eed);

/// max |<Ax, y> - <x, A*y>| / (1 + |x||y|) over `pairs` random (x, y).
double adjoint_mismatch(const LinearMap& op, int pairs, std::uint64_t seed);

/// Norm from the analytic bound if present, else estimated.
double operator_norm(const LinearMap& op);

}  // namespace proxama
