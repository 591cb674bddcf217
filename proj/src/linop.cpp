#include "proxama/linop.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "proxama/errors.hpp"

namespace proxama {

namespace {

void check_size(const Vec& v, Index expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(v.size()));
  }
}

Vec random_normal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

}  // namespace

LinearMap::LinearMap(Index in_dim, Index out_dim, Action apply, Action adjoint,
                     std::optional<double> norm_bound, std::shared_ptr<const Mat> dense)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      apply_(std::move(apply)),
      adjoint_(std::move(adjoint)),
      norm_bound_(norm_bound),
      dense_(std::move(dense)) {
  if (in_dim_ <= 0 || out_dim_ <= 0) throw ArgumentError("LinearMap: dimensions must be positive");
  if (!apply_ || !adjoint_) throw ArgumentError("LinearMap: apply and adjoint are required");
}

Vec LinearMap::apply(const Vec& x) const {
  check_size(x, in_dim_, "LinearMap::apply");
  return apply_(x);
}

Vec LinearMap::adjoint(const Vec& y) const {
  check_size(y, out_dim_, "LinearMap::adjoint");
  return adjoint_(y);
}

LinearMap LinearMap::transposed() const {
  std::shared_ptr<const Mat> dense_t;
  if (dense_) dense_t = std::make_shared<const Mat>(dense_->transpose());
  return LinearMap(out_dim_, in_dim_, adjoint_, apply_, norm_bound_, std::move(dense_t));
}

LinearMap LinearMap::scaled(double alpha) const {
  std::optional<double> bound;
  if (norm_bound_) bound = std::abs(alpha) * *norm_bound_;
  std::shared_ptr<const Mat> dense_s;
  if (dense_) dense_s = std::make_shared<const Mat>(alpha * *dense_);
  auto fwd = apply_;
  auto bwd = adjoint_;
  return LinearMap(
      in_dim_, out_dim_, [fwd, alpha](const Vec& x) -> Vec { return alpha * fwd(x); },
      [bwd, alpha](const Vec& y) -> Vec { return alpha * bwd(y); }, bound, std::move(dense_s));
}

LinearMap make_dense(Mat matrix) {
  if (matrix.rows() == 0 || matrix.cols() == 0) throw ArgumentError("make_dense: empty matrix");
  if (!matrix.allFinite()) throw ArgumentError("make_dense: non-finite entries");
  auto m = std::make_shared<const Mat>(std::move(matrix));
  return LinearMap(
      m->cols(), m->rows(), [m](const Vec& x) -> Vec { return *m * x; },
      [m](const Vec& y) -> Vec { return m->transpose() * y; }, std::nullopt, m);
}

LinearMap make_scaled_identity(Index n, double alpha) {
  std::shared_ptr<const Mat> dense;
  if (n <= 2048) dense = std::make_shared<const Mat>(alpha * Mat::Identity(n, n));
  auto act = [alpha](const Vec& x) -> Vec { return alpha * x; };
  return LinearMap(n, n, act, act, std::abs(alpha), std::move(dense));
}

LinearMap make_discrete_gradient(const ImageShape& shape) {
  if (shape.rows < 1 || shape.cols < 1) throw ArgumentError("make_discrete_gradient: empty shape");
  const Index rows = shape.rows;
  const Index cols = shape.cols;
  const Index n = shape.size();

  auto forward = [rows, cols, n](const Vec& x) -> Vec {
    Vec out = Vec::Zero(2 * n);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        const Index k = i * cols + j;
        if (i + 1 < rows) out[k] = x[k + cols] - x[k];
        if (j + 1 < cols) out[n + k] = x[k + 1] - x[k];
      }
    }
    return out;
  };

  // Negative divergence: (L1* y)_{i,j} = y_{i-1,j} - y_{i,j} with the terms
  // that reference the zeroed boundary row/column dropped; same along columns.
  auto backward = [rows, cols, n](const Vec& y) -> Vec {
    Vec out = Vec::Zero(n);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        const Index k = i * cols + j;
        double v = 0.0;
        if (i + 1 < rows) v -= y[k];
        if (i > 0) v += y[k - cols];
        if (j + 1 < cols) v -= y[n + k];
        if (j > 0) v += y[n + k - 1];
        out[k] = v;
      }
    }
    return out;
  };

  return LinearMap(n, 2 * n, forward, backward, std::sqrt(8.0));
}

namespace {

Vec gaussian_kernel_1d(int size, double std_dev) {
  if (size < 1 || size % 2 == 0) throw ConfigError("gaussian_kernel: size must be a positive odd integer");
  if (!(std_dev > 0.0)) throw ConfigError("gaussian_kernel: standard deviation must be positive");
  const int half = size / 2;
  Vec k(size);
  for (int a = -half; a <= half; ++a) k[a + half] = std::exp(-(a * a) / (2.0 * std_dev * std_dev));
  return k / k.sum();
}

}  // namespace

Vec gaussian_kernel(int size, double std_dev) {
  const Vec k = gaussian_kernel_1d(size, std_dev);
  const Mat outer = k * k.transpose();
  return outer.transpose().reshaped();
}

LinearMap make_gaussian_blur(const ImageShape& shape, int kernel_size, double std_dev) {
  if (shape.rows < 1 || shape.cols < 1) throw ArgumentError("make_gaussian_blur: empty shape");
  auto k1 = std::make_shared<const Vec>(gaussian_kernel_1d(kernel_size, std_dev));
  if (kernel_size > shape.rows || kernel_size > shape.cols) {
    throw ConfigError("make_gaussian_blur: kernel " + std::to_string(kernel_size) +
                      " larger than image " + std::to_string(shape.rows) + "x" +
                      std::to_string(shape.cols));
  }
  const Index rows = shape.rows;
  const Index cols = shape.cols;
  const int half = kernel_size / 2;

  // The 2-D kernel is k k'; blur along rows then along columns. It is
  // symmetric, so the adjoint is the same map.
  auto wrap = [half](Index n) {
    std::vector<Index> idx(n * (2 * half + 1));
    for (Index i = 0; i < n; ++i) {
      for (int a = -half; a <= half; ++a) idx[i * (2 * half + 1) + a + half] = ((i + a) % n + n) % n;
    }
    return std::make_shared<const std::vector<Index>>(std::move(idx));
  };
  auto row_idx = wrap(rows);
  auto col_idx = wrap(cols);
  const int width = kernel_size;

  auto convolve = [=](const Vec& x) -> Vec {
    Vec tmp(rows * cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        const Index* cj = col_idx->data() + j * width;
        double acc = 0.0;
        for (int b = 0; b < width; ++b) acc += (*k1)[b] * x[i * cols + cj[b]];
        tmp[i * cols + j] = acc;
      }
    }
    Vec out = Vec::Zero(rows * cols);
    for (Index i = 0; i < rows; ++i) {
      const Index* ri = row_idx->data() + i * width;
      for (int a = 0; a < width; ++a) out.segment(i * cols, cols) += (*k1)[a] * tmp.segment(ri[a] * cols, cols);
    }
    return out;
  };

  return LinearMap(shape.size(), shape.size(), convolve, convolve, 1.0);
}

double estimate_norm(const LinearMap& op, int max_iters, double tol, std::uint64_t seed) {
  if (max_iters < 1) throw ArgumentError("estimate_norm: max_iters must be >= 1");
  std::mt19937_64 rng(seed);
  Vec v = random_normal(op.in_dim(), rng);
  v.normalize();
  double rayleigh = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vec av = op.apply(v);
    const double next = av.squaredNorm();
    Vec w = op.adjoint(av);
    const double wn = w.norm();
    if (wn == 0.0) return std::sqrt(next);
    v = w / wn;
    const bool done = it > 0 && std::abs(next - rayleigh) <= tol * next;
    rayleigh = next;
    if (done) break;
  }
  return std::sqrt(rayleigh);
}

double adjoint_mismatch(const LinearMap& op, int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const Vec x = random_normal(op.in_dim(), rng);
    const Vec y = random_normal(op.out_dim(), rng);
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint(y));
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + x.norm() * y.norm()));
  }
  return worst;
}

double operator_norm(const LinearMap& op) {
  if (op.norm_bound()) return *op.norm_bound();
  if (const Mat* m = op.dense(); m != nullptr && m->cols() <= 2048) {
    const Mat gram = m->transpose() * *m;
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  }
  return estimate_norm(op, 2000, 1e-14);
}

}  // namespace proxama
