#include "proxama/prox.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "proxama/errors.hpp"

namespace proxama {

namespace {

// Slack when testing membership of points produced by our own projections.
constexpr double kFeasTol = 1e-12;

void require_positive(double gamma, const char* where) {
  if (!(gamma > 0.0)) throw ArgumentError(std::string(where) + ": parameter must be positive");
}

Vec soft_threshold(const Vec& x, double t) {
  Vec out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - t;
    out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
  }
  return out;
}

}  // namespace

Vec project_box(const Vec& x, double lo, double hi) {
  if (lo > hi) throw ArgumentError("project_box: lower bound exceeds upper bound");
  return x.cwiseMax(lo).cwiseMin(hi);
}

std::pair<Vec, Vec> project_pairwise_l2_ball(const Vec& v, const Vec& w, double lambda) {
  if (v.size() != w.size()) throw DimensionError("project_pairwise_l2_ball: blocks differ in length");
  if (!(lambda > 0.0)) throw ArgumentError("project_pairwise_l2_ball: lambda must be positive");
  Vec pv(v.size());
  Vec pw(w.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double scale = lambda / std::max(lambda, std::hypot(v[i], w[i]));
    pv[i] = scale * v[i];
    pw[i] = scale * w[i];
  }
  return {std::move(pv), std::move(pw)};
}

void check_labels(const Vec& labels) {
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw ArgumentError("label at index " + std::to_string(i) + " is not +1 or -1");
    }
  }
}

Vec prox_hinge_conjugate(const Vec& p, const Vec& labels, double C, double mu) {
  if (p.size() != labels.size()) throw DimensionError("prox_hinge_conjugate: label count mismatch");
  require_positive(C, "prox_hinge_conjugate C");
  require_positive(mu, "prox_hinge_conjugate mu");
  check_labels(labels);
  Vec out(p.size());
  for (Index i = 0; i < p.size(); ++i) {
    const double y = labels[i];
    const double lo = y > 0 ? -C : 0.0;
    const double hi = y > 0 ? 0.0 : C;
    out[i] = std::clamp(p[i] - mu * y, lo, hi);
  }
  return out;
}

Vec prox_from_conjugate(const ProxFn::Prox& conj_prox, double gamma, const Vec& x) {
  require_positive(gamma, "prox_from_conjugate gamma");
  return x - gamma * conj_prox(1.0 / gamma, x / gamma);
}

double moreau_residual(const ProxFn::Prox& fn_prox, const ProxFn::Prox& conj_prox, double gamma,
                       const Vec& x) {
  return (fn_prox(gamma, x) + gamma * conj_prox(1.0 / gamma, x / gamma) - x).norm();
}

ProxFn zero_function(Index dim) {
  ProxFn f;
  f.dim = dim;
  f.value = [](const Vec&) { return 0.0; };
  f.prox = [](double, const Vec& x) -> Vec { return x; };
  f.gradient = [dim](const Vec&) -> Vec { return Vec::Zero(dim); };
  f.lipschitz = 0.0;
  f.identically_zero = true;
  return f;
}

ProxFn linear_function(Vec a) {
  auto coef = std::make_shared<const Vec>(std::move(a));
  ProxFn f;
  f.dim = coef->size();
  f.value = [coef](const Vec& x) { return coef->dot(x); };
  f.prox = [coef](double gamma, const Vec& x) -> Vec { return x - gamma * *coef; };
  f.gradient = [coef](const Vec&) -> Vec { return *coef; };
  f.lipschitz = 0.0;
  return f;
}

ProxFn half_squared_norm(Index dim) {
  ProxFn f;
  f.dim = dim;
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.prox = [](double gamma, const Vec& x) -> Vec { return x / (1.0 + gamma); };
  f.gradient = [](const Vec& x) -> Vec { return x; };
  f.lipschitz = 1.0;
  f.strong_convexity = 1.0;
  return f;
}

ProxFn half_squared_norm_plus_linear(Vec b) {
  auto coef = std::make_shared<const Vec>(std::move(b));
  ProxFn f;
  f.dim = coef->size();
  f.value = [coef](const Vec& x) { return 0.5 * x.squaredNorm() + coef->dot(x); };
  f.prox = [coef](double gamma, const Vec& x) -> Vec { return (x - gamma * *coef) / (1.0 + gamma); };
  f.gradient = [coef](const Vec& x) -> Vec { return x + *coef; };
  f.lipschitz = 1.0;
  f.strong_convexity = 1.0;
  return f;
}

ProxFn quadratic_function(const Mat& P, const Vec& q) {
  if (P.rows() != P.cols() || P.rows() != q.size()) throw DimensionError("quadratic_function: shape mismatch");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + P.cwiseAbs().maxCoeff())) {
    throw ArgumentError("quadratic_function: P is not symmetric");
  }
  struct Data {
    Mat P;
    Vec q;
    Mat V;
    Vec eig;
  };
  auto d = std::make_shared<Data>();
  d->P = 0.5 * (P + P.transpose());
  d->q = q;
  Eigen::SelfAdjointEigenSolver<Mat> es(d->P);
  d->V = es.eigenvectors();
  d->eig = es.eigenvalues();
  if (d->eig.minCoeff() < -1e-10 * (1.0 + d->eig.cwiseAbs().maxCoeff())) {
    throw ArgumentError("quadratic_function: P is not positive semidefinite");
  }

  ProxFn f;
  f.dim = q.size();
  f.value = [d](const Vec& x) { return 0.5 * x.dot(d->P * x) + d->q.dot(x); };
  // (I + gamma P)^{-1} (x - gamma q) in the eigenbasis of P.
  f.prox = [d](double gamma, const Vec& x) -> Vec {
    const Vec rhs = d->V.transpose() * (x - gamma * d->q);
    const Vec scaled = rhs.array() / (1.0 + gamma * d->eig.array().max(0.0));
    return d->V * scaled;
  };
  f.gradient = [d](const Vec& x) -> Vec { return d->P * x + d->q; };
  f.lipschitz = std::max(0.0, d->eig.maxCoeff());
  f.strong_convexity = std::max(0.0, d->eig.minCoeff());
  return f;
}

ProxFn l1_norm(Index dim, double lambda) {
  require_positive(lambda, "l1_norm lambda");
  ProxFn f;
  f.dim = dim;
  f.value = [lambda](const Vec& x) { return lambda * x.lpNorm<1>(); };
  f.prox = [lambda](double gamma, const Vec& x) { return soft_threshold(x, gamma * lambda); };
  return f;
}

ProxFn box_indicator(Index dim, double lo, double hi) {
  if (lo > hi) throw ArgumentError("box_indicator: lower bound exceeds upper bound");
  const double slack = kFeasTol * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  ProxFn f;
  f.dim = dim;
  f.value = [lo, hi, slack](const Vec& x) {
    if (x.size() == 0) return 0.0;
    return (x.minCoeff() >= lo - slack && x.maxCoeff() <= hi + slack) ? 0.0 : kInfinity;
  };
  f.prox = [lo, hi](double, const Vec& x) { return project_box(x, lo, hi); };
  return f;
}

ProxFn pairwise_l2_norm(Index n, double lambda) {
  require_positive(lambda, "pairwise_l2_norm lambda");
  ProxFn f;
  f.dim = 2 * n;
  f.value = [n, lambda](const Vec& x) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += std::hypot(x[i], x[n + i]);
    return lambda * s;
  };
  // Group soft-thresholding of each pair.
  f.prox = [n, lambda](double gamma, const Vec& x) -> Vec {
    Vec out(2 * n);
    const double t = gamma * lambda;
    for (Index i = 0; i < n; ++i) {
      const double r = std::hypot(x[i], x[n + i]);
      const double scale = r > t ? 1.0 - t / r : 0.0;
      out[i] = scale * x[i];
      out[n + i] = scale * x[n + i];
    }
    return out;
  };
  return f;
}

ProxFn pairwise_l2_ball_indicator(Index n, double lambda) {
  require_positive(lambda, "pairwise_l2_ball_indicator lambda");
  ProxFn f;
  f.dim = 2 * n;
  f.value = [n, lambda](const Vec& x) {
    for (Index i = 0; i < n; ++i) {
      if (std::hypot(x[i], x[n + i]) > lambda * (1.0 + kFeasTol)) return kInfinity;
    }
    return 0.0;
  };
  f.prox = [n, lambda](double, const Vec& x) -> Vec {
    auto [v, w] = project_pairwise_l2_ball(x.head(n), x.tail(n), lambda);
    Vec out(2 * n);
    out << v, w;
    return out;
  };
  return f;
}

ProxFn hinge_conjugate(Vec labels, double C) {
  require_positive(C, "hinge_conjugate C");
  check_labels(labels);
  auto y = std::make_shared<const Vec>(std::move(labels));
  const double slack = kFeasTol * (1.0 + C);
  ProxFn f;
  f.dim = y->size();
  f.value = [y, C, slack](const Vec& p) {
    double s = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
      const double py = p[i] * (*y)[i];
      if (py < -C - slack || py > slack) return kInfinity;
      s += py;
    }
    return s;
  };
  f.prox = [y, C](double mu, const Vec& p) { return prox_hinge_conjugate(p, *y, C, mu); };
  return f;
}

ProxFn hinge_loss(Vec labels, double C) {
  require_positive(C, "hinge_loss C");
  check_labels(labels);
  auto y = std::make_shared<const Vec>(std::move(labels));
  ProxFn f;
  f.dim = y->size();
  f.value = [y, C](const Vec& z) {
    double s = 0.0;
    for (Index i = 0; i < z.size(); ++i) s += std::max(1.0 - z[i] * (*y)[i], 0.0);
    return C * s;
  };
  f.prox = [y, C](double gamma, const Vec& x) -> Vec {
    return prox_from_conjugate(
        [y, C](double mu, const Vec& p) { return prox_hinge_conjugate(p, *y, C, mu); }, gamma, x);
  };
  return f;
}

}  // namespace proxama
