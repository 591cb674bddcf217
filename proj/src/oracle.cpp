#include "proxama/oracle.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "proxama/errors.hpp"

namespace proxama::oracle {

namespace {

Mat random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Vec random_vector(Index n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

}  // namespace

IterateState quadratic_saddle(const QuadraticInstance& in) {
  const Index n = in.P.rows();
  const Index m = in.Q.rows();
  const Index r = in.b.size();
  if (in.A.rows() != r || in.A.cols() != n || in.B.rows() != r || in.B.cols() != m ||
      in.q.size() != n || in.r.size() != m) {
    throw DimensionError("quadratic_saddle: inconsistent instance");
  }
  Mat kkt = Mat::Zero(n + m + r, n + m + r);
  kkt.block(0, 0, n, n) = in.P;
  kkt.block(0, n + m, n, r) = -in.A.transpose();
  kkt.block(n, n, m, m) = in.Q;
  kkt.block(n, n + m, m, r) = -in.B.transpose();
  kkt.block(n + m, 0, r, n) = in.A;
  kkt.block(n + m, n, r, m) = in.B;
  Vec rhs(n + m + r);
  rhs << -in.q, -in.r, in.b;

  Eigen::FullPivLU<Mat> lu(kkt);
  if (!lu.isInvertible()) throw DegenerateInstanceError("quadratic_saddle: singular KKT matrix");
  const Vec sol = lu.solve(rhs);
  return IterateState{sol.head(n), sol.segment(n, m), sol.tail(r), 0};
}

QuadraticInstance random_quadratic_instance(int dim, std::uint64_t seed) {
  if (dim < 1) throw ArgumentError("random_quadratic_instance: dim must be positive");
  std::mt19937_64 rng(seed);
  const Index n = dim;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  QuadraticInstance in;
  const Mat g = random_matrix(n, n, rng) * scale;
  in.P = g.transpose() * g + 0.5 * Mat::Identity(n, n);
  const Mat h = random_matrix(n, n, rng) * scale;
  in.Q = h.transpose() * h;
  in.q = random_vector(n, rng);
  in.r = random_vector(n, rng);
  in.A = Mat::Identity(n, n) + 0.3 * scale * random_matrix(n, n, rng);
  in.B = -Mat::Identity(n, n) + 0.3 * scale * random_matrix(n, n, rng);
  in.b = random_vector(n, rng);
  return in;
}

TwoBlockProblem make_quadratic_problem(const QuadraticInstance& in, const QuadraticSplit& split) {
  if (split.h1_share < 0.0 || split.h1_share >= 1.0 || split.h2_share < 0.0 ||
      split.h2_share > 1.0) {
    throw ArgumentError("make_quadratic_problem: shares must lie in [0, 1) for h1 and [0, 1] for h2");
  }
  const Index n = in.P.rows();
  const Index m = in.Q.rows();
  const Mat pf = (1.0 - split.h1_share) * in.P;
  const Mat qg = (1.0 - split.h2_share) * in.Q;

  auto solver = std::make_shared<const Eigen::LDLT<Mat>>(pf);
  const Vec q = in.q;
  auto argmin = [solver, q](const Vec& w) -> Vec { return solver->solve(w - q); };

  ProxFn h1 = split.h1_share > 0.0 ? quadratic_function(split.h1_share * in.P, Vec::Zero(n))
                                   : zero_function(n);
  ProxFn h2 = split.h2_share > 0.0 ? quadratic_function(split.h2_share * in.Q, Vec::Zero(m))
                                   : zero_function(m);

  return TwoBlockProblem{quadratic_function(pf, in.q),
                         std::move(h1),
                         quadratic_function(qg, in.r),
                         std::move(h2),
                         make_dense(in.A),
                         make_dense(in.B),
                         in.b,
                         argmin,
                         std::nullopt,
                         std::nullopt};
}

Vec prox_grid_oracle(const std::function<double(const Vec&)>& value, double gamma, const Vec& x,
                     double lo, double hi, int grid_n) {
  const Index d = x.size();
  if (d < 1 || d > 2) throw ArgumentError("prox_grid_oracle: dimension must be 1 or 2");
  if (grid_n < 2 || !(hi > lo)) throw ArgumentError("prox_grid_oracle: bad grid");

  auto objective = [&](const Vec& y) {
    const double v = value(y);
    return std::isfinite(v) ? gamma * v + 0.5 * (y - x).squaredNorm() : kInfinity;
  };

  auto search = [&](const Vec& a, const Vec& b) {
    Vec best = a;
    double best_val = kInfinity;
    Vec y(d);
    const int n1 = grid_n;
    const int n2 = d == 2 ? grid_n : 1;
    for (int i = 0; i < n1; ++i) {
      y[0] = a[0] + (b[0] - a[0]) * i / (grid_n - 1);
      for (int j = 0; j < n2; ++j) {
        if (d == 2) y[1] = a[1] + (b[1] - a[1]) * j / (grid_n - 1);
        const double v = objective(y);
        if (v < best_val) {
          best_val = v;
          best = y;
        }
      }
    }
    return best;
  };

  const Vec lower = Vec::Constant(d, lo);
  const Vec upper = Vec::Constant(d, hi);
  const Vec coarse = search(lower, upper);
  const double cell = (hi - lo) / (grid_n - 1);
  const Vec a = (coarse.array() - cell).max(lo).matrix();
  const Vec b = (coarse.array() + cell).min(hi).matrix();
  return search(a, b);
}

Certificate subgradient_certificate(const std::function<double(const Vec&)>& value, double gamma,
                                    const Vec& x, const Vec& p, int sample_count,
                                    std::uint64_t seed) {
  Certificate cert;
  const double fp = value(p);
  if (!std::isfinite(fp)) {
    cert.pass = false;
    cert.worst_slack = -kInfinity;
    return cert;
  }
  const Vec u = (x - p) / gamma;
  double worst = kInfinity;
  auto probe = [&](const Vec& y) {
    const double fy = value(y);
    if (!std::isfinite(fy)) return;
    worst = std::min(worst, fy - fp - u.dot(y - p));
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const double base = 1.0 + p.norm();
  const double scales[] = {1e-4, 1e-2, 1.0, 10.0};
  for (int s = 0; s < sample_count; ++s) {
    Vec dir(p.size());
    for (Index i = 0; i < p.size(); ++i) dir[i] = dist(rng);
    probe(p + scales[s % 4] * base * dir / std::max(dir.norm(), 1e-300));
  }
  for (Index i = 0; i < p.size(); ++i) {
    for (double delta : {1e-6, 1e-3, 1.0}) {
      Vec y = p;
      y[i] += delta;
      probe(y);
      y[i] = p[i] - delta;
      probe(y);
    }
  }
  cert.worst_slack = worst;
  cert.pass = worst >= -1e-9;
  return cert;
}

}  // namespace proxama::oracle
