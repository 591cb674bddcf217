#pragma once

#include <cstdint>
#include <functional>

#include "proxama/solver.hpp"
#include "proxama/types.hpp"

namespace proxama::oracle {

/// f(x) = 1/2 x'Px + q'x, g(z) = 1/2 z'Qz + r'z, Ax + Bz = b.
struct QuadraticInstance {
  Mat P;
  Vec q;
  Mat Q;
  Vec r;
  Mat A;
  Mat B;
  Vec b;
};

/// Saddle point of the quadratic instance from the KKT system
///   [P 0 -A'; 0 Q -B'; A B 0] (x, z, p) = (-q, -r, b)
/// solved by dense LU. Throws DegenerateInstanceError when singular.
IterateState quadratic_saddle(const QuadraticInstance& instance);

/// Random well-conditioned instance with n = dim variables in each block and
/// dim constraints: P >= 0.5 Id, Q positive semidefinite, B close to Id.
QuadraticInstance random_quadratic_instance(int dim, std::uint64_t seed);

/// Fractions of P (resp. Q) moved into the smooth terms h1 (resp. h2).
struct QuadraticSplit {
  double h1_share = 0.0;
  double h2_share = 0.0;
};

/// Wraps the instance as a TwoBlockProblem with closed-form f_argmin_linear.
TwoBlockProblem make_quadratic_problem(const QuadraticInstance& instance,
                                       const QuadraticSplit& split = {});

/// Brute-force prox: minimizes gamma value(y) + 1/2 |y - x|^2 over a grid of
/// `grid_n` points per axis on [lo, hi]^d (d = 1 or 2), then once more on a
/// grid of the same size spanning one cell around the best point.
Vec prox_grid_oracle(const std::function<double(const Vec&)>& value, double gamma, const Vec& x,
                     double lo, double hi, int grid_n);

struct Certificate {
  bool pass = false;
  /// min over probes of value(y) - value(p) - <(x - p)/gamma, y - p>
  double worst_slack = 0.0;
};

/// Checks that (x - p)/gamma is a subgradient of `value` at p, i.e. that p is
/// prox_{gamma value}(x), on seeded random probes and axis perturbations.
Certificate subgradient_certificate(const std::function<double(const Vec&)>& value, double gamma,
                                    const Vec& x, const Vec& p, int sample_count,
                                    std::uint64_t seed);

}  // namespace proxama::oracle
