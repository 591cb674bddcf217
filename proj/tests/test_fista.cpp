#include <doctest.h>

#include <cmath>

#include "proxama/errors.hpp"
#include "proxama/fista.hpp"
#include "proxama/oracle.hpp"
#include "proxama/prox.hpp"
#include "proxama/solver.hpp"

using namespace proxama;

TEST_CASE("unconstrained quadratic") {
  Vec a(3);
  a << 1.0, -2.0, 0.5;
  const auto grad = [&](const Vec& y) -> Vec { return y - a; };
  const auto none = [](double, const Vec& v) { return v; };
  const FistaResult r = fista(grad, 1.0, none, Vec::Zero(3), {500, 1e-12});
  CHECK((r.x - a).norm() <= 1e-8);
  CHECK(r.converged);
}

TEST_CASE("one-dimensional lasso") {
  const auto grad = [](const Vec& y) -> Vec { return (y.array() - 3.0).matrix(); };
  const ProxFn l1 = l1_norm(1, 1.0);
  const FistaResult r = fista(grad, 1.0, l1.prox, Vec::Zero(1), {1000, 1e-12});
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("iteration cap and bad input") {
  const auto grad = [](const Vec& y) -> Vec { return 1e-3 * y; };
  const auto none = [](double, const Vec& v) { return v; };
  const FistaResult r = fista(grad, 1.0, none, Vec::Ones(2), {3, 0.0});
  CHECK(r.iterations == 3);
  CHECK_FALSE(r.converged);
  CHECK_THROWS(fista(grad, 0.0, none, Vec::Ones(2), {3, 0.0}));
  const auto nan_grad = [](const Vec& y) -> Vec { return Vec::Constant(y.size(), std::nan("")); };
  CHECK_THROWS_AS(fista(nan_grad, 1.0, none, Vec::Ones(2), {5, 0.0}), NumericalError);
}

TEST_CASE("AMA z-subproblem matches a dense solve") {
  // argmin 1/2 z'Qz + r'z - <w, z> + c/2 |Bz - rhs|^2  <=>  (Q + c B'B) z = w - r + c B' rhs
  const auto inst = oracle::random_quadratic_instance(6, 11);
  TwoBlockProblem prob = oracle::make_quadratic_problem(inst);
  prepare(prob);
  const Vec w = Vec::LinSpaced(6, -1.0, 2.0);
  const Vec rhs = Vec::LinSpaced(6, 0.5, -0.5);
  const double c = 0.7;
  const Mat H = inst.Q + c * inst.B.transpose() * inst.B;
  const Vec expected = H.ldlt().solve(w - inst.r + c * inst.B.transpose() * rhs);
  const Vec got = solve_z_subproblem(prob, Vec::Zero(6), w, rhs, c, {}, 0.0, {5000, 1e-12});
  CHECK((got - expected).norm() <= 1e-6);
}
