#include <doctest.h>

#include <cmath>
#include <random>

#include "proxama/errors.hpp"
#include "proxama/oracle.hpp"
#include "proxama/prox.hpp"

using namespace proxama;

TEST_CASE("saddle of the small instance by hand") {
  oracle::QuadraticInstance in;
  in.P = Mat::Identity(2, 2);
  in.Q = Mat::Identity(2, 2);
  in.q = Vec::Zero(2);
  in.r = Vec::Zero(2);
  in.A = Mat::Identity(2, 2);
  in.B = -Mat::Identity(2, 2);
  in.b = Vec::Ones(2);
  const IterateState s = oracle::quadratic_saddle(in);
  CHECK(s.x.isApprox(Vec::Constant(2, 0.5)));
  CHECK(s.z.isApprox(Vec::Constant(2, -0.5)));
  CHECK(s.p.isApprox(Vec::Constant(2, 0.5)));
  // Substitution: x - p = 0, z + p = 0, x - z = 1.
  CHECK((in.P * s.x + in.q - in.A.transpose() * s.p).norm() <= 1e-14);
  CHECK((in.Q * s.z + in.r - in.B.transpose() * s.p).norm() <= 1e-14);
  CHECK((in.A * s.x + in.B * s.z - in.b).norm() <= 1e-14);

  in.b.setZero();
  const IterateState zero = oracle::quadratic_saddle(in);
  CHECK(zero.x.isZero(0.0));
  CHECK(zero.z.isZero(0.0));
  CHECK(zero.p.isZero(0.0));
}

TEST_CASE("random instances satisfy the optimality system") {
  for (int dim = 2; dim <= 10; ++dim) {
    const auto in = oracle::random_quadratic_instance(dim, 1000 + dim);
    const IterateState s = oracle::quadratic_saddle(in);
    CHECK((in.P * s.x + in.q - in.A.transpose() * s.p).norm() <= 1e-10);
    CHECK((in.Q * s.z + in.r - in.B.transpose() * s.p).norm() <= 1e-10);
    CHECK((in.A * s.x + in.B * s.z - in.b).norm() <= 1e-10);
    CHECK(kkt_residuals(oracle::make_quadratic_problem(in), s).max() <= 1e-10);
    CHECK(kkt_residuals(oracle::make_quadratic_problem(in, {0.3, 0.6}), s).max() <= 1e-10);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(in.P).eigenvalues().minCoeff() >= 0.5 - 1e-12);
  }
}

TEST_CASE("random instances are reproducible") {
  const auto a = oracle::random_quadratic_instance(4, 9);
  const auto b = oracle::random_quadratic_instance(4, 9);
  CHECK(a.P == b.P);
  CHECK(a.b == b.b);
  CHECK_FALSE(a.P == oracle::random_quadratic_instance(4, 10).P);
}

TEST_CASE("degenerate instance") {
  oracle::QuadraticInstance in;
  in.P = Mat::Zero(2, 2);
  in.Q = Mat::Zero(2, 2);
  in.q = Vec::Zero(2);
  in.r = Vec::Zero(2);
  in.A = Mat::Zero(2, 2);
  in.B = Mat::Zero(2, 2);
  in.b = Vec::Ones(2);
  CHECK_THROWS_AS(oracle::quadratic_saddle(in), DegenerateInstanceError);
}

TEST_CASE("f_argmin_linear satisfies w in the subdifferential") {
  const auto in = oracle::random_quadratic_instance(5, 77);
  const TwoBlockProblem p = oracle::make_quadratic_problem(in);
  const Vec w = Vec::LinSpaced(5, -2, 3);
  const Vec x = p.f_argmin_linear(w);
  CHECK((p.f.gradient(x) - w).norm() <= 1e-10);
}

TEST_CASE("grid oracle examples") {
  const auto hinge = [](const Vec& z) { return std::max(1.0 - z[0], 0.0); };
  const Vec h = oracle::prox_grid_oracle(hinge, 1.0, Vec::Constant(1, 1.5), -3, 3, 60001);
  CHECK(h[0] == doctest::Approx(1.5).epsilon(1e-4));

  const auto l1 = [](const Vec& z) { return std::abs(z[0]); };
  CHECK(oracle::prox_grid_oracle(l1, 1.0, Vec::Constant(1, 3.0), -5, 5, 10001)[0] ==
        doctest::Approx(2.0).epsilon(2e-3));

  const auto ind = [](const Vec& z) { return std::abs(z[0]) <= 1.0 ? 0.0 : kInfinity; };
  CHECK(oracle::prox_grid_oracle(ind, 1.0, Vec::Constant(1, 5.0), -3, 3, 601)[0] ==
        doctest::Approx(1.0).epsilon(1e-9));

  const auto quad2 = [](const Vec& z) { return 0.5 * z.squaredNorm(); };
  Vec x(2);
  x << 1.0, -0.6;
  const Vec g = oracle::prox_grid_oracle(quad2, 1.0, x, -2, 2, 201);
  CHECK((g - x / 2).cwiseAbs().maxCoeff() <= 2 * 4.0 / 200);
}

TEST_CASE("subgradient certificate") {
  const ProxFn box = box_indicator(2, -1, 1);
  Vec x(2);
  x << 5.0, 0.3;
  CHECK(oracle::subgradient_certificate(box.value, 1.0, x, box.prox(1.0, x), 100, 1).pass);
  // p = x is infeasible, so value(p) is infinite and the certificate fails.
  CHECK_FALSE(oracle::subgradient_certificate(box.value, 1.0, x, x, 100, 1).pass);

  const ProxFn l1 = l1_norm(2, 1.0);
  const auto wrong = oracle::subgradient_certificate(l1.value, 1.0, x, x, 100, 1);
  CHECK_FALSE(wrong.pass);
  CHECK(wrong.worst_slack < 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0, 2);
  for (int t = 0; t < 100; ++t) {
    Vec y(3), p(3);
    for (int i = 0; i < 3; ++i) y[i] = (d(rng) > 0) ? 1.0 : -1.0, p[i] = d(rng);
    const double mu = 0.1 + std::abs(d(rng));
    const ProxFn hc = hinge_conjugate(y, 1.0);
    const Vec out = prox_hinge_conjugate(p, y, 1.0, mu);
    CHECK(oracle::subgradient_certificate(hc.value, mu, p, out, 100, t).pass);
  }
}
