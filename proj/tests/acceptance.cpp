// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion was evaluated (whatever its verdict)
// and 1 if the suite itself crashed. With --strict, any FAIL also gives 1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "proxama/cli.hpp"
#include "proxama/io.hpp"
#include "proxama/metrics.hpp"
#include "proxama/oracle.hpp"
#include "proxama/svm.hpp"
#include "proxama/tv.hpp"

using namespace proxama;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << (ok ? "" : "FAILED ") << what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double distance(const IterateState& a, const IterateState& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.z - b.z).squaredNorm() + (a.p - b.p).squaredNorm());
}

TwoBlockProblem prepared(const oracle::QuadraticInstance& in, oracle::QuadraticSplit split = {}) {
  TwoBlockProblem p = oracle::make_quadratic_problem(in, split);
  prepare(p);
  return p;
}

std::vector<oracle::QuadraticInstance> random_instances() {
  std::vector<oracle::QuadraticInstance> out;
  for (int t = 0; t < 20; ++t) out.push_back(oracle::random_quadratic_instance(2 + t % 9, 1000 + t));
  return out;
}

// 1 ----------------------------------------------------------------------------

void quadratic_convergence(Verdict& v) {
  const auto in = cli::parse_qp_json(io::read_text(std::string(PROXAMA_DATA_DIR) + "/qp_small.json"));
  const auto t0 = Clock::now();
  const TwoBlockProblem p = prepared(in);
  const IterateState saddle = oracle::quadratic_saddle(in);
  const double c = p.f.strong_convexity / (*p.a_norm * *p.a_norm);
  SolverConfig cfg;
  cfg.stepsize = constant_schedule(c);
  cfg.max_iter = 5000;
  cfg.feasibility_tol = 0.0;
  long hit = -1;
  SolveCallbacks cb;
  cb.on_row = [&](const IterateState& s, TraceRow&) {
    if (hit < 0 && distance(s, saddle) <= 1e-8) hit = s.k;
  };
  const MetricRule m2 = MetricRule::induced(constant_schedule(1.0 / (2.0 * c * *p.b_norm * *p.b_norm)));
  solve(p, cfg, MetricRule::zero(), m2, Algorithm::proximal_ama, cb);
  const double secs = seconds_since(t0);
  v.require(hit >= 0, "distance <= 1e-8 reached at iteration " + std::to_string(hit));
  v.require(secs < 1.0, "runtime " + num(secs) + " s < 1 s");
}

// 2 ----------------------------------------------------------------------------

void lyapunov_suite(Verdict& v) {
  long rows = 0, v_bad = 0, r_bad = 0, runs = 0;
  double worst_increase = -kInfinity, worst_summand = kInfinity;
  for (int cfg_id = 0; cfg_id < 6; ++cfg_id) {
    for (const auto& in : random_instances()) {
      const oracle::QuadraticSplit split = cfg_id >= 3 ? oracle::QuadraticSplit{0.3, 0.4} : oracle::QuadraticSplit{};
      const TwoBlockProblem p = prepared(in, split);
      const double l1 = p.h1.lipschitz.value_or(0.0), l2 = p.h2.lipschitz.value_or(0.0);
      const double c = p.f.strong_convexity / (*p.a_norm * *p.a_norm);
      MetricRule m1 = MetricRule::zero(), m2 = MetricRule::zero();
      switch (cfg_id % 3) {
        case 0:
          m1 = MetricRule::scaled_identity(constant_schedule(l1 / 2 + 0.5));
          m2 = MetricRule::scaled_identity(constant_schedule(l2 / 2 + 0.3));
          break;
        case 1:
          m1 = MetricRule::scaled_identity(constant_schedule(l1 / 2 + 1.0));
          m2 = MetricRule::induced(constant_schedule(1.0 / (c * *p.b_norm * *p.b_norm + l2 + 1.0)));
          break;
        default:
          if (l1 > 0) m1 = MetricRule::scaled_identity(constant_schedule(l1 / 2));
          if (l2 > 0) m2 = MetricRule::scaled_identity(constant_schedule(l2 / 2));
      }
      SolverConfig cfg;
      cfg.stepsize = constant_schedule(c);
      cfg.max_iter = 300;
      cfg.feasibility_tol = 1e-13;
      cfg.inner = FistaSettings{5000, 1e-13};
      SolveCallbacks cb;
      cb.saddle = oracle::quadratic_saddle(in);
      const RunRecord rec = solve(p, cfg, m1, m2, Algorithm::proximal_ama, cb);
      if (rec.status == RunStatus::invalid_config) {
        v.require(false, "configuration rejected: " + rec.validation.summary());
        return;
      }
      ++runs;
      for (std::size_t i = 1; i < rec.rows.size(); ++i) {
        const double vk = *rec.rows[i - 1].lyapunov, vn = *rec.rows[i].lyapunov;
        worst_increase = std::max(worst_increase, (vn - vk) / (1 + vk));
        if (vn > vk + 1e-9 * (1 + vk)) ++v_bad;
        for (double r : rec.rows[i].r_summands) {
          worst_summand = std::min(worst_summand, r);
          if (r < -1e-12) ++r_bad;
        }
        ++rows;
      }
    }
  }
  v.require(v_bad == 0, std::to_string(runs) + " runs, " + std::to_string(rows) + " steps, " +
                            std::to_string(v_bad) + " V increases (worst relative change " +
                            num(worst_increase) + ")");
  v.require(r_bad == 0, std::to_string(r_bad) + " negative R summands (min " + num(worst_summand) + ")");
}

// 3 ----------------------------------------------------------------------------

void reduction_equivalence(Verdict& v) {
  auto instances = random_instances();
  instances.push_back(cli::parse_qp_json(io::read_text(std::string(PROXAMA_DATA_DIR) + "/qp_small.json")));
  long compared = 0, mismatched = 0;
  for (const auto& in : instances) {
    const TwoBlockProblem p = prepared(in);
    SolverConfig cfg;
    cfg.stepsize = constant_schedule(0.9 * p.f.strong_convexity / (*p.a_norm * *p.a_norm));
    cfg.max_iter = 200;
    cfg.feasibility_tol = 0.0;
    cfg.keep_iterates = true;
    const RunRecord a = solve(p, cfg, MetricRule::zero(), MetricRule::zero(), Algorithm::ama);
    const RunRecord b = solve(p, cfg, MetricRule::zero(), MetricRule::zero(), Algorithm::proximal_ama);
    if (a.iterates.size() != b.iterates.size()) {
      ++mismatched;
      continue;
    }
    for (std::size_t k = 0; k < a.iterates.size(); ++k) {
      const bool same = a.iterates[k].x == b.iterates[k].x && a.iterates[k].z == b.iterates[k].z &&
                        a.iterates[k].p == b.iterates[k].p &&
                        a.rows[k].objective_primal == b.rows[k].objective_primal &&
                        a.rows[k].feasibility == b.rows[k].feasibility;
      if (!same) ++mismatched;
      ++compared;
    }
  }
  v.require(mismatched == 0, std::to_string(instances.size()) + " instances, " + std::to_string(compared) +
                                 " iterates, " + std::to_string(mismatched) + " differ bitwise");
}

// 4 ----------------------------------------------------------------------------

void induced_equivalence(Verdict& v) {
  const ImageShape shape{16, 16};
  const Vec original = tv::synthetic_shapes_image(shape, 42);
  std::mt19937_64 rng(42);
  const Vec observed = tv::degrade(original, make_gaussian_blur(shape, 9, 4.0), 1e-3, rng);
  double worst = 0.0;
  for (auto variant : {tv::TvVariant::anisotropic, tv::TvVariant::isotropic}) {
    const auto inst = tv::build_tv_dual(observed, shape, 5e-5, variant);
    const double c = tv::kDefaultStepsize, sigma = tv::default_sigma(c);
    const MetricRule m2 = MetricRule::induced(constant_schedule(sigma));
    IterateState s = tv::observed_start(inst);
    for (int k = 0; k < 20; ++k) {
      const IterateState next = proximal_ama_step(inst.problem, s, c, MetricRule::zero(), m2, {});
      const Vec generic = proximal_ama_z_generic(inst.problem, s, next.x, c, m2, {5000, 1e-13});
      worst = std::max(worst, (next.z - generic).lpNorm<Eigen::Infinity>());
      s = next;
    }
  }
  v.require(worst <= 1e-6, "max deviation over 20 iterates, both variants: " + num(worst));
}

// 5 ----------------------------------------------------------------------------

void tv_trend(Verdict& v) {
  const auto t0 = Clock::now();
  const ImageShape shape{64, 64};
  const Vec original = tv::synthetic_shapes_image(shape, 42);
  std::mt19937_64 rng(42);
  const Vec observed = tv::degrade(original, make_gaussian_blur(shape, 9, 4.0), 1e-3, rng);
  const double c = tv::kDefaultStepsize, sigma = tv::default_sigma(c);
  double prox_time = 0.0, ama_time = 0.0;

  for (auto variant : {tv::TvVariant::anisotropic, tv::TvVariant::isotropic}) {
    const std::string name = tv::to_string(variant);
    const auto inst = tv::build_tv_dual(observed, shape, 5e-5, variant);
    const auto isnr_row = [&](const IterateState& s, TraceRow& row) { row.metric = isnr(original, observed, s.p); };

    auto tp = Clock::now();
    const RunRecord prox = tv::run_tv_scheme(inst, c, sigma, 3000, false, isnr_row, tv::observed_start(inst));
    prox_time += seconds_since(tp);
    // The start has zero dual variables and hence zero residual, so "falls
    // below" means: stays below from some iteration on.
    long last_above = -1;
    for (const auto& r : prox.rows) {
      if (r.feasibility >= 1e-4) last_above = r.iter;
    }
    v.require(last_above < 3000, name + ": feasibility < 1e-4 from iteration " + std::to_string(last_above + 1) +
                                     " on (at 3000: " + num(prox.rows.back().feasibility) + ")");

    SolverConfig cfg;
    cfg.stepsize = constant_schedule(c);
    cfg.max_iter = 500;
    cfg.feasibility_tol = 0.0;
    SolveCallbacks cb;
    cb.on_row = [&](const IterateState& s, TraceRow& row) {
      tv::fill_objectives(inst, s, row);
      isnr_row(s, row);
    };
    auto ta = Clock::now();
    const RunRecord ama = solve(inst.problem, cfg, MetricRule::zero(), MetricRule::zero(), Algorithm::ama, cb,
                                tv::observed_start(inst));
    ama_time += seconds_since(ta);
    const double op = prox.rows[500].objective_primal, oa = ama.rows[500].objective_primal;
    v.require(op <= oa, name + ": objective at 500, proximal " + num(op) + " vs ama " + num(oa) + " (diff " +
                            num(op - oa) + ")");
    const double i10 = *prox.rows[10].metric, i200 = *prox.rows[200].metric;
    const double a10 = *ama.rows[10].metric, a200 = *ama.rows[200].metric;
    v.require(i200 > i10 && a200 > a10, name + ": ISNR 10 -> 200, proximal " + num(i10) + " -> " + num(i200) +
                                            " dB, ama " + num(a10) + " -> " + num(a200) + " dB");
  }
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "runtime " + num(secs) + " s < 60 s");
  v.detail << "; info: CPU time per iteration, proximal " << num(prox_time / 6000) << " s vs ama "
           << num(ama_time / 1000) << " s";
}

// 6 ----------------------------------------------------------------------------

void svm_suite(Verdict& v) {
  const auto t0 = Clock::now();
  const svm::Dataset d = svm::synthetic_blobs(200, 100, 42);
  const auto prox = svm::build_svm(d.train, d.train_labels, 1.0, 0.2, 10.0);
  const auto ama = svm::build_svm(d.train, d.train_labels, 1.0, 0.2, 0.0);
  const double c = prox.recommended_stepsize();

  // Closed-form tau K x-update against (K + tau K)^{-1} (K p + tau K x).
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0, 1);
  IterateState s = zero_state(prox.problem);
  for (Index i = 0; i < s.x.size(); ++i) s.x[i] = nd(rng), s.p[i] = nd(rng);
  const Vec hook = proximal_ama_step(prox.problem, s, c, prox.m1, prox.m2, {}).x;
  const Vec dense = ((1.0 + prox.tau) * prox.K).ldlt().solve(prox.K * s.p + prox.tau * prox.K * s.x);
  const double dev = (hook - dense).lpNorm<Eigen::Infinity>();
  v.require(dev <= 1e-10, "x-update vs dense solve " + num(dev));

  const Vec reference = svm::reference_solution(prox, c, 20000);
  const Mat cross = svm::cross_kernel(d.test, d.train, 0.2);
  SolverConfig cfg;
  cfg.stepsize = constant_schedule(c);
  cfg.max_iter = 2000;
  cfg.feasibility_tol = 0.0;
  auto first_hit = [&](const svm::SvmInstance& inst, double& misclass) {
    long hit = -1;
    SolveCallbacks cb;
    cb.on_row = [&](const IterateState& st, TraceRow&) {
      if (hit < 0 && rmse(st.x, reference) <= 1e-3) hit = st.k;
    };
    const RunRecord rec = solve(inst.problem, cfg, inst.m1, inst.m2, Algorithm::proximal_ama, cb);
    misclass = svm::misclassification_rate(cross * rec.final_state.x, d.test_labels);
    return hit;
  };
  double mp = 0.0, ma = 0.0;
  const long hp = first_hit(prox, mp);
  const long ha = first_hit(ama, ma);
  v.require(mp <= 5.0 && ma <= 5.0, "test misclassification proximal " + num(mp) + "%, ama " + num(ma) + "%");
  v.require(hp >= 0 && (ha < 0 || hp <= ha),
            "RMSE <= 1e-3 at iteration proximal " + std::to_string(hp) + ", ama " + std::to_string(ha));
  const double secs = seconds_since(t0);
  v.require(secs < 30.0, "runtime " + num(secs) + " s < 30 s");
}

// 7 ----------------------------------------------------------------------------

void operator_suite(Verdict& v) {
  Mat m(5, 7);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 1);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  const LinearMap blur = make_gaussian_blur({32, 32}, 9, 4.0);
  const std::vector<std::pair<std::string, LinearMap>> ops = {
      {"dense", make_dense(m)},
      {"identity", make_scaled_identity(9, 1.5)},
      {"gradient", make_discrete_gradient({16, 16})},
      {"blur", blur}};
  double worst = 0.0;
  for (const auto& [name, op] : ops) worst = std::max(worst, adjoint_mismatch(op, 100, 7));
  v.require(worst <= 1e-10, "adjoint mismatch " + num(worst));

  const double gn = estimate_norm(make_discrete_gradient({16, 16}));
  v.require(gn * gn <= 8.0 + 1e-6, "gradient norm^2 " + num(gn * gn));

  double self = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vec x(blur.in_dim());
    for (Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
    self = std::max(self, (blur.apply(x) - blur.adjoint(x)).norm() / x.norm());
  }
  v.require(self <= 1e-12, "blur self-adjointness " + num(self));
  const double bn = estimate_norm(blur);
  v.require(std::abs(bn - 1.0) <= 1e-8, "blur norm " + std::to_string(bn));
}

// 8 ----------------------------------------------------------------------------

void prox_suite(Verdict& v) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd(0, 1.5);
  std::uniform_real_distribution<double> ug(0.05, 3.0);
  auto rand_vec = [&](Index n) {
    Vec x(n);
    for (Index i = 0; i < n; ++i) x[i] = nd(rng);
    return x;
  };
  Vec labels(6);
  labels << 1, -1, 1, 1, -1, -1;
  const ProxFn sq = half_squared_norm(6);
  const ProxFn hinge = hinge_loss(labels, 1.0), hinge_c = hinge_conjugate(labels, 1.0);
  const ProxFn l1 = l1_norm(6, 0.4), box = box_indicator(6, -0.4, 0.4);
  const ProxFn tvn = pairwise_l2_norm(3, 0.4), ball = pairwise_l2_ball_indicator(3, 0.4);
  const std::vector<std::pair<const ProxFn*, const ProxFn*>> pairs = {
      {&sq, &sq}, {&hinge, &hinge_c}, {&l1, &box}, {&tvn, &ball}};
  double moreau = 0.0;
  for (const auto& [f, fc] : pairs) {
    for (int t = 0; t < 100; ++t) moreau = std::max(moreau, moreau_residual(f->prox, fc->prox, ug(rng), rand_vec(6)));
  }
  v.require(moreau <= 1e-10, "Moreau residual " + num(moreau));

  const std::vector<const ProxFn*> all = {&sq, &hinge, &hinge_c, &l1, &box, &tvn, &ball};
  double slack = kInfinity;
  int failures = 0;
  for (const ProxFn* f : all) {
    for (int t = 0; t < 100; ++t) {
      const double g = ug(rng);
      const Vec x = rand_vec(6);
      const auto cert = oracle::subgradient_certificate(f->value, g, x, f->prox(g, x), 100, t);
      slack = std::min(slack, cert.worst_slack);
      if (!cert.pass) ++failures;
    }
  }
  v.require(failures == 0, std::to_string(failures) + " certificate failures (worst slack " + num(slack) + ")");

  Vec y2(2);
  y2 << 1, -1;
  const std::vector<std::pair<ProxFn, Index>> small = {
      {l1_norm(1, 0.7), 1},           {l1_norm(2, 0.7), 2},           {box_indicator(1, -1, 1), 1},
      {box_indicator(2, -1, 0.5), 2}, {hinge_loss(Vec::Ones(1), 1), 1}, {hinge_loss(y2, 1), 2},
      {hinge_conjugate(Vec::Ones(1), 1), 1}, {hinge_conjugate(y2, 1), 2}, {pairwise_l2_norm(1, 0.5), 2},
      {pairwise_l2_ball_indicator(1, 0.5), 2}, {half_squared_norm(1), 1}, {half_squared_norm(2), 2}};
  double worst_ratio = 0.0;
  for (const auto& [f, dim] : small) {
    const int n = dim == 1 ? 4001 : 301;
    const double res = 8.0 / (n - 1);
    for (int t = 0; t < 5; ++t) {
      const double g = ug(rng);
      const Vec x = rand_vec(dim);
      const Vec p = f.prox(g, x);
      const Vec grid = oracle::prox_grid_oracle(f.value, g, x, -4.0, 4.0, n);
      worst_ratio = std::max(worst_ratio, (p - grid).cwiseAbs().maxCoeff() / res);
    }
  }
  v.require(worst_ratio <= 2.0, "grid oracle deviation " + num(worst_ratio) + " x resolution");
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
      {"quadratic oracle convergence", quadratic_convergence},
      {"Lyapunov suite", lyapunov_suite},
      {"reduction equivalence", reduction_equivalence},
      {"induced-metric equivalence", induced_equivalence},
      {"TV trend reproduction", tv_trend},
      {"SVM suite", svm_suite},
      {"operator suite", operator_suite},
      {"prox suite", prox_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      std::printf("CRASH %zu %s: %s\n", i + 1, criteria[i].first.c_str(), e.what());
      return 1;
    }
    if (!v.pass) ++failed;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return strict && failed > 0 ? 1 : 0;
}
