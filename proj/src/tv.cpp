#include "proxama/tv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "proxama/errors.hpp"
#include "proxama/prox.hpp"

namespace proxama::tv {

std::string to_string(TvVariant variant) {
  return variant == TvVariant::anisotropic ? "aniso" : "iso";
}

TvVariant parse_variant(const std::string& name) {
  if (name == "aniso" || name == "anisotropic") return TvVariant::anisotropic;
  if (name == "iso" || name == "isotropic") return TvVariant::isotropic;
  throw ConfigError("unknown TV variant '" + name + "' (expected aniso or iso)");
}

double TvDualInstance::tv_term(const Vec& image) const {
  const Vec d = gradient.apply(image);
  const Index n = shape.size();
  if (variant == TvVariant::anisotropic) return lambda * d.lpNorm<1>();
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += std::hypot(d[i], d[n + i]);
  return lambda * s;
}

double TvDualInstance::primal_objective(const Vec& image) const {
  return 0.5 * (blur.apply(image) - b).squaredNorm() + tv_term(image);
}

double TvDualInstance::dual_objective(const Vec& p, const Vec& q) const {
  return -(problem.f.value(p) + problem.g.value(q));
}

TvDualInstance build_tv_dual(const Vec& observed, const ImageShape& shape, double lambda,
                             TvVariant variant, const BlurSettings& blur_settings) {
  if (!(lambda > 0.0)) throw ArgumentError("build_tv_dual: lambda must be positive");
  if (observed.size() != shape.size()) throw DimensionError("build_tv_dual: image size mismatch");
  const Index n = shape.size();

  LinearMap blur = make_gaussian_blur(shape, blur_settings.kernel_size, blur_settings.std_dev);
  LinearMap grad = make_discrete_gradient(shape);
  ProxFn g = variant == TvVariant::anisotropic ? box_indicator(2 * n, -lambda, lambda)
                                               : pairwise_l2_ball_indicator(n, lambda);
  const Vec b = observed;
  TwoBlockProblem problem{half_squared_norm_plus_linear(b),
                          zero_function(n),
                          std::move(g),
                          zero_function(2 * n),
                          blur.transposed(),
                          grad.transposed(),
                          Vec::Zero(n),
                          [b](const Vec& w) -> Vec { return w - b; },
                          std::nullopt,
                          std::nullopt};
  prepare(problem);
  return TvDualInstance{shape, observed, std::move(blur), std::move(grad), lambda, variant,
                        std::move(problem)};
}

void fill_objectives(const TvDualInstance& instance, const IterateState& state, TraceRow& row) {
  row.objective_primal = instance.primal_objective(state.p);
  row.objective_dual = instance.dual_objective(state.x, state.z);
}

RunRecord run_tv_scheme(const TvDualInstance& in, double c, double sigma, long iters,
                        bool keep_iterates,
                        const std::function<void(const IterateState&, TraceRow&)>& on_row,
                        std::optional<IterateState> start) {
  if (!(c > 0.0) || !(sigma > 0.0)) throw ConfigError("run_tv_scheme: c and sigma must be positive");
  if (sigma * c * 8.0 > 1.0) {
    throw ConfigError("run_tv_scheme: sigma * c * 8 = " + std::to_string(sigma * c * 8.0) +
                      " exceeds 1");
  }
  if (iters < 0) throw ConfigError("run_tv_scheme: negative iteration count");

  const LinearMap& A = in.blur;
  const LinearMap& L = in.gradient;
  const ProxFn& g = in.problem.g;
  const Index n = in.shape.size();

  RunRecord record;
  record.validation.valid = true;
  IterateState s = start ? *start : IterateState{Vec::Zero(n), Vec::Zero(2 * n), Vec::Zero(n), 0};
  if (s.x.size() != n || s.z.size() != 2 * n || s.p.size() != n) {
    throw DimensionError("run_tv_scheme: starting point has wrong dimensions");
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto push_row = [&](const IterateState& st) {
    TraceRow row;
    row.iter = st.k;
    row.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const KktResiduals kkt = kkt_residuals(in.problem, st);
    row.feasibility = kkt.r_feas;
    row.kkt_f = kkt.r_f;
    row.kkt_g = kkt.r_g;
    fill_objectives(in, st, row);
    if (on_row) on_row(st, row);
    record.rows.push_back(std::move(row));
    if (keep_iterates) record.iterates.push_back(st);
  };

  push_row(s);
  for (long k = 0; k < iters; ++k) {
    IterateState next;
    next.k = s.k + 1;
    next.x = A.apply(s.p) - in.b;
    const Vec r = -A.adjoint(next.x);
    next.z = g.prox(sigma, s.z + sigma * c * L.apply(r - L.adjoint(s.z)) + sigma * L.apply(s.p));
    next.p = s.p + c * (r - L.adjoint(next.z));
    if (!next.p.allFinite() || !next.z.allFinite()) {
      throw NumericalError("run_tv_scheme: non-finite iterate", next.k);
    }
    s = std::move(next);
    push_row(s);
  }
  record.status = RunStatus::max_iter;
  record.final_state = s;
  return record;
}

IterateState observed_start(const TvDualInstance& instance) {
  const Index n = instance.shape.size();
  return IterateState{Vec::Zero(n), Vec::Zero(2 * n), instance.b, 0};
}

Vec synthetic_shapes_image(const ImageShape& shape, std::uint64_t seed) {
  if (shape.rows < 8 || shape.cols < 8) throw ArgumentError("synthetic_shapes_image: image too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const double rows = static_cast<double>(shape.rows);
  const double cols = static_cast<double>(shape.cols);

  // Shape geometry in unit coordinates (u down, v right).
  const double r0 = 0.15 + jitter(rng), r1 = 0.45 + jitter(rng);
  const double c0 = 0.10 + jitter(rng), c1 = 0.50 + jitter(rng);
  const double du = 0.68 + jitter(rng), dv = 0.30 + jitter(rng), rad = 0.18;
  const double tu = 0.85 + jitter(rng), tv = 0.72 + jitter(rng), th = 0.35;

  Vec img(shape.size());
  for (Index i = 0; i < shape.rows; ++i) {
    for (Index j = 0; j < shape.cols; ++j) {
      const double u = (i + 0.5) / rows;
      const double v = (j + 0.5) / cols;
      double val = 0.2;
      if (u >= r0 && u <= r1 && v >= c0 && v <= c1) val = 0.8;
      if ((u - du) * (u - du) + (v - dv) * (v - dv) <= rad * rad) val = 0.5;
      // Triangle with apex at (tu - th, tv) and base on row tu.
      const double h = tu - u;
      if (h >= 0.0 && h <= th && std::abs(v - tv) <= 0.5 * (th - h)) val = 1.0;
      img[shape.flat(i, j)] = val;
    }
  }
  return img;
}

Vec degrade(const Vec& image, const LinearMap& blur, double noise_std, std::mt19937_64& rng) {
  if (noise_std < 0.0) throw ArgumentError("degrade: negative noise level");
  Vec out = blur.apply(image);
  if (noise_std > 0.0) {
    std::normal_distribution<double> dist(0.0, noise_std);
    for (Index i = 0; i < out.size(); ++i) out[i] += dist(rng);
  }
  return out;
}

}  // namespace proxama::tv
