#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "proxama/linop.hpp"
#include "proxama/solver.hpp"
#include "proxama/types.hpp"

namespace proxama::tv {

enum class TvVariant { anisotropic, isotropic };

std::string to_string(TvVariant variant);
/// Accepts "aniso"/"anisotropic" and "iso"/"isotropic".
TvVariant parse_variant(const std::string& name);

struct BlurSettings {
  int kernel_size = 9;
  double std_dev = 4.0;
};

/// Dual of  min 1/2 |Ax - b|^2 + lambda TV(x):
///
///   min f*(p) + g*(q)  s.t.  A*p + L*q = 0,   f*(p) = 1/2 |p|^2 + <p, b>.
///
/// In the two-block problem, the x-block is the dual image variable p, the
/// z-block is q = (q1, q2) and the multiplier is the primal image.
struct TvDualInstance {
  ImageShape shape;
  Vec b;
  LinearMap blur;
  LinearMap gradient;
  double lambda = 0.0;
  TvVariant variant = TvVariant::anisotropic;
  TwoBlockProblem problem;

  /// 1/2 |Ax - b|^2 + lambda TV(x) at the image x.
  double primal_objective(const Vec& image) const;
  /// -(f*(p) + g*(q)); a lower bound on the primal optimum when A*p + L*q = 0.
  double dual_objective(const Vec& p, const Vec& q) const;
  /// lambda TV(x) = g(Lx).
  double tv_term(const Vec& image) const;
};

TvDualInstance build_tv_dual(const Vec& observed, const ImageShape& shape, double lambda,
                             TvVariant variant, const BlurSettings& blur = {});

/// Overwrites the objective columns of a solver row with the image-space
/// primal objective (multiplier block) and the dual value.
void fill_objectives(const TvDualInstance& instance, const IterateState& state, TraceRow& row);

/// The specialized scheme
///   p+ = A x - b
///   q+ = P(q + sigma c L(-A*p+ - L*q) + sigma L x)
///   x+ = x + c(-A*p+ - L*q+)
/// with the state stored as (x = p, z = q, p = image). Rows carry the TV
/// objectives; `on_row` may add a task metric. Throws ConfigError when
/// sigma c 8 > 1.
RunRecord run_tv_scheme(const TvDualInstance& instance, double c, double sigma, long iters,
                        bool keep_iterates = false,
                        const std::function<void(const IterateState&, TraceRow&)>& on_row = {},
                        std::optional<IterateState> start = std::nullopt);

/// Zero dual variables with the observed image as the primal start. The
/// image mean is then already optimal; from a zero image it is a mode that
/// contracts only by |1 - c| per iteration.
IterateState observed_start(const TvDualInstance& instance);

/// Default stepsize and induced-metric parameter.
constexpr double kDefaultStepsize = 2.0 - 1e-7;
inline double default_sigma(double c) { return 1.0 / (8.00001 * c); }

/// Piecewise-constant test image with values in [0, 1]: background, a
/// rectangle, a disk and a triangle whose placement is jittered by the seed.
Vec synthetic_shapes_image(const ImageShape& shape, std::uint64_t seed);

/// Blur then add Gaussian noise.
Vec degrade(const Vec& image, const LinearMap& blur, double noise_std, std::mt19937_64& rng);

}  // namespace proxama::tv
