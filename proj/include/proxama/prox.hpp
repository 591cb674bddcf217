#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>

#include "proxama/types.hpp"

namespace proxama {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A closed convex function seen through its proximal map.
///
/// `value` returns kInfinity outside the domain. `gradient` and `lipschitz`
/// are set only for smooth functions; `strong_convexity` is the modulus g such
/// that value - (g/2)|.|^2 is convex (0 when merely convex).
struct ProxFn {
  using Value = std::function<double(const Vec&)>;
  using Prox = std::function<Vec(double gamma, const Vec&)>;
  using Gradient = std::function<Vec(const Vec&)>;

  Index dim = 0;
  Value value;
  Prox prox;
  Gradient gradient;
  std::optional<double> lipschitz;
  double strong_convexity = 0.0;
  /// Set by zero_function; lets the classical AMA step check its precondition.
  bool identically_zero = false;

  bool smooth() const { return static_cast<bool>(gradient); }
};

// Building blocks -------------------------------------------------------------

/// Coordinatewise clamp to [lo, hi].
Vec project_box(const Vec& x, double lo, double hi);

/// Scales each pair (v_i, w_i) by lambda / max(lambda, |(v_i, w_i)|).
std::pair<Vec, Vec> project_pairwise_l2_ball(const Vec& v, const Vec& w, double lambda);

/// Prox of mu * g* for the hinge loss g(z) = C sum max(1 - z_i y_i, 0):
/// coordinate i is (p_i - mu y_i) projected onto y_i [-C, 0].
Vec prox_hinge_conjugate(const Vec& p, const Vec& labels, double C, double mu);

/// prox_{gamma f}(x) = x - gamma prox_{(1/gamma) f*}(x / gamma).
Vec prox_from_conjugate(const ProxFn::Prox& conj_prox, double gamma, const Vec& x);

/// |prox_{gamma f}(x) + gamma prox_{(1/gamma) f*}(x / gamma) - x|
double moreau_residual(const ProxFn::Prox& fn_prox, const ProxFn::Prox& conj_prox, double gamma,
                       const Vec& x);

/// Throws ArgumentError unless every entry is +1 or -1.
void check_labels(const Vec& labels);

// Function library ------------------------------------------------------------

ProxFn zero_function(Index dim);

/// x -> <a, x>; smooth with Lipschitz constant 0.
ProxFn linear_function(Vec a);

/// 0.5 |x|^2, its own conjugate.
ProxFn half_squared_norm(Index dim);

/// 0.5 |x|^2 + <b, x>; prox is (x - gamma b) / (1 + gamma).
ProxFn half_squared_norm_plus_linear(Vec b);

/// 0.5 x'Px + q'x with P symmetric positive semidefinite. Smooth; strong
/// convexity and Lipschitz constant are the extreme eigenvalues of P.
ProxFn quadratic_function(const Mat& P, const Vec& q);

/// lambda |x|_1
ProxFn l1_norm(Index dim, double lambda);

/// Indicator of [lo, hi]^dim.
ProxFn box_indicator(Index dim, double lo, double hi);

/// lambda sum_i |(v_i, w_i)| on stacked (v, w) of length 2n.
ProxFn pairwise_l2_norm(Index n, double lambda);

/// Indicator of {(v, w) : |(v_i, w_i)| <= lambda for all i}, length 2n.
ProxFn pairwise_l2_ball_indicator(Index n, double lambda);

/// C sum_i max(1 - z_i y_i, 0); prox through the conjugate and Moreau.
ProxFn hinge_loss(Vec labels, double C);

/// Conjugate of hinge_loss: sum p_i y_i if p_i y_i in [-C, 0] for all i.
ProxFn hinge_conjugate(Vec labels, double C);

}  // namespace proxama
