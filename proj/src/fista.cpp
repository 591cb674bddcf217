#include "proxama/fista.hpp"

#include <cmath>
#include <utility>

#include "proxama/errors.hpp"

namespace proxama {

FistaResult fista(const std::function<Vec(const Vec&)>& smooth_gradient, double lipschitz,
                  const std::function<Vec(double, const Vec&)>& prox, Vec x0,
                  const FistaSettings& settings) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw ArgumentError("fista: Lipschitz constant must be positive and finite");
  }
  const double step = 1.0 / lipschitz;
  FistaResult res;
  res.x = std::move(x0);
  Vec y = res.x;
  double t = 1.0;
  for (int it = 0; it < settings.max_iters; ++it) {
    Vec next = prox(step, y - step * smooth_gradient(y));
    if (!next.allFinite()) throw NumericalError("fista: non-finite iterate", it);
    res.mapping_norm = lipschitz * (y - next).norm();
    res.iterations = it + 1;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - res.x);
    res.x = std::move(next);
    t = t_next;
    if (res.mapping_norm <= settings.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace proxama
