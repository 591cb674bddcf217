#pragma once

#include <functional>

#include "proxama/types.hpp"

namespace proxama {

struct FistaSettings {
  int max_iters = 200;
  /// Stop once the composite gradient mapping |L (y - x+)| drops below this.
  double tol = 1e-8;
};

struct FistaResult {
  Vec x;
  int iterations = 0;
  double mapping_norm = 0.0;
  bool converged = false;
};

/// Accelerated proximal gradient for min s(y) + n(y), where s has an
/// L-Lipschitz gradient and n is given through prox(step, v).
FistaResult fista(const std::function<Vec(const Vec&)>& smooth_gradient, double lipschitz,
                  const std::function<Vec(double, const Vec&)>& prox, Vec x0,
                  const FistaSettings& settings);

}  // namespace proxama
