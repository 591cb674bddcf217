#include "proxama/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "proxama/errors.hpp"

namespace proxama {

double isnr(const Vec& original, const Vec& degraded, const Vec& current) {
  if (original.size() != degraded.size() || original.size() != current.size()) {
    throw DimensionError("isnr: image sizes differ");
  }
  const double num = (original - degraded).squaredNorm();
  const double den = (original - current).squaredNorm();
  if (den == 0.0) return kIsnrCap;
  if (num == 0.0) return -kIsnrCap;
  return std::min(kIsnrCap, 10.0 * std::log10(num / den));
}

double rmse(const Vec& x, const Vec& x_ref) {
  if (x.size() != x_ref.size()) throw DimensionError("rmse: sizes differ");
  if (x.size() == 0) throw ArgumentError("rmse: empty vectors");
  return (x - x_ref).norm() / std::sqrt(static_cast<double>(x.size()));
}

}  // namespace proxama
