#pragma once

#include "proxama/types.hpp"

namespace proxama {

/// Returned by isnr when the current image equals the original.
constexpr double kIsnrCap = 300.0;

/// 10 log10(|original - degraded|^2 / |original - current|^2), in dB.
double isnr(const Vec& original, const Vec& degraded, const Vec& current);

/// |x - x_ref| / sqrt(dim)
double rmse(const Vec& x, const Vec& x_ref);

}  // namespace proxama
