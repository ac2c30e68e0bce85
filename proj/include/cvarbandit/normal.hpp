#pragma once

namespace cvarbandit {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc; absolute error well below 1e-12 on (1e-300, 1).
double normal_quantile(double p);

}  // namespace cvarbandit
