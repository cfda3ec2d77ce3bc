#pragma once

#include <span>

namespace crows {

/// Standard normal CDF.
[[nodiscard]] double norm_cdf(double x);

/// Standard normal quantile (inverse CDF), accurate to ~1e-15 over (0,1).
/// Throws param_error for p outside (0,1).
[[nodiscard]] double norm_quantile(double p);

/// Student-t CDF with integer degrees of freedom df >= 1. Exact finite
/// trigonometric recurrence (no incomplete-beta evaluation needed).
[[nodiscard]] double student_t_cdf(double t, int df);

/// Student-t quantile with integer df >= 1, p in (0,1). Bracketing bisection
/// on student_t_cdf; absolute accuracy near double precision.
[[nodiscard]] double student_t_quantile(double p, int df);

/// Median of a sample (even length: mean of the two middle order statistics).
/// Throws param_error on an empty sample.
[[nodiscard]] double median(std::span<const double> values);

}  // namespace crows
