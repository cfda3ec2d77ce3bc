#pragma once

#include <span>
#include <vector>

#include "crows/design.hpp"

namespace crows {

// Screen analysis for a single assay response: center and rescale the design,
// trace an L1-regularized coefficient path, then pick a model by thresholding
// each path point at sigma/8 in the known effect direction, refitting by
// least squares and scoring with BIC. The declared hits are the winning
// model's factors whose refit estimates still clear the directional
// threshold.

/// Column standardization record. Columns are centered to mean zero and
/// rescaled so each squared length equals n; constant columns cannot be
/// standardized and are set aside (their coefficients are pinned at zero).
struct CenterScale {
  int n = 0;
  int k = 0;
  Design source;                  // the design the record was built from
  std::vector<int> kept;          // original 0-based column indices, ascending
  std::vector<int> dropped;       // constant columns
  std::vector<double> col_mean;   // per kept column
  std::vector<double> col_scale;  // per kept column; beta_original = beta * col_scale
  std::vector<double> x;          // column-major, n rows by kept.size() columns
  std::vector<double> y_centered;
  double y_mean = 0.0;
};

/// Standardize a design against a response of length n. Throws param_error on
/// a length mismatch and data_error when every column is constant (nothing
/// estimable).
[[nodiscard]] CenterScale center_scale(const Design& d, std::span<const double> y);

struct LassoConfig {
  int grid_size = 100;
  /// Smallest penalty is scale_sigma * exp(lambda_floor_log) / n.
  double lambda_floor_log = -8.0;
  /// Response scale (the noise sd). Multiplies the penalty floor and the
  /// convergence tolerance so the whole path is scale-equivariant.
  double scale_sigma = 1.0;
  double tol = 1e-8;  // per-sweep max coefficient change, times scale_sigma
  /// A grid point only counts as converged once its verified stationarity
  /// gap (see lasso_kkt_residual) is below this, times scale_sigma.
  double kkt_tol = 1e-7;
  int max_sweeps = 1000000;
};

/// Penalized path in the standardized coordinates, computed by cyclic
/// coordinate descent with warm starts along a descending log-spaced grid.
/// The grid starts exactly at the smallest penalty that zeroes every
/// coefficient, so beta[0] is exactly zero.
struct LassoPath {
  std::vector<double> lambda;             // descending, grid_size entries
  std::vector<std::vector<double>> beta;  // per lambda, one value per kept column
  std::vector<char> converged;            // per lambda
  double lambda_max = 0.0;
  double intercept = 0.0;  // model intercept in centered coordinates (= mean of y)
};

[[nodiscard]] LassoPath lasso_path(const CenterScale& cs, const LassoConfig& cfg = {});

/// Largest violation of the penalized stationarity conditions at the given
/// coefficients: for zero coefficients the excess of |gradient| over lambda,
/// for active ones |gradient + lambda * sign|. Zero at an exact optimum.
[[nodiscard]] double lasso_kkt_residual(const CenterScale& cs, std::span<const double> beta,
                                        double lambda);

/// Map one path point back to original +-1 coding (length k, dropped columns
/// zero).
[[nodiscard]] std::vector<double> original_coefficients(const LassoPath& path,
                                                        const CenterScale& cs, int index);

enum class Direction { positive, negative };

/// Which coding the sigma/8 screen applies to. `original` thresholds the
/// back-mapped coefficients (the default pipeline); `scaled` thresholds the
/// standardized ones (kept as a sensitivity check).
enum class ThresholdCoding { original, scaled };

struct LambdaDiagnostics {
  double lambda = 0.0;
  int support_size = 0;
  double bic = 0.0;
};

struct AnalysisResult {
  Direction direction = Direction::positive;
  double sigma = 0.0;
  double lambda = 0.0;  // winning penalty
  int winner_index = 0;
  std::vector<int> hits;               // 0-based factor indices, ascending
  std::vector<double> hit_estimates;   // refit estimates aligned with hits
  double intercept = 0.0;              // refit intercept of the winning model
  std::vector<LambdaDiagnostics> trace;
};

/// Threshold each path point at sigma/8 in the effect direction, refit the
/// surviving support (capped at n-2 columns) by least squares with an
/// intercept, and keep the BIC-minimal model; ties go to the larger penalty.
/// y is the raw (uncentered) response the path was built from.
[[nodiscard]] AnalysisResult threshold_and_refit(const LassoPath& path, const CenterScale& cs,
                                                 std::span<const double> y, double sigma,
                                                 Direction direction,
                                                 ThresholdCoding coding = ThresholdCoding::original);

struct AnalyzeConfig {
  int grid_size = 100;
  double lambda_floor_log = -8.0;
  double tol = 1e-8;
  int max_sweeps = 1000000;
  ThresholdCoding coding = ThresholdCoding::original;
};

/// The full pipeline: standardize, trace the path at the response scale
/// sigma, threshold and refit.
[[nodiscard]] AnalysisResult analyze_screen(const Design& d, std::span<const double> y,
                                            double sigma, Direction direction,
                                            const AnalyzeConfig& cfg = {});

/// Robust pseudo standard error of a set of contrasts: 1.5 times the median
/// absolute value, after discarding values at least 2.5 times the initial
/// estimate. Degenerate (all zero) inputs return pse = 0 with the flag set.
struct LenthResult {
  double pse = 0.0;
  bool degenerate = false;
};

[[nodiscard]] LenthResult lenth_pse(std::span<const double> contrasts);

}  // namespace crows
