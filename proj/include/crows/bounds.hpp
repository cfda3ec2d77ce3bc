#pragma once

#include <cstdint>

#include "crows/design.hpp"

namespace crows {

// Analytic lower bound on the squared-off-diagonal criterion for designs in
// which every row uses its full capacity (zero slack). The criterion
// decomposes, through exact counting identities, into a constant plus three
// nonnegative sums: squared column sums, squared row sums, and squared
// pairwise column L1 differences. With tight rows the row-sum term is fixed
// and the other two are minimized by spreading integer totals as evenly as
// possible, which gives a closed-form certificate value.

struct BoundReport {
  int n = 0;
  int k = 0;
  int c = 0;

  // Even-spread parameters: nc = k*gamma + delta for the column sums,
  // 2nc(k-c) = (k^2-k)*phi + psi for the pairwise column differences.
  std::int64_t gamma = 0;
  std::int64_t delta = 0;
  std::int64_t phi = 0;
  std::int64_t psi = 0;

  std::int64_t colsum_bound = 0;    // min possible sum of squared column sums
  std::int64_t rowsum_square = 0;   // n (2c-k)^2, exact under tight rows
  std::int64_t pairdiff_bound = 0;  // min possible sum of squared column L1 diffs
  std::int64_t q_bound = 0;         // lower bound on tr(S^2)
  double ue_bound = 0.0;            // same bound on the averaged criterion
};

/// Closed-form bound for shape (n, k, c). Throws param_error on bad shapes
/// (requires 1 <= c <= k, n >= 1, and n, k small enough that n^2 k^2 fits
/// comfortably in int64).
[[nodiscard]] BoundReport tight_row_bound(int n, int k, int c);

/// Exact integer residuals of the three counting identities that power the
/// bound. Each compares two independently computed quantities and must be
/// zero for every valid design:
///   rowsum_coldiff: sum_i rowsum_i^2 + sum_{l != j} |col_l - col_j|_1 - n k^2
///   colsum_rowdiff: sum_j colsum_j^2 + sum_{i != m} |row_i - row_m|_1 - n^2 k
///   trace_coldiff:  tr((X'X)^2) - (2n sum_i rowsum_i^2
///                                  + sum_{l != j} |col_l - col_j|_1^2 - n^2 k^2)
struct IdentityResiduals {
  std::int64_t rowsum_coldiff = 0;
  std::int64_t colsum_rowdiff = 0;
  std::int64_t trace_coldiff = 0;
  [[nodiscard]] bool all_zero() const {
    return rowsum_coldiff == 0 && colsum_rowdiff == 0 && trace_coldiff == 0;
  }
};

[[nodiscard]] IdentityResiduals identity_check(const Design& d);

/// Outcome of comparing a design's criterion against the analytic bound.
/// The bound only speaks to designs with zero slack; for others the
/// certificate is marked not applicable.
struct Certificate {
  bool applicable = false;
  std::int64_t q = 0;
  double ue = 0.0;
  std::int64_t q_bound = 0;
  double ue_bound = 0.0;
  std::int64_t gap_q = 0;     // q - q_bound (>= 0), when applicable
  double gap_ratio = 0.0;     // gap_q / q_bound, when applicable and q_bound > 0
  bool tight = false;         // bound attained exactly
};

/// Certify a design against the bound for its own (n, k, c). Throws
/// data_error on an invalid design; throws error if a tight-row design ever
/// lands below the bound, which would mean a defect in this library.
[[nodiscard]] Certificate certify(const Design& d);

}  // namespace crows
