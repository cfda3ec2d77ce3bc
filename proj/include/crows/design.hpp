#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crows {

/// A two-level screening design: n wells (rows) by k compounds (columns),
/// entries in {-1, +1} with +1 meaning "compound present in well". Each row
/// may contain at most c entries equal to +1 (the well capacity constraint).
///
/// Entries are stored as int8_t so the criterion algebra stays in exact
/// integer arithmetic end to end.
struct Design {
  int n = 0;
  int k = 0;
  int c = 0;
  std::vector<std::int8_t> entries;  // row-major, n * k

  [[nodiscard]] std::int8_t at(int i, int j) const {
    return entries[std::size_t(i) * std::size_t(k) + std::size_t(j)];
  }
  void set(int i, int j, std::int8_t v) {
    entries[std::size_t(i) * std::size_t(k) + std::size_t(j)] = v;
  }

  /// Number of +1 entries in row i.
  [[nodiscard]] int row_plus_count(int i) const {
    int m = 0;
    for (int j = 0; j < k; ++j) m += (at(i, j) == 1);
    return m;
  }
};

/// All-(-1) design of the given shape. Throws param_error unless
/// n >= 1, k >= 1 and 1 <= c <= k.
[[nodiscard]] Design make_design(int n, int k, int c);

/// First problem found in a design, if any.
struct ValidationIssue {
  enum class Kind { bad_shape, bad_entry, capacity_exceeded };
  Kind kind;
  int row = -1;  // 0-based; -1 when not applicable
  int col = -1;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::optional<ValidationIssue> issue;
};

/// Check entry domain and the per-row capacity constraint. Reports the first
/// offending entry or row; never throws.
[[nodiscard]] ValidationReport validate(const Design& d) noexcept;

/// Throws data_error when validate(d) fails.
void require_valid(const Design& d);

/// Exact integer state for the squared-off-diagonal criterion.
///
/// s holds the (k+1) x (k+1) Gram matrix of the intercept-augmented design
/// [1 X], and q its squared Frobenius norm. q differs from the off-diagonal
/// sum of squares only by the constant n^2 (k+1) and a factor 2, so the
/// optimizer works on q directly and converts for reporting.
struct CriterionState {
  Design design;
  std::vector<std::int64_t> s;  // row-major, (k+1)^2
  std::int64_t q = 0;

  [[nodiscard]] int dim() const { return design.k + 1; }
  [[nodiscard]] std::int64_t s_at(int a, int b) const {
    return s[std::size_t(a) * std::size_t(dim()) + std::size_t(b)];
  }
  std::int64_t& s_ref(int a, int b) {
    return s[std::size_t(a) * std::size_t(dim()) + std::size_t(b)];
  }
  /// Entry (i, a) of the augmented matrix [1 X]: column 0 is the intercept.
  [[nodiscard]] int l_entry(int i, int a) const {
    return a == 0 ? 1 : int(design.at(i, a - 1));
  }
};

/// Build the Gram state from scratch (O(n k^2)). Throws data_error on an
/// invalid design.
[[nodiscard]] CriterionState build_state(const Design& d);

/// Sum of squared off-diagonal Gram entries, Sum_{a<b} s_ab^2. Exact integer.
[[nodiscard]] std::int64_t offdiag_square_sum(const CriterionState& st);

/// The averaged criterion value offdiag_square_sum / (k (k+1)).
/// The numerator is exact; only this final division is floating point.
[[nodiscard]] double ue_s2(const CriterionState& st);

/// Per-row slack of the capacity constraint: slack_i = 2c - k - rowsum_i,
/// i.e. 2 * (c - #plus entries). Always even and >= 0 for a valid design.
struct SlackProfile {
  std::vector<int> slack;
  int min = 0;
  int max = 0;
  double mean = 0.0;
  [[nodiscard]] bool tight() const { return max == 0; }
};

[[nodiscard]] SlackProfile row_slack(const Design& d);

}  // namespace crows
