#pragma once

#include <cstdint>
#include <vector>

#include "crows/design.hpp"

namespace crows {

// Coordinate-exchange construction of capacity-constrained designs that
// minimize the squared-off-diagonal criterion. All criterion deltas are
// computed in O(k) exact integer arithmetic from the cached Gram state;
// a full pass touches every row, first trying single-entry sign flips that
// respect the capacity, then within-row (+1, -1) swaps which preserve it.

enum class MoveKind { flip, swap };

struct Move {
  MoveKind kind = MoveKind::flip;
  int row = 0;
  int col = 0;        // flipped column, or the +1 column of a swap (0-based)
  int col_other = 0;  // the -1 column of a swap; unused for flips
};

struct ExchangeDelta {
  Move move;
  std::int64_t delta_q = 0;
};

/// Exact change in q from flipping entry (i, j). O(k).
[[nodiscard]] ExchangeDelta delta_flip(const CriterionState& st, int i, int j);

/// Exact change in q from swapping x_ij = +1 with x_il = -1 in row i. O(k).
/// Throws param_error unless the entries have those signs.
[[nodiscard]] ExchangeDelta delta_swap(const CriterionState& st, int i, int j, int l);

/// Exact change in q from simultaneously flipping, within row i, every column
/// of the intercept-augmented matrix whose (0-based, augmented) index lies in
/// cols: index 0 is the intercept column, index j >= 1 is design column j-1.
/// The intercept index is only legal with allow_intercept = true (used by
/// tests to probe the general identity); an empty set yields 0. O(|cols| k).
[[nodiscard]] std::int64_t delta_general(const CriterionState& st, int i,
                                         const std::vector<int>& cols,
                                         bool allow_intercept = false);

/// Apply a move, updating entries, Gram matrix and q exactly (rank-2 style
/// row/column updates, no rebuild). Swaps apply as two sequential flips.
void apply_move(CriterionState& st, const Move& move);

/// Random design with each row drawing uniformly 0..c compounds. Deterministic
/// in the seed.
[[nodiscard]] Design random_feasible_init(int n, int k, int c, std::uint64_t seed);

struct OptimizeResult {
  CriterionState state;
  int passes = 0;
  bool converged = false;       // no exchange in the final pass
  std::int64_t exchanges = 0;   // accepted moves in total
};

/// Full coordinate-exchange descent from a given start. Accepts only strictly
/// improving moves, so it terminates; pass_cap bounds the number of passes.
[[nodiscard]] OptimizeResult optimize_from(const Design& start, int pass_cap = 10000);

struct ConstructConfig {
  int n = 0;
  int k = 0;
  int c = 0;
  int starts = 100;
  std::uint64_t seed = 0;
  int pass_cap = 10000;
  int threads = 1;
};

/// Per-start log entry, exported by the CLI when --log is given.
struct StartRecord {
  int start = 0;
  std::uint64_t seed = 0;
  std::int64_t q = 0;
  double ue = 0.0;
  int passes = 0;
  bool converged = false;
};

struct ConstructResult {
  CriterionState best;
  int best_start = 0;
  std::vector<StartRecord> log;
};

/// Multi-start construction. Start s runs from its own derived seed, so the
/// result is independent of the thread count; the best state is the smallest
/// q with the smallest start index breaking ties.
[[nodiscard]] ConstructResult construct(const ConstructConfig& cfg);

struct SweepRow {
  int c = 0;
  std::int64_t q = 0;
  double ue = 0.0;          // offdiag_square_sum / (k (k+1))
  double ue_doubled = 0.0;  // 2 * ue, the scaling used by some references
  int slack_min = 0;
  int slack_max = 0;
  double slack_mean = 0.0;
  bool bound_applicable = false;  // true only when the design is tight
  std::int64_t q_bound = 0;       // meaningful only when applicable
  double ue_bound = 0.0;
};

/// Construct once per capacity in c_list (each with `starts` starts and a
/// per-capacity derived seed) and report criterion plus slack diagnostics.
[[nodiscard]] std::vector<SweepRow> constraint_sweep(int n, int k,
                                                     const std::vector<int>& c_list,
                                                     int starts, std::uint64_t seed,
                                                     int threads = 1, int pass_cap = 10000);

}  // namespace crows
