#include "crows/construct.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

#include "crows/bounds.hpp"
#include "crows/common.hpp"
#include "crows/parallel.hpp"
#include "crows/rng.hpp"

namespace crows {

namespace {

void check_cell(const CriterionState& st, int i, int j, const char* fn) {
  if (i < 0 || i >= st.design.n) {
    throw param_error(std::string(fn) + ": row index out of range");
  }
  if (j < 0 || j >= st.design.k) {
    throw param_error(std::string(fn) + ": column index out of range");
  }
}

// Dot product of row i of the augmented matrix, with augmented column `excl`
// zeroed out, against Gram column b.
std::int64_t row_dot_scol_excl(const CriterionState& st, int i, int excl, int b) {
  std::int64_t acc = 0;
  const int m = st.dim();
  for (int a = 0; a < m; ++a) {
    if (a == excl) continue;
    acc += std::int64_t(st.l_entry(i, a)) * st.s_at(a, b);
  }
  return acc;
}

// Flip entry (i, j), updating q and the Gram matrix in O(k).
void apply_flip(CriterionState& st, int i, int j) {
  const int m = st.dim();
  const int a = j + 1;
  const std::int64_t x = st.design.at(i, j);
  const std::int64_t t = row_dot_scol_excl(st, i, a, a);
  st.q += 8 * (std::int64_t(st.design.k) - x * t);
  for (int b = 0; b < m; ++b) {
    if (b == a) continue;
    const std::int64_t upd = 2 * x * st.l_entry(i, b);
    st.s_ref(a, b) -= upd;
    st.s_ref(b, a) -= upd;
  }
  st.design.set(i, j, std::int8_t(-x));
}

}  // namespace

ExchangeDelta delta_flip(const CriterionState& st, int i, int j) {
  check_cell(st, i, j, "delta_flip");
  const int a = j + 1;
  const std::int64_t x = st.design.at(i, j);
  const std::int64_t t = row_dot_scol_excl(st, i, a, a);
  ExchangeDelta d;
  d.move = Move{MoveKind::flip, i, j, 0};
  d.delta_q = 8 * (std::int64_t(st.design.k) - x * t);
  return d;
}

ExchangeDelta delta_swap(const CriterionState& st, int i, int j, int l) {
  check_cell(st, i, j, "delta_swap");
  check_cell(st, i, l, "delta_swap");
  if (j == l) throw param_error("delta_swap: columns must differ");
  if (st.design.at(i, j) != 1 || st.design.at(i, l) != -1) {
    throw param_error("delta_swap: requires x_ij = +1 and x_il = -1");
  }
  const int aj = j + 1;
  const int al = l + 1;
  const std::int64_t n = st.design.n;
  const std::int64_t k = st.design.k;
  const std::int64_t a_term = row_dot_scol_excl(st, i, aj, aj);
  const std::int64_t b_term = row_dot_scol_excl(st, i, aj, al);
  ExchangeDelta d;
  d.move = Move{MoveKind::swap, i, j, l};
  d.delta_q = 8 * (2 * (k - 1) + n - a_term + b_term - st.s_at(aj, al));
  return d;
}

std::int64_t delta_general(const CriterionState& st, int i, const std::vector<int>& cols,
                           bool allow_intercept) {
  if (i < 0 || i >= st.design.n) throw param_error("delta_general: row index out of range");
  if (cols.empty()) return 0;
  const int m = st.dim();
  std::vector<char> in_set(std::size_t(m), 0);
  for (const int a : cols) {
    if (a < 0 || a >= m) throw param_error("delta_general: augmented column index out of range");
    if (a == 0 && !allow_intercept) {
      throw param_error("delta_general: the intercept column cannot be exchanged");
    }
    if (in_set[std::size_t(a)]) throw param_error("delta_general: duplicate column index");
    in_set[std::size_t(a)] = 1;
  }
  const std::int64_t j_size = std::int64_t(cols.size());
  std::int64_t cross = 0;
  for (const int a : cols) {
    std::int64_t inner = 0;
    for (int b = 0; b < m; ++b) {
      if (in_set[std::size_t(b)]) continue;
      inner += st.s_at(a, b) * st.l_entry(i, b);
    }
    cross += std::int64_t(st.l_entry(i, a)) * inner;
  }
  return 8 * j_size * (std::int64_t(st.design.k) + 1 - j_size) - 8 * cross;
}

void apply_move(CriterionState& st, const Move& move) {
  if (move.kind == MoveKind::flip) {
    check_cell(st, move.row, move.col, "apply_move");
    apply_flip(st, move.row, move.col);
    return;
  }
  check_cell(st, move.row, move.col, "apply_move");
  check_cell(st, move.row, move.col_other, "apply_move");
  if (move.col == move.col_other) throw param_error("apply_move: swap columns must differ");
  if (st.design.at(move.row, move.col) != 1 || st.design.at(move.row, move.col_other) != -1) {
    throw param_error("apply_move: swap requires x_ij = +1 and x_il = -1");
  }
  apply_flip(st, move.row, move.col);
  apply_flip(st, move.row, move.col_other);
}

Design random_feasible_init(int n, int k, int c, std::uint64_t seed) {
  Design d = make_design(n, k, c);
  Rng rng(seed);
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    const int picks = int(rng.below(std::uint64_t(c) + 1));
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < picks; ++t) {
      const int swap_at = t + int(rng.below(std::uint64_t(k - t)));
      std::swap(idx[std::size_t(t)], idx[std::size_t(swap_at)]);
      d.set(i, idx[std::size_t(t)], 1);
    }
  }
  return d;
}

OptimizeResult optimize_from(const Design& start, int pass_cap) {
  if (pass_cap < 1) throw param_error("optimize_from: pass_cap must be >= 1");
  OptimizeResult res;
  res.state = build_state(start);
  CriterionState& st = res.state;
  const int n = st.design.n;
  const int k = st.design.k;
  const int c = st.design.c;
  const int m = k + 1;

  // v_b = L_i . S_{:,b} for the row currently being scanned. Rebuilt per row
  // in O(k^2), then maintained in O(k) across accepted flips so every delta
  // in the row costs O(1) to score.
  std::vector<std::int64_t> v(static_cast<std::size_t>(m));

  auto flip_with_v = [&](int i, int j) {
    const int a = j + 1;
    const std::int64_t x = st.design.at(i, j);
    st.q += 8 * (std::int64_t(k) - x * v[std::size_t(a)] + n);
    for (int b = 0; b < m; ++b) {
      if (b == a) continue;
      v[std::size_t(b)] += -2 * x * st.s_at(a, b) + 2 * st.l_entry(i, b);
    }
    v[std::size_t(a)] -= 2 * x * (std::int64_t(n) + k);
    for (int b = 0; b < m; ++b) {
      if (b == a) continue;
      const std::int64_t upd = 2 * x * st.l_entry(i, b);
      st.s_ref(a, b) -= upd;
      st.s_ref(b, a) -= upd;
    }
    st.design.set(i, j, std::int8_t(-x));
  };

  std::vector<int> plus_cols, minus_cols;
  plus_cols.reserve(std::size_t(k));
  minus_cols.reserve(std::size_t(k));

  int pass = 0;
  while (true) {
    ++pass;
    bool exchanged = false;
    for (int i = 0; i < n; ++i) {
      for (int b = 0; b < m; ++b) {
        std::int64_t acc = 0;
        for (int a = 0; a < m; ++a) acc += std::int64_t(st.l_entry(i, a)) * st.s_at(a, b);
        v[std::size_t(b)] = acc;
      }
      int plus = st.design.row_plus_count(i);

      // Sign flips, skipping additions that would exceed the capacity.
      for (int j = 0; j < k; ++j) {
        const std::int64_t x = st.design.at(i, j);
        if (x == -1 && plus >= c) continue;
        const std::int64_t dq = 8 * (std::int64_t(k) - x * v[std::size_t(j + 1)] + n);
        if (dq < 0) {
          flip_with_v(i, j);
          plus += (x == -1) ? 1 : -1;
          exchanged = true;
          ++res.exchanges;
        }
      }

      // Swaps: the +1 set is frozen for the row scan; the -1 set absorbs the
      // column each accepted swap vacates.
      plus_cols.clear();
      minus_cols.clear();
      for (int j = 0; j < k; ++j) {
        (st.design.at(i, j) == 1 ? plus_cols : minus_cols).push_back(j);
      }
      for (const int j : plus_cols) {
        if (minus_cols.empty()) break;
        const int aj = j + 1;
        const std::int64_t a_term = v[std::size_t(aj)] - n;
        int best_pos = -1;
        std::int64_t best_score = 0;
        for (std::size_t t = 0; t < minus_cols.size(); ++t) {
          const int l = minus_cols[t];
          const std::int64_t score = v[std::size_t(l + 1)] - 2 * st.s_at(aj, l + 1);
          if (best_pos < 0 || score < best_score) {
            best_pos = int(t);
            best_score = score;
          }
        }
        const std::int64_t dq = 8 * (2 * std::int64_t(k - 1) + n - a_term + best_score);
        if (dq < 0) {
          const int l = minus_cols[std::size_t(best_pos)];
          flip_with_v(i, j);
          flip_with_v(i, l);
          minus_cols.erase(minus_cols.begin() + best_pos);
          minus_cols.insert(std::lower_bound(minus_cols.begin(), minus_cols.end(), j), j);
          exchanged = true;
          ++res.exchanges;
        }
      }
    }
    if (!exchanged) {
      res.converged = true;
      break;
    }
    if (pass >= pass_cap) break;
  }
  res.passes = pass;
  return res;
}

ConstructResult construct(const ConstructConfig& cfg) {
  if (cfg.starts < 1) throw param_error("construct: starts must be >= 1");
  if (cfg.threads < 1) throw param_error("construct: threads must be >= 1");
  (void)make_design(cfg.n, cfg.k, cfg.c);  // shape validation

  std::vector<std::uint64_t> seeds(std::size_t(cfg.starts));
  for (int s = 0; s < cfg.starts; ++s) {
    seeds[std::size_t(s)] = derive_seed(cfg.seed, {std::uint64_t(s)});
  }
  std::vector<OptimizeResult> runs(std::size_t(cfg.starts));
  parallel_for(0, cfg.starts, cfg.threads, [&](int s) {
    const Design d0 = random_feasible_init(cfg.n, cfg.k, cfg.c, seeds[std::size_t(s)]);
    runs[std::size_t(s)] = optimize_from(d0, cfg.pass_cap);
  });

  ConstructResult out;
  out.log.reserve(std::size_t(cfg.starts));
  int best = 0;
  for (int s = 0; s < cfg.starts; ++s) {
    const OptimizeResult& r = runs[std::size_t(s)];
    out.log.push_back(StartRecord{s, seeds[std::size_t(s)], r.state.q, ue_s2(r.state),
                                  r.passes, r.converged});
    if (r.state.q < runs[std::size_t(best)].state.q) best = s;
  }
  out.best_start = best;
  out.best = std::move(runs[std::size_t(best)].state);
  return out;
}

std::vector<SweepRow> constraint_sweep(int n, int k, const std::vector<int>& c_list,
                                       int starts, std::uint64_t seed, int threads,
                                       int pass_cap) {
  if (c_list.empty()) throw param_error("constraint_sweep: empty capacity list");
  for (const int c : c_list) {
    if (c < 1 || c > k) {
      throw param_error("constraint_sweep: capacity " + std::to_string(c) +
                        " outside [1, " + std::to_string(k) + "]");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(c_list.size());
  std::optional<CriterionState> carried;  // best design from earlier capacities
  for (const int c : c_list) {
    ConstructConfig cfg;
    cfg.n = n;
    cfg.k = k;
    cfg.c = c;
    cfg.starts = starts;
    cfg.seed = derive_seed(seed, {0xC0FFEEull, std::uint64_t(c)});
    cfg.pass_cap = pass_cap;
    cfg.threads = threads;
    ConstructResult r = construct(cfg);

    // Relaxing the capacity can only widen the feasible set, so the sweep
    // also descends from the best design found at any smaller capacity.
    // This keeps the reported criterion nonincreasing in c instead of
    // bouncing with multi-start luck.
    if (carried && carried->design.c <= c) {
      Design warm = carried->design;
      warm.c = c;
      OptimizeResult chained = optimize_from(warm, pass_cap);
      if (chained.state.q < r.best.q) r.best = std::move(chained.state);
    }
    if (!carried || r.best.q < carried->q ||
        (r.best.q == carried->q && carried->design.c > c)) {
      carried = r.best;
    }

    SweepRow row;
    row.c = c;
    row.q = r.best.q;
    row.ue = ue_s2(r.best);
    row.ue_doubled = 2.0 * row.ue;
    const SlackProfile sp = row_slack(r.best.design);
    row.slack_min = sp.min;
    row.slack_max = sp.max;
    row.slack_mean = sp.mean;
    row.bound_applicable = sp.tight();
    if (row.bound_applicable) {
      const BoundReport b = tight_row_bound(n, k, c);
      row.q_bound = b.q_bound;
      row.ue_bound = b.ue_bound;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace crows
