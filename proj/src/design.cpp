#include "crows/design.hpp"

#include <algorithm>
#include <string>

#include "crows/common.hpp"

namespace crows {

Design make_design(int n, int k, int c) {
  if (n < 1) throw param_error("design: n must be >= 1, got " + std::to_string(n));
  if (k < 1) throw param_error("design: k must be >= 1, got " + std::to_string(k));
  if (c < 1 || c > k) {
    throw param_error("design: c must satisfy 1 <= c <= k, got c = " + std::to_string(c) +
                      " with k = " + std::to_string(k));
  }
  Design d;
  d.n = n;
  d.k = k;
  d.c = c;
  d.entries.assign(std::size_t(n) * std::size_t(k), std::int8_t{-1});
  return d;
}

ValidationReport validate(const Design& d) noexcept {
  ValidationReport rep;
  auto fail = [&](ValidationIssue::Kind kind, int row, int col, std::string msg) {
    rep.ok = false;
    rep.issue = ValidationIssue{kind, row, col, std::move(msg)};
  };

  if (d.n < 1 || d.k < 1 || d.c < 1 || d.c > d.k ||
      d.entries.size() != std::size_t(d.n) * std::size_t(d.k)) {
    fail(ValidationIssue::Kind::bad_shape, -1, -1,
         "design shape invalid: n = " + std::to_string(d.n) + ", k = " + std::to_string(d.k) +
             ", c = " + std::to_string(d.c) + ", entries = " + std::to_string(d.entries.size()));
    return rep;
  }
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.k; ++j) {
      const int v = d.at(i, j);
      if (v != 1 && v != -1) {
        fail(ValidationIssue::Kind::bad_entry, i, j,
             "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 ") is " + std::to_string(v) + ", expected -1 or 1");
        return rep;
      }
    }
  }
  for (int i = 0; i < d.n; ++i) {
    const int plus = d.row_plus_count(i);
    if (plus > d.c) {
      fail(ValidationIssue::Kind::capacity_exceeded, i, -1,
           "row " + std::to_string(i + 1) + " has " + std::to_string(plus) +
               " compounds, capacity is " + std::to_string(d.c));
      return rep;
    }
  }
  return rep;
}

void require_valid(const Design& d) {
  const ValidationReport rep = validate(d);
  if (!rep.ok) throw data_error("invalid design: " + rep.issue->message);
}

CriterionState build_state(const Design& d) {
  require_valid(d);
  CriterionState st;
  st.design = d;
  const int m = d.k + 1;
  st.s.assign(std::size_t(m) * std::size_t(m), 0);
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      std::int64_t acc = 0;
      for (int i = 0; i < d.n; ++i) {
        acc += std::int64_t(st.l_entry(i, a)) * st.l_entry(i, b);
      }
      st.s_ref(a, b) = acc;
      st.s_ref(b, a) = acc;
    }
  }
  std::int64_t q = 0;
  for (const std::int64_t v : st.s) q += v * v;
  st.q = q;
  return st;
}

std::int64_t offdiag_square_sum(const CriterionState& st) {
  // Diagonal entries of the Gram matrix are all n, so
  // q = n^2 (k+1) + 2 * offdiag_square_sum.
  const std::int64_t n = st.design.n;
  const std::int64_t k = st.design.k;
  return (st.q - n * n * (k + 1)) / 2;
}

double ue_s2(const CriterionState& st) {
  const std::int64_t k = st.design.k;
  if (k < 1) throw data_error("ue_s2: design has no factors");
  return double(offdiag_square_sum(st)) / double(k * (k + 1));
}

SlackProfile row_slack(const Design& d) {
  require_valid(d);
  SlackProfile p;
  p.slack.resize(std::size_t(d.n));
  long long total = 0;
  for (int i = 0; i < d.n; ++i) {
    const int s = 2 * (d.c - d.row_plus_count(i));
    p.slack[std::size_t(i)] = s;
    total += s;
  }
  p.min = *std::min_element(p.slack.begin(), p.slack.end());
  p.max = *std::max_element(p.slack.begin(), p.slack.end());
  p.mean = double(total) / double(d.n);
  return p;
}

}  // namespace crows
