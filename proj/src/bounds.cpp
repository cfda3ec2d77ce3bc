#include "crows/bounds.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include "crows/common.hpp"

namespace crows {

BoundReport tight_row_bound(int n, int k, int c) {
  if (n < 1 || k < 1) throw param_error("tight_row_bound: n and k must be >= 1");
  if (c < 1 || c > k) throw param_error("tight_row_bound: c must satisfy 1 <= c <= k");
  if (std::int64_t(n) > 30000 || std::int64_t(k) > 30000) {
    throw param_error("tight_row_bound: n, k limited to 30000 to keep exact arithmetic");
  }
  const std::int64_t N = n, K = k, C = c;

  BoundReport r;
  r.n = n;
  r.k = k;
  r.c = c;

  // Column sums: total of +1 entries is nc, spread over k columns.
  r.gamma = (N * C) / K;
  r.delta = N * C - K * r.gamma;
  const std::int64_t lo = N - 2 * r.gamma;
  const std::int64_t hi = N - 2 * r.gamma - 2;
  r.colsum_bound = (K - r.delta) * lo * lo + r.delta * hi * hi;

  // Row sums are pinned at 2c - k when every row is tight.
  r.rowsum_square = N * (2 * C - K) * (2 * C - K);

  // Pairwise column differences: their halves (Hamming counts) total
  // 2nc(k-c) over the k^2 - k ordered pairs.
  const std::int64_t pairs = K * K - K;
  const std::int64_t total = 2 * N * C * (K - C);
  if (pairs > 0) {
    r.phi = total / pairs;
    r.psi = total - pairs * r.phi;
  }
  r.pairdiff_bound = 4 * (pairs * r.phi * r.phi + r.psi * (2 * r.phi + 1));

  r.q_bound = N * N * (1 - K * K) + 2 * r.colsum_bound + 2 * N * r.rowsum_square +
              r.pairdiff_bound;
  r.ue_bound = double(r.q_bound - N * N * (K + 1)) / double(2 * K * (K + 1));
  return r;
}

IdentityResiduals identity_check(const Design& d) {
  require_valid(d);
  const std::int64_t N = d.n, K = d.k;

  std::int64_t rowsum_sq = 0;
  for (int i = 0; i < d.n; ++i) {
    std::int64_t rs = 0;
    for (int j = 0; j < d.k; ++j) rs += d.at(i, j);
    rowsum_sq += rs * rs;
  }
  std::int64_t colsum_sq = 0;
  for (int j = 0; j < d.k; ++j) {
    std::int64_t cs = 0;
    for (int i = 0; i < d.n; ++i) cs += d.at(i, j);
    colsum_sq += cs * cs;
  }

  // Ordered-pair L1 differences between columns, plus their squares.
  std::int64_t coldiff_sum = 0;
  std::int64_t coldiff_sq_sum = 0;
  for (int l = 0; l < d.k; ++l) {
    for (int j = 0; j < d.k; ++j) {
      if (l == j) continue;
      std::int64_t diff = 0;
      for (int i = 0; i < d.n; ++i) diff += std::abs(int(d.at(i, l)) - int(d.at(i, j)));
      coldiff_sum += diff;
      coldiff_sq_sum += diff * diff;
    }
  }
  // Ordered-pair L1 differences between rows.
  std::int64_t rowdiff_sum = 0;
  for (int i = 0; i < d.n; ++i) {
    for (int m2 = 0; m2 < d.n; ++m2) {
      if (i == m2) continue;
      std::int64_t diff = 0;
      for (int j = 0; j < d.k; ++j) diff += std::abs(int(d.at(i, j)) - int(d.at(m2, j)));
      rowdiff_sum += diff;
    }
  }
  // tr((X'X)^2) computed directly from the Gram matrix of X alone.
  std::int64_t trace = 0;
  for (int l = 0; l < d.k; ++l) {
    for (int j = 0; j < d.k; ++j) {
      std::int64_t g = 0;
      for (int i = 0; i < d.n; ++i) g += std::int64_t(d.at(i, l)) * d.at(i, j);
      trace += g * g;
    }
  }

  IdentityResiduals res;
  res.rowsum_coldiff = rowsum_sq + coldiff_sum - N * K * K;
  res.colsum_rowdiff = colsum_sq + rowdiff_sum - N * N * K;
  res.trace_coldiff = trace - (2 * N * rowsum_sq + coldiff_sq_sum - N * N * K * K);
  return res;
}

Certificate certify(const Design& d) {
  const CriterionState st = build_state(d);  // validates
  const SlackProfile sp = row_slack(d);

  Certificate cert;
  cert.q = st.q;
  cert.ue = ue_s2(st);
  const BoundReport b = tight_row_bound(d.n, d.k, d.c);
  cert.q_bound = b.q_bound;
  cert.ue_bound = b.ue_bound;
  cert.applicable = sp.tight();
  if (!cert.applicable) return cert;

  cert.gap_q = cert.q - cert.q_bound;
  if (cert.gap_q < 0) {
    throw error("certify: criterion " + std::to_string(cert.q) + " is below the bound " +
                std::to_string(cert.q_bound) + " for a tight design; this is a library defect");
  }
  cert.gap_ratio = cert.q_bound > 0 ? double(cert.gap_q) / double(cert.q_bound) : 0.0;
  cert.tight = cert.gap_q == 0;
  return cert;
}

}  // namespace crows
