#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <vector>

#include "crows/bounds.hpp"
#include "crows/common.hpp"
#include "crows/design.hpp"
#include "crows/rng.hpp"
#include "test_util.hpp"

using namespace crows;

TEST_CASE("bound constants for the desk-size optimum") {
  const BoundReport b = tight_row_bound(4, 4, 1);
  CHECK(b.gamma == 1);
  CHECK(b.delta == 0);
  CHECK(b.phi == 2);
  CHECK(b.psi == 0);
  CHECK(b.q_bound == 112);
  CHECK(b.ue_bound == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("bound constants for a production shape") {
  const BoundReport b = tight_row_bound(96, 144, 10);
  CHECK(b.gamma == 6);
  CHECK(b.delta == 96);
  CHECK(b.phi == 12);
  CHECK(b.psi == 10176);
  // Recomposition: the report's pieces must assemble into q_bound.
  const std::int64_t n = 96, k = 144;
  CHECK(b.q_bound == n * n * (1 - k * k) + 2 * b.colsum_bound + 2 * n * b.rowsum_square +
                         b.pairdiff_bound);
  CHECK(b.ue_bound == doctest::Approx(double(b.q_bound - n * n * (k + 1)) /
                                      double(2 * k * (k + 1))).epsilon(1e-15));
}

TEST_CASE("saturated capacity reduces the bound to the closed form") {
  for (const auto& [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {5, 7}, {12, 12}, {30, 31}}) {
    const BoundReport b = tight_row_bound(n, k, k);
    CHECK(b.q_bound == std::int64_t(n) * n * (k + 1) * (k + 1));
    CHECK(b.phi == 0);
    CHECK(b.psi == 0);
  }
}

TEST_CASE("single-factor edge case keeps the pairwise term empty") {
  const BoundReport b = tight_row_bound(5, 1, 1);
  CHECK(b.phi == 0);
  CHECK(b.psi == 0);
  CHECK(b.pairdiff_bound == 0);
  // k = c = 1: all entries +1, Gram matrix is all n, q = 4 n^2.
  CHECK(b.q_bound == 100);
}

TEST_CASE("bound parameter validation") {
  CHECK_THROWS_AS((void)tight_row_bound(0, 4, 1), param_error);
  CHECK_THROWS_AS((void)tight_row_bound(4, 0, 1), param_error);
  CHECK_THROWS_AS((void)tight_row_bound(4, 4, 0), param_error);
  CHECK_THROWS_AS((void)tight_row_bound(4, 4, 5), param_error);
  CHECK_THROWS_AS((void)tight_row_bound(40000, 4, 1), param_error);
}

TEST_CASE("bound is sound for random tight designs") {
  Rng rng(314159);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + int(rng.below(29));
    const int k = 2 + int(rng.below(29));
    const int c = 1 + int(rng.below(std::uint64_t(k)));
    const Design d = testutil::random_design(rng, n, k, c, /*tight=*/true);
    const std::int64_t q = testutil::oracle_q(d);
    const BoundReport b = tight_row_bound(n, k, c);
    CHECK(q >= b.q_bound);
  }
}

TEST_CASE("counting identities hold exactly for random designs") {
  Rng rng(2718);
  for (int trial = 0; trial < 250; ++trial) {
    const int n = 1 + int(rng.below(25));
    const int k = 1 + int(rng.below(25));
    const int c = 1 + int(rng.below(std::uint64_t(k)));
    const Design d = testutil::random_design(rng, n, k, c);
    const IdentityResiduals res = identity_check(d);
    CHECK(res.rowsum_coldiff == 0);
    CHECK(res.colsum_rowdiff == 0);
    CHECK(res.trace_coldiff == 0);
    CHECK(res.all_zero());
  }
}

TEST_CASE("identity terms on a worked example") {
  // [[+1, -1], [-1, -1]]: row sums (0, -2), column sums (0, -2),
  // column L1 distance 2 (both orders), row L1 distance 2 (both orders).
  Design d = make_design(2, 2, 2);
  d.set(0, 0, 1);
  const IdentityResiduals res = identity_check(d);
  CHECK(res.all_zero());
  // Spelled out: 4 + 4 = 2 * 2^2 and 4 + 4 = 2^2 * 2; the trace identity
  // gives tr((X'X)^2) = 8 = 2*2*4 + 8 - 16.
}

TEST_CASE("certificates separate tight and slack designs") {
  SUBCASE("the desk-size optimum is certified tight") {
    Design d = make_design(4, 4, 1);
    for (int i = 0; i < 4; ++i) d.set(i, i, 1);  // one compound per well
    const Certificate cert = certify(d);
    CHECK(cert.applicable);
    CHECK(cert.q == 112);
    CHECK(cert.q_bound == 112);
    CHECK(cert.gap_q == 0);
    CHECK(cert.gap_ratio == 0.0);
    CHECK(cert.tight);
  }
  SUBCASE("slack rows disable the certificate") {
    const Design d = make_design(4, 4, 1);  // all -1, slack 2 in every row
    const Certificate cert = certify(d);
    CHECK_FALSE(cert.applicable);
    CHECK_FALSE(cert.tight);
    CHECK(cert.q > 0);
  }
  SUBCASE("random tight designs have nonnegative gaps") {
    Rng rng(161803);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + int(rng.below(14));
      const int k = 2 + int(rng.below(14));
      const int c = 1 + int(rng.below(std::uint64_t(k)));
      const Design d = testutil::random_design(rng, n, k, c, /*tight=*/true);
      const Certificate cert = certify(d);
      CHECK(cert.applicable);
      CHECK(cert.gap_q >= 0);
      if (cert.q_bound > 0) {
        CHECK(cert.gap_ratio == doctest::Approx(double(cert.gap_q) / double(cert.q_bound)));
      }
    }
  }
}
