#include <doctest.h>

#include <cmath>
#include <vector>

#include "crows/analyze.hpp"
#include "crows/common.hpp"
#include "crows/construct.hpp"
#include "crows/design.hpp"
#include "crows/rng.hpp"

#include "test_util.hpp"

using namespace crows;

namespace {

Design four_by_two() {
  Design d = make_design(4, 2, 2);
  const int rows[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) d.set(i, j, std::int8_t(rows[i][j]));
  return d;
}

}  // namespace

TEST_CASE("center_scale on balanced columns is the identity transform") {
  const Design d = four_by_two();
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  const CenterScale cs = center_scale(d, y);

  CHECK(cs.n == 4);
  CHECK(cs.k == 2);
  CHECK(cs.kept == std::vector<int>{0, 1});
  CHECK(cs.dropped.empty());
  CHECK(cs.col_mean == std::vector<double>{0.0, 0.0});
  CHECK(cs.col_scale == std::vector<double>{1.0, 1.0});
  CHECK(cs.y_mean == doctest::Approx(2.5));
  CHECK(cs.y_centered == std::vector<double>{-1.5, -0.5, 0.5, 1.5});
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 4; ++i)
      CHECK(cs.x[std::size_t(j) * 4 + std::size_t(i)] == double(d.at(i, j)));
}

TEST_CASE("center_scale standardizes unbalanced columns to squared norm n") {
  Design d = make_design(4, 2, 2);
  const int col0[4] = {1, 1, 1, -1};   // colsum 2
  const int col1[4] = {1, -1, 1, -1};  // balanced
  for (int i = 0; i < 4; ++i) {
    d.set(i, 0, std::int8_t(col0[i]));
    d.set(i, 1, std::int8_t(col1[i]));
  }
  const std::vector<double> y{0.0, 0.0, 0.0, 0.0};
  const CenterScale cs = center_scale(d, y);

  CHECK(cs.col_mean[0] == doctest::Approx(0.5));
  CHECK(cs.col_scale[0] == doctest::Approx(std::sqrt(4.0 / 3.0)));
  for (std::size_t j = 0; j < cs.kept.size(); ++j) {
    double ss = 0.0, sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double v = cs.x[j * 4 + std::size_t(i)];
      ss += v * v;
      sum += v;
    }
    CHECK(ss == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("center_scale sets aside constant columns and rejects degenerate input") {
  Design d = make_design(3, 2, 2);
  for (int i = 0; i < 3; ++i) d.set(i, 0, 1);  // constant +1
  d.set(0, 1, 1);
  const std::vector<double> y{1.0, 2.0, 3.0};
  const CenterScale cs = center_scale(d, y);
  CHECK(cs.dropped == std::vector<int>{0});
  CHECK(cs.kept == std::vector<int>{1});

  const Design all_minus = make_design(3, 2, 2);
  CHECK_THROWS_AS((void)center_scale(all_minus, y), data_error);

  const std::vector<double> bad_len{1.0, 2.0};
  CHECK_THROWS_AS((void)center_scale(d, bad_len), param_error);
}

TEST_CASE("single-column soft-threshold solution satisfies the stationarity check") {
  Design d = make_design(4, 1, 1);
  d.set(0, 0, 1);
  d.set(1, 0, 1);  // column (+1, +1, -1, -1)
  const std::vector<double> y{2.0, 2.0, -2.0, -2.0};
  const CenterScale cs = center_scale(d, y);

  // x'y / n = 2, so the penalized minimizer at lambda = 0.5 is 1.5 and the
  // stationarity residual there is exactly zero.
  const std::vector<double> beta{1.5};
  CHECK(lasso_kkt_residual(cs, beta, 0.5) <= 1e-15);

  const std::vector<double> not_opt{1.0};
  CHECK(lasso_kkt_residual(cs, not_opt, 0.5) > 0.1);

  const LassoPath path = lasso_path(cs);
  CHECK(path.lambda_max == doctest::Approx(2.0));
  CHECK(path.lambda.front() == path.lambda_max);
  for (double b : path.beta.front()) CHECK(b == 0.0);  // exactly zero at the top
  // At the bottom of the grid the solution is x'y/n shrunk by the floor
  // penalty exactly.
  CHECK(path.beta.back()[0] ==
        doctest::Approx(2.0 - path.lambda.back()).epsilon(1e-12));
  for (std::size_t g = 1; g < path.lambda.size(); ++g)
    CHECK(path.lambda[g] < path.lambda[g - 1]);
}

TEST_CASE("coordinate descent satisfies stationarity across random instances") {
  Rng rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    const Design d = testutil::random_design(rng, 12, 20, 5);
    std::vector<double> y(12);
    for (double& v : y) v = rng.normal();
    CenterScale cs;
    try {
      cs = center_scale(d, y);
    } catch (const data_error&) {
      continue;  // all columns constant: nothing to test
    }
    const LassoPath path = lasso_path(cs);
    REQUIRE(path.lambda.size() == 100);
    for (std::size_t g : {std::size_t(0), std::size_t(50), std::size_t(99)}) {
      CHECK(path.converged[g] == 1);
      CHECK(lasso_kkt_residual(cs, path.beta[g], path.lambda[g]) <= 1e-6);
    }
  }
}

TEST_CASE("doubling the response and sigma doubles the path bit for bit") {
  Rng rng(777);
  const Design d = testutil::random_design(rng, 16, 12, 4);
  std::vector<double> y(16);
  for (double& v : y) v = 3.0 * rng.normal() + 0.25;

  std::vector<double> y2(y);
  for (double& v : y2) v *= 2.0;

  const CenterScale cs1 = center_scale(d, y);
  const CenterScale cs2 = center_scale(d, y2);
  LassoConfig cfg1;
  cfg1.scale_sigma = 1.0;
  LassoConfig cfg2;
  cfg2.scale_sigma = 2.0;
  const LassoPath p1 = lasso_path(cs1, cfg1);
  const LassoPath p2 = lasso_path(cs2, cfg2);

  REQUIRE(p1.lambda.size() == p2.lambda.size());
  CHECK(p2.lambda_max == 2.0 * p1.lambda_max);
  for (std::size_t g = 0; g < p1.lambda.size(); ++g) {
    CHECK(p2.lambda[g] == 2.0 * p1.lambda[g]);
    for (std::size_t j = 0; j < p1.beta[g].size(); ++j)
      CHECK(p2.beta[g][j] == 2.0 * p1.beta[g][j]);
  }

  const AnalysisResult a1 = analyze_screen(d, y, 1.0, Direction::positive);
  const AnalysisResult a2 = analyze_screen(d, y2, 2.0, Direction::positive);
  CHECK(a1.hits == a2.hits);
  CHECK(a1.winner_index == a2.winner_index);
  REQUIRE(a1.hit_estimates.size() == a2.hit_estimates.size());
  for (std::size_t i = 0; i < a1.hit_estimates.size(); ++i)
    CHECK(a2.hit_estimates[i] == doctest::Approx(2.0 * a1.hit_estimates[i]).epsilon(1e-12));
}

TEST_CASE("analyze_screen recovers a strongly planted factor and its sign rules") {
  const ConstructConfig cc{12, 6, 3, 20, 5, 10000, 1};
  const Design d = construct(cc).best.design;

  Rng rng(31);
  std::vector<double> y(12);
  for (int i = 0; i < 12; ++i) y[i] = 2.0 * double(d.at(i, 2)) + 0.1 * rng.normal();

  const AnalysisResult pos = analyze_screen(d, y, 1.0, Direction::positive);
  CHECK(pos.hits == std::vector<int>{2});
  REQUIRE(pos.hit_estimates.size() == 1);
  CHECK(pos.hit_estimates[0] == doctest::Approx(2.0).epsilon(0.15));

  // A positive effect must not be declared when hunting negative effects.
  const AnalysisResult wrong_dir = analyze_screen(d, y, 1.0, Direction::negative);
  CHECK(std::find(wrong_dir.hits.begin(), wrong_dir.hits.end(), 2) == wrong_dir.hits.end());
}

TEST_CASE("negating the response and the direction mirrors the analysis exactly") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Design d = testutil::random_design(rng, 14, 10, 4);
    std::vector<double> y(14);
    for (int i = 0; i < 14; ++i)
      y[i] = 1.5 * double(d.at(i, trial % 10)) + rng.normal();
    std::vector<double> neg(y);
    for (double& v : neg) v = -v;

    CenterScale cs;
    try {
      cs = center_scale(d, y);
    } catch (const data_error&) {
      continue;
    }
    const AnalysisResult a = analyze_screen(d, y, 1.0, Direction::positive);
    const AnalysisResult b = analyze_screen(d, neg, 1.0, Direction::negative);
    CHECK(a.hits == b.hits);
    CHECK(a.winner_index == b.winner_index);
    REQUIRE(a.hit_estimates.size() == b.hit_estimates.size());
    for (std::size_t i = 0; i < a.hit_estimates.size(); ++i)
      CHECK(a.hit_estimates[i] == -b.hit_estimates[i]);
  }
}

TEST_CASE("refit support never exceeds n - 2 columns") {
  // Six wells, many strong factors: the screen must cap what it refits.
  Rng rng(5150);
  const Design d = testutil::random_design(rng, 6, 10, 5);
  std::vector<double> y(6);
  for (int i = 0; i < 6; ++i) {
    double v = 0.0;
    for (int j = 0; j < 6; ++j) v += 2.0 * double(d.at(i, j));
    y[i] = v + 0.05 * rng.normal();
  }
  const AnalysisResult res = analyze_screen(d, y, 1.0, Direction::positive);
  CHECK(int(res.hits.size()) <= 4);
  for (const LambdaDiagnostics& t : res.trace) CHECK(t.support_size <= 4);
}

TEST_CASE("analysis diagnostics are shaped and ordered consistently") {
  Rng rng(12);
  const Design d = testutil::random_design(rng, 12, 8, 3);
  std::vector<double> y(12);
  for (double& v : y) v = rng.normal();
  CenterScale cs;
  try {
    cs = center_scale(d, y);
  } catch (const data_error&) {
    return;
  }
  AnalyzeConfig cfg;
  cfg.grid_size = 60;
  const AnalysisResult res = analyze_screen(d, y, 1.0, Direction::positive, cfg);
  CHECK(res.trace.size() == 60);
  CHECK(res.winner_index >= 0);
  CHECK(res.winner_index < 60);
  CHECK(res.lambda == res.trace[std::size_t(res.winner_index)].lambda);
  CHECK(res.hit_estimates.size() == res.hits.size());
  for (std::size_t i = 1; i < res.hits.size(); ++i) CHECK(res.hits[i - 1] < res.hits[i]);
  // The winner has the strictly smallest criterion among earlier (larger)
  // penalties and no later penalty beats it.
  const double best = res.trace[std::size_t(res.winner_index)].bic;
  for (int g = 0; g < 60; ++g) {
    if (g < res.winner_index) CHECK(res.trace[std::size_t(g)].bic > best);
    else CHECK(res.trace[std::size_t(g)].bic >= best);
  }
}

TEST_CASE("analyze_screen validates its parameters") {
  const Design d = four_by_two();
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS((void)analyze_screen(d, y, 0.0, Direction::positive), param_error);
  CHECK_THROWS_AS((void)analyze_screen(d, y, -1.0, Direction::positive), param_error);
  AnalyzeConfig bad;
  bad.grid_size = 1;
  CHECK_THROWS_AS((void)analyze_screen(d, y, 1.0, Direction::positive, bad), param_error);
}

TEST_CASE("robust pseudo sd matches hand-computed cases") {
  // Median |c| = 1, trim at 3.75 discards the outlier, pse = 1.5 * 1.
  const std::vector<double> spread{1.0, 1.0, 1.0, 1.0, 100.0};
  const LenthResult a = lenth_pse(spread);
  CHECK_FALSE(a.degenerate);
  CHECK(a.pse == doctest::Approx(1.5).epsilon(1e-15));

  // Even count: median of {1, 3} is 2, nothing trimmed, pse = 3.
  const std::vector<double> pair{-1.0, 3.0};
  CHECK(lenth_pse(pair).pse == doctest::Approx(3.0).epsilon(1e-15));

  // A zero median zeroes the initial estimate: degenerate by construction.
  const std::vector<double> sparse{0.0, 0.0, 0.0, 5.0};
  const LenthResult c = lenth_pse(sparse);
  CHECK(c.degenerate);
  CHECK(c.pse == 0.0);

  const std::vector<double> zeros{0.0, 0.0};
  CHECK(lenth_pse(zeros).degenerate);

  const std::vector<double> one{1.0};
  CHECK_THROWS_AS((void)lenth_pse(one), param_error);
}
