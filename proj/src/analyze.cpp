#include "crows/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crows/common.hpp"
#include "crows/stats.hpp"

namespace crows {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double dot_n(const double* a, const double* b, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

struct Refit {
  std::vector<double> coef;  // aligned with the support
  double intercept = 0.0;
  double rss = 0.0;
  double bic = 0.0;
};

Refit refit_support(const Design& d, std::span<const double> y, const std::vector<int>& support,
                    double sigma) {
  const int n = d.n;
  const int p = int(support.size());
  Eigen::MatrixXd a(n, p + 1);
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (int t = 0; t < p; ++t) a(i, t + 1) = double(d.at(i, support[std::size_t(t)]));
    yv(i) = y[std::size_t(i)];
  }
  const Eigen::VectorXd sol = a.colPivHouseholderQr().solve(yv);
  const double rss = (yv - a * sol).squaredNorm();

  Refit r;
  r.intercept = sol(0);
  r.coef.resize(std::size_t(p));
  for (int t = 0; t < p; ++t) r.coef[std::size_t(t)] = sol(t + 1);
  r.rss = rss;
  // BIC with the noise level treated as known (sigma is given, or estimated
  // once from a pilot), i.e. -2 log-likelihood + parameters * log n up to a
  // model-independent constant. Profiling the variance out instead would
  // send the score to -infinity for every near-interpolating support, which
  // a supersaturated refit can always produce.
  r.bic = rss / (sigma * sigma) + (p + 1) * std::log(double(n));
  return r;
}

}  // namespace

CenterScale center_scale(const Design& d, std::span<const double> y) {
  require_valid(d);
  if (int(y.size()) != d.n) {
    throw param_error("center_scale: response length " + std::to_string(y.size()) +
                      " does not match n = " + std::to_string(d.n));
  }
  CenterScale cs;
  cs.n = d.n;
  cs.k = d.k;
  cs.source = d;

  for (int j = 0; j < d.k; ++j) {
    long long colsum = 0;
    for (int i = 0; i < d.n; ++i) colsum += d.at(i, j);
    if (colsum == d.n || colsum == -d.n) {
      cs.dropped.push_back(j);
      continue;
    }
    cs.kept.push_back(j);
    const double mean = double(colsum) / double(d.n);
    // Centered squared length of a +-1 column is (n^2 - colsum^2) / n.
    const double ss = double(std::int64_t(d.n) * d.n - colsum * colsum) / double(d.n);
    cs.col_mean.push_back(mean);
    cs.col_scale.push_back(std::sqrt(double(d.n) / ss));
  }
  if (cs.kept.empty()) {
    throw data_error("center_scale: every column is constant; nothing is estimable");
  }

  const int m = int(cs.kept.size());
  cs.x.resize(std::size_t(m) * std::size_t(d.n));
  for (int t = 0; t < m; ++t) {
    const int j = cs.kept[std::size_t(t)];
    const double mean = cs.col_mean[std::size_t(t)];
    const double scale = cs.col_scale[std::size_t(t)];
    double* col = cs.x.data() + std::size_t(t) * std::size_t(d.n);
    for (int i = 0; i < d.n; ++i) col[i] = scale * (double(d.at(i, j)) - mean);
  }

  double total = 0.0;
  for (const double v : y) total += v;
  cs.y_mean = total / double(d.n);
  cs.y_centered.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) cs.y_centered[i] = y[i] - cs.y_mean;
  return cs;
}

LassoPath lasso_path(const CenterScale& cs, const LassoConfig& cfg) {
  if (cfg.grid_size < 2) throw param_error("lasso_path: grid_size must be >= 2");
  if (!(cfg.scale_sigma > 0.0)) throw param_error("lasso_path: scale_sigma must be > 0");
  if (!(cfg.tol > 0.0)) throw param_error("lasso_path: tol must be > 0");
  if (cfg.max_sweeps < 1) throw param_error("lasso_path: max_sweeps must be >= 1");
  const int n = cs.n;
  const int m = int(cs.kept.size());
  if (m == 0) throw data_error("lasso_path: no usable columns");

  LassoPath path;
  path.intercept = cs.y_mean;

  // The smallest penalty that keeps every coefficient at zero, computed with
  // the same dot products the descent uses so the first grid point is exact.
  double lambda_max = 0.0;
  for (int j = 0; j < m; ++j) {
    const double z =
        std::fabs(dot_n(cs.x.data() + std::size_t(j) * std::size_t(n), cs.y_centered.data(), n)) /
        double(n);
    lambda_max = std::max(lambda_max, z);
  }
  path.lambda_max = lambda_max;

  const double floor = cfg.scale_sigma * std::exp(cfg.lambda_floor_log) / double(n);
  const double hi = std::max(lambda_max, floor);

  // Log-spaced grid expressed through the ratio floor/hi, which keeps the
  // whole grid exactly equivariant when the response is scaled by a power
  // of two (the ratio's common factor cancels exactly in the division).
  const int g_count = cfg.grid_size;
  path.lambda.resize(std::size_t(g_count));
  path.lambda[0] = hi;
  path.lambda[std::size_t(g_count) - 1] = floor;
  const double ratio = floor / hi;
  const double log_ratio = (ratio == 1.0) ? 0.0 : std::log(ratio);
  for (int g = 1; g + 1 < g_count; ++g) {
    path.lambda[std::size_t(g)] = hi * std::exp(log_ratio * double(g) / double(g_count - 1));
  }

  const double tol = cfg.tol * cfg.scale_sigma;
  const double kkt_tol = cfg.kkt_tol * cfg.scale_sigma;
  std::vector<double> beta(std::size_t(m), 0.0);
  std::vector<double> resid(cs.y_centered);

  // Rebuild the residual from scratch, clearing any drift the incremental
  // updates accumulated.
  auto refresh_resid = [&] {
    resid = cs.y_centered;
    for (int j = 0; j < m; ++j) {
      const double bj = beta[std::size_t(j)];
      if (bj == 0.0) continue;
      const double* xj = cs.x.data() + std::size_t(j) * std::size_t(n);
      for (int i = 0; i < n; ++i) resid[std::size_t(i)] -= bj * xj[i];
    }
  };

  path.beta.resize(std::size_t(g_count));
  path.converged.assign(std::size_t(g_count), 0);
  for (int g = 0; g < g_count; ++g) {
    const double lambda = path.lambda[std::size_t(g)];
    bool done = false;
    for (int sweep = 0; sweep < cfg.max_sweeps && !done; ++sweep) {
      double max_change = 0.0;
      for (int j = 0; j < m; ++j) {
        const double* xj = cs.x.data() + std::size_t(j) * std::size_t(n);
        const double z = beta[std::size_t(j)] + dot_n(xj, resid.data(), n) / double(n);
        const double nb = soft_threshold(z, lambda);
        const double diff = nb - beta[std::size_t(j)];
        if (diff != 0.0) {
          for (int i = 0; i < n; ++i) resid[std::size_t(i)] -= diff * xj[i];
          beta[std::size_t(j)] = nb;
          max_change = std::max(max_change, std::fabs(diff));
        }
      }
      // Small per-sweep movement alone can stall short of stationarity on
      // strongly correlated columns, so convergence additionally requires a
      // verified optimality gap. When the check fails, clean the residual
      // and keep sweeping.
      if (max_change <= tol) {
        if (lasso_kkt_residual(cs, beta, lambda) <= kkt_tol) {
          done = true;
        } else {
          refresh_resid();
        }
      }
    }
    path.converged[std::size_t(g)] = done ? 1 : 0;
    path.beta[std::size_t(g)] = beta;  // warm start carries into the next grid point
  }
  return path;
}

double lasso_kkt_residual(const CenterScale& cs, std::span<const double> beta, double lambda) {
  const int n = cs.n;
  const int m = int(cs.kept.size());
  if (int(beta.size()) != m) throw param_error("lasso_kkt_residual: coefficient length mismatch");

  std::vector<double> resid(cs.y_centered);
  for (int j = 0; j < m; ++j) {
    const double b = beta[std::size_t(j)];
    if (b == 0.0) continue;
    const double* xj = cs.x.data() + std::size_t(j) * std::size_t(n);
    for (int i = 0; i < n; ++i) resid[std::size_t(i)] -= b * xj[i];
  }
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    const double* xj = cs.x.data() + std::size_t(j) * std::size_t(n);
    const double grad = -dot_n(xj, resid.data(), n) / double(n);
    const double b = beta[std::size_t(j)];
    const double viol = (b == 0.0) ? std::max(0.0, std::fabs(grad) - lambda)
                                   : std::fabs(grad + (b > 0.0 ? lambda : -lambda));
    worst = std::max(worst, viol);
  }
  return worst;
}

std::vector<double> original_coefficients(const LassoPath& path, const CenterScale& cs,
                                          int index) {
  if (index < 0 || index >= int(path.lambda.size())) {
    throw param_error("original_coefficients: path index out of range");
  }
  std::vector<double> out(std::size_t(cs.k), 0.0);
  const std::vector<double>& b = path.beta[std::size_t(index)];
  for (std::size_t t = 0; t < cs.kept.size(); ++t) {
    out[std::size_t(cs.kept[t])] = b[t] * cs.col_scale[t];
  }
  return out;
}

AnalysisResult threshold_and_refit(const LassoPath& path, const CenterScale& cs,
                                   std::span<const double> y, double sigma, Direction direction,
                                   ThresholdCoding coding) {
  if (!(sigma > 0.0)) throw param_error("threshold_and_refit: sigma must be > 0");
  if (int(y.size()) != cs.n) throw param_error("threshold_and_refit: response length mismatch");
  if (path.beta.size() != path.lambda.size() || path.lambda.empty()) {
    throw param_error("threshold_and_refit: malformed path");
  }
  const int n = cs.n;
  const double cut = sigma / 8.0;
  const double sign = direction == Direction::positive ? 1.0 : -1.0;
  const int max_support = std::max(0, n - 2);
  const Design& d = cs.source;

  AnalysisResult res;
  res.direction = direction;
  res.sigma = sigma;

  std::map<std::vector<int>, Refit> memo;
  int winner = -1;
  double best_bic = 0.0;
  const std::vector<int>* winner_support = nullptr;

  std::vector<int> support;
  std::vector<double> value;  // thresholding-coding magnitudes per support entry
  res.trace.reserve(path.lambda.size());
  std::vector<std::vector<int>> supports(path.lambda.size());

  for (std::size_t g = 0; g < path.lambda.size(); ++g) {
    support.clear();
    value.clear();
    const std::vector<double>& b = path.beta[g];
    for (std::size_t t = 0; t < cs.kept.size(); ++t) {
      const double v = coding == ThresholdCoding::original ? b[t] * cs.col_scale[t] : b[t];
      if (sign * v >= cut) {
        support.push_back(cs.kept[t]);
        value.push_back(std::fabs(v));
      }
    }
    if (int(support.size()) > max_support) {
      // Keep the largest-magnitude survivors; ties to the smaller index.
      std::vector<std::size_t> order(support.size());
      for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a2, std::size_t b2) { return value[a2] > value[b2]; });
      order.resize(std::size_t(max_support));
      std::vector<int> trimmed;
      trimmed.reserve(order.size());
      for (const std::size_t t : order) trimmed.push_back(support[t]);
      std::sort(trimmed.begin(), trimmed.end());
      support = std::move(trimmed);
    }

    auto it = memo.find(support);
    if (it == memo.end()) it = memo.emplace(support, refit_support(d, y, support, sigma)).first;
    const Refit& fit = it->second;

    res.trace.push_back(LambdaDiagnostics{path.lambda[g], int(support.size()), fit.bic});
    supports[g] = support;
    if (winner < 0 || fit.bic < best_bic) {
      winner = int(g);
      best_bic = fit.bic;
      winner_support = &supports[g];
    }
  }

  res.winner_index = winner;
  res.lambda = path.lambda[std::size_t(winner)];
  const Refit& wfit = memo.at(*winner_support);
  res.intercept = wfit.intercept;

  // Declared hits: the winning support, re-screened on the refit estimates.
  for (std::size_t t = 0; t < winner_support->size(); ++t) {
    const double est = wfit.coef[t];
    if (sign * est >= cut) {
      res.hits.push_back((*winner_support)[t]);
      res.hit_estimates.push_back(est);
    }
  }
  return res;
}

AnalysisResult analyze_screen(const Design& d, std::span<const double> y, double sigma,
                              Direction direction, const AnalyzeConfig& cfg) {
  if (!(sigma > 0.0)) throw param_error("analyze_screen: sigma must be > 0");
  const CenterScale cs = center_scale(d, y);
  LassoConfig lcfg;
  lcfg.grid_size = cfg.grid_size;
  lcfg.lambda_floor_log = cfg.lambda_floor_log;
  lcfg.scale_sigma = sigma;
  lcfg.tol = cfg.tol;
  lcfg.max_sweeps = cfg.max_sweeps;
  const LassoPath path = lasso_path(cs, lcfg);
  return threshold_and_refit(path, cs, y, sigma, direction, cfg.coding);
}

LenthResult lenth_pse(std::span<const double> contrasts) {
  if (contrasts.size() < 2) throw param_error("lenth_pse: need at least two contrasts");
  std::vector<double> mag(contrasts.size());
  for (std::size_t i = 0; i < contrasts.size(); ++i) mag[i] = std::fabs(contrasts[i]);

  LenthResult res;
  const double s0 = 1.5 * median(mag);
  if (s0 == 0.0) {
    res.degenerate = true;
    return res;
  }
  std::vector<double> trimmed;
  trimmed.reserve(mag.size());
  for (const double v : mag) {
    if (v < 2.5 * s0) trimmed.push_back(v);
  }
  if (trimmed.empty()) {  // unreachable for s0 > 0, kept as a guard
    res.degenerate = true;
    return res;
  }
  res.pse = 1.5 * median(trimmed);
  return res;
}

}  // namespace crows
