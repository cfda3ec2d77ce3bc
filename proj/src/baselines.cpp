#include "crows/baselines.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "crows/common.hpp"
#include "crows/stats.hpp"

namespace crows {

std::vector<int> ocow_analyze(std::span<const double> y, double mu, double sigma,
                              Direction direction) {
  if (!(sigma > 0.0)) throw param_error("ocow_analyze: sigma must be > 0");
  if (y.empty()) throw param_error("ocow_analyze: no well responses");
  const double z = norm_quantile(0.95);
  std::vector<int> hits;
  if (direction == Direction::positive) {
    const double cut = mu + z * sigma;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] > cut) hits.push_back(int(i));
    }
  } else {
    const double cut = mu - z * sigma;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < cut) hits.push_back(int(i));
    }
  }
  return hits;
}

OcowLenthResult ocow_lenth_analyze(std::span<const double> y, double mu_hat,
                                   Direction direction) {
  const int k = int(y.size());
  if (k < 6) throw param_error("ocow_lenth_analyze: needs at least 6 wells");

  std::vector<double> centered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - mu_hat;

  OcowLenthResult res;
  const LenthResult pse = lenth_pse(centered);
  res.pse = pse.pse;
  res.degenerate = pse.degenerate;
  if (pse.degenerate) return res;

  const int df = k / 3;
  const double tq = student_t_quantile(0.95, df);
  res.threshold = tq * pse.pse;
  for (std::size_t i = 0; i < centered.size(); ++i) {
    const bool hit = direction == Direction::positive ? centered[i] > res.threshold
                                                      : centered[i] < -res.threshold;
    if (hit) res.hits.push_back(int(i));
  }
  return res;
}

Design ocow_design(int k) {
  Design d = make_design(k, k, 1);
  for (int i = 0; i < k; ++i) d.set(i, i, 1);
  return d;
}

namespace {

bool is_prime(int q) {
  if (q < 2) return false;
  for (int f = 2; std::int64_t(f) * f <= q; ++f) {
    if (q % f == 0) return false;
  }
  return true;
}

}  // namespace

int STDesign::max_pool_size() const {
  std::vector<int> count(std::size_t(layers) * std::size_t(q), 0);
  for (int layer = 0; layer < layers; ++layer) {
    for (int x = 0; x < k; ++x) {
      ++count[std::size_t(layer) * std::size_t(q) + std::size_t(pool(layer, x))];
    }
  }
  return *std::max_element(count.begin(), count.end());
}

Design STDesign::incidence() const {
  Design d = make_design(wells(), k, max_pool_size());
  for (int layer = 0; layer < layers; ++layer) {
    for (int x = 0; x < k; ++x) {
      d.set(layer * q + pool(layer, x), x, 1);
    }
  }
  return d;
}

STDesign make_std_design(int k, int q, int layers, int gamma, std::optional<int> capacity) {
  if (k < 1) throw param_error("std design: k must be >= 1");
  if (!is_prime(q)) throw param_error("std design: q = " + std::to_string(q) + " is not prime");
  if (layers < 1 || layers > q + 1) {
    throw param_error("std design: layer count must lie in [1, q + 1]");
  }
  if (gamma < 0) throw param_error("std design: gamma must be >= 0");
  // q^(gamma+1) >= k, computed with a cap to avoid overflow.
  std::int64_t cap_count = 1;
  for (int g = 0; g <= gamma; ++g) {
    cap_count *= q;
    if (cap_count >= k) break;
  }
  if (cap_count < k) {
    throw param_error("std design: q^(gamma+1) = " + std::to_string(cap_count) +
                      " cannot index k = " + std::to_string(k) + " compounds");
  }

  STDesign sd;
  sd.k = k;
  sd.q = q;
  sd.layers = layers;
  sd.gamma = gamma;
  sd.pool_of.resize(std::size_t(layers) * std::size_t(k));

  std::vector<int> digits(std::size_t(gamma) + 1);
  for (int x = 0; x < k; ++x) {
    int rem = x;
    for (int g = 0; g <= gamma; ++g) {
      digits[std::size_t(g)] = rem % q;
      rem /= q;
    }
    for (int layer = 0; layer < layers; ++layer) {
      int pool;
      if (layer < q) {
        // Horner evaluation of the digit polynomial at the layer index.
        int acc = 0;
        for (int g = gamma; g >= 0; --g) acc = (acc * layer + digits[std::size_t(g)]) % q;
        pool = acc;
      } else {
        pool = digits[std::size_t(gamma)];  // the extra layer splits by top digit
      }
      sd.pool_of[std::size_t(layer) * std::size_t(k) + std::size_t(x)] = pool;
    }
  }

  if (capacity.has_value()) {
    const int worst = sd.max_pool_size();
    if (worst > *capacity) {
      throw param_error("std design: largest pool holds " + std::to_string(worst) +
                        " compounds, exceeding the well capacity " + std::to_string(*capacity) +
                        "; increase q");
    }
  }
  return sd;
}

WellLabels binarize_wells(std::span<const double> y, double mu, double sigma,
                          Direction direction, double quantile) {
  if (!(sigma > 0.0)) throw param_error("binarize_wells: sigma must be > 0");
  if (!(quantile > 0.0 && quantile < 1.0)) {
    throw param_error("binarize_wells: quantile must lie in (0,1)");
  }
  const double z = norm_quantile(quantile);
  WellLabels labels;
  labels.positive.resize(y.size());
  if (direction == Direction::positive) {
    const double cut = mu + z * sigma;
    for (std::size_t i = 0; i < y.size(); ++i) labels.positive[i] = y[i] > cut ? 1 : 0;
  } else {
    const double cut = mu - z * sigma;
    for (std::size_t i = 0; i < y.size(); ++i) labels.positive[i] = y[i] < cut ? 1 : 0;
  }
  return labels;
}

DecodeResult poolhits_decode(const Design& incidence, const WellLabels& labels,
                             int error_allowance) {
  require_valid(incidence);
  if (int(labels.positive.size()) != incidence.n) {
    throw param_error("poolhits_decode: label count " + std::to_string(labels.positive.size()) +
                      " does not match " + std::to_string(incidence.n) + " wells");
  }
  if (error_allowance < 0) throw param_error("poolhits_decode: error allowance must be >= 0");

  DecodeResult res;
  res.calls.resize(std::size_t(incidence.k));
  const int need = error_allowance + 1;
  for (int x = 0; x < incidence.k; ++x) {
    int pos = 0, neg = 0, present = 0;
    for (int w = 0; w < incidence.n; ++w) {
      if (incidence.at(w, x) != 1) continue;
      ++present;
      if (labels.positive[std::size_t(w)]) ++pos;
      else ++neg;
    }
    if (present == 0) {
      throw data_error("poolhits_decode: compound " + std::to_string(x + 1) +
                       " appears in no well");
    }
    CompoundCall call;
    if (neg >= need) call = CompoundCall::inert;
    else if (pos >= need) call = CompoundCall::active;
    else call = CompoundCall::inconclusive;
    res.calls[std::size_t(x)] = call;
    if (call != CompoundCall::inert) res.hits.push_back(x);
  }
  return res;
}

DecodeResult poolhits_decode(const STDesign& design, const WellLabels& labels,
                             int error_allowance) {
  return poolhits_decode(design.incidence(), labels, error_allowance);
}

}  // namespace crows
