#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crows/analyze.hpp"  // Direction
#include "crows/design.hpp"

namespace crows {

// Reference screening methods the constrained designs are compared against:
// one-compound-one-well thresholding (with known or estimated parameters)
// and layered prime-modulus pooling with majority-style decoding.

/// One compound per well, known parameters: declare compound i a hit when its
/// well response crosses mu + z(0.95) sigma in the effect direction (mirrored
/// below the mean for negative effects). Returns ascending 0-based indices.
[[nodiscard]] std::vector<int> ocow_analyze(std::span<const double> y, double mu, double sigma,
                                            Direction direction);

/// One compound per well with unknown sd: center at an externally estimated
/// mean, take the robust pseudo-sd of the centered responses, and threshold
/// at the one-sided 95% Student-t point with floor(k/3) degrees of freedom.
/// Requires at least 6 wells. A degenerate pseudo-sd declares nothing.
struct OcowLenthResult {
  std::vector<int> hits;
  double pse = 0.0;
  double threshold = 0.0;  // in centered response units
  bool degenerate = false;
};

[[nodiscard]] OcowLenthResult ocow_lenth_analyze(std::span<const double> y, double mu_hat,
                                                 Direction direction);

/// Identity-style one-compound-one-well design: k wells by k compounds,
/// well i containing exactly compound i (entries 2I - J).
[[nodiscard]] Design ocow_design(int k);

/// Layered pooling design built from polynomial evaluation over a prime
/// modulus. Compounds are identified with base-q digit strings d_0..d_gamma;
/// in layer j < q, compound x lands in pool (sum_g d_g j^g) mod q, and the
/// optional layer j = q pools by the top digit alone. Any two distinct
/// compounds share a pool in at most gamma of the first q layers.
struct STDesign {
  int k = 0;      // compounds
  int q = 0;      // prime modulus = pools per layer
  int layers = 0; // a, number of layers used (a <= q + 1)
  int gamma = 0;  // digits - 1

  /// pool_of[layer * k + compound] in [0, q).
  std::vector<int> pool_of;

  [[nodiscard]] int wells() const { return layers * q; }
  [[nodiscard]] int pool(int layer, int compound) const {
    return pool_of[std::size_t(layer) * std::size_t(k) + std::size_t(compound)];
  }
  /// Largest pool cardinality across all layers.
  [[nodiscard]] int max_pool_size() const;
  /// +-1 incidence matrix: wells() rows (layer-major, well = layer * q + pool)
  /// by k columns, capacity set to the largest pool size.
  [[nodiscard]] Design incidence() const;
};

/// Build the pooling design. Requires q prime, 1 <= layers <= q + 1,
/// gamma >= 0, and q^(gamma+1) >= k. When a well capacity is given, throws
/// param_error if any pool would exceed it.
[[nodiscard]] STDesign make_std_design(int k, int q, int layers, int gamma,
                                       std::optional<int> capacity = std::nullopt);

/// Binary well calls: a well is positive when its response crosses
/// mu + z(quantile) sigma in the effect direction. With estimated parameters,
/// pass the estimates as mu and sigma.
struct WellLabels {
  std::vector<std::uint8_t> positive;  // one flag per well
};

[[nodiscard]] WellLabels binarize_wells(std::span<const double> y, double mu, double sigma,
                                        Direction direction, double quantile = 0.96);

/// Decoding with error allowance E over any +-1 incidence design:
/// a compound is inert when it sits in at least E+1 negative wells;
/// otherwise it is active when it sits in at least E+1 positive wells;
/// otherwise it is inconclusive and, for screening purposes, kept (counted
/// as declared). Rejects designs with a compound in no well at all.
enum class CompoundCall { inert, active, inconclusive };

struct DecodeResult {
  std::vector<CompoundCall> calls;  // per compound
  std::vector<int> hits;            // active + inconclusive, ascending
};

[[nodiscard]] DecodeResult poolhits_decode(const Design& incidence, const WellLabels& labels,
                                           int error_allowance);

[[nodiscard]] DecodeResult poolhits_decode(const STDesign& design, const WellLabels& labels,
                                           int error_allowance);

}  // namespace crows
