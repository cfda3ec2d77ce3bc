#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crows/analyze.hpp"
#include "crows/baselines.hpp"
#include "crows/design.hpp"

namespace crows {

// Monte-Carlo comparison harness. A scenario plants a few active compounds
// with effect size D (in noise-sd units), generates well responses for each
// method's own design, runs the method's analysis and scores the declared
// hit set against the planted truth. Every replicate runs from a seed derived
// from (master seed, cell index, replicate index), so studies reproduce
// bit-exactly regardless of thread count.

enum class InteractionForm { synergistic, antagonistic };
enum class Heredity { strong, weak };

struct InteractionSpec {
  int first = 0;  // 0-based factor indices whose product column carries g
  int second = 0;
  InteractionForm form = InteractionForm::synergistic;
};

struct Scenario {
  double mu = 0.0;
  double sigma = 1.0;
  double effect = 1.0;  // D: active mean shift in sigma units
  Direction direction = Direction::positive;
  std::vector<int> active;  // 0-based compound indices
  std::optional<InteractionSpec> interaction;
};

/// Noise-free response means: mean_i = b0 + sum_{j active} x_ij b + pi_i g,
/// with b = sgn (D/2) sigma, g = +-(D/4) sigma (sign set by the interaction
/// form relative to the effect direction), and the intercept b0 chosen so a
/// well containing no active compound sits exactly at mu.
[[nodiscard]] std::vector<double> response_means(const Design& d, const Scenario& sc);

/// Means plus sigma-scaled standard normal noise, one draw per well in row
/// order from the seed.
[[nodiscard]] std::vector<double> gen_response(const Design& d, const Scenario& sc,
                                               std::uint64_t seed);

/// Same generator with the interaction required and its parents checked
/// against the heredity rule: strong wants both parents active, weak wants
/// exactly one. Without an interaction this reduces to gen_response.
[[nodiscard]] std::vector<double> gen_interaction_response(const Design& d, const Scenario& sc,
                                                           Heredity heredity, std::uint64_t seed);

/// Simulated 12-well parameter pilot: the mean estimate is N(mu, sigma^2/12)
/// and the variance estimate is sigma^2 chi2_11 / 11.
struct PilotDraw {
  double mean = 0.0;
  double variance = 0.0;
};

[[nodiscard]] PilotDraw pilot_draw(double mu, double sigma, std::uint64_t seed);

/// Replicate scores. A rate is empty when its denominator vanishes, except
/// that an empty truth with an empty declaration scores a perfect tpr of 1.
struct Rates {
  std::optional<double> tpr;
  std::optional<double> fpr;
};

[[nodiscard]] Rates evaluate(const std::vector<int>& declared, const std::vector<int>& truth,
                             int k);

enum class Method { crows, poolhits, ocow };

[[nodiscard]] const char* method_name(Method m);
[[nodiscard]] std::optional<Method> parse_method(std::string_view name);

/// One experimental setting: a capacity-constrained screen plus, when one
/// exists at compatible size, a pooling design for the decode baseline.
struct DesignBundle {
  std::string name;
  int n = 0;
  int k = 0;
  int c = 0;
  Design screen;
  std::optional<STDesign> pooling;
  int error_allowance = 2;
  double binarize_quantile = 0.96;
};

struct StudyConfig {
  std::vector<DesignBundle> bundles;
  std::vector<Method> methods;
  std::vector<double> effects;  // D grid
  int actives = 1;
  int replicates = 1000;
  std::uint64_t seed = 0;
  double mu = 0.0;
  double sigma = 1.0;
  Direction direction = Direction::positive;
  bool pilot = false;  // estimate mu / sigma from a pilot draw per replicate
  std::optional<std::pair<Heredity, InteractionForm>> interactions;
  int threads = 1;
};

struct StudyRow {
  std::string design_name;
  Method method = Method::crows;
  int n = 0;  // wells actually consumed by this method
  int k = 0;
  int c = 0;
  double effect = 0.0;
  int actives = 0;
  int replicates = 0;
  double tpr_mean = 0.0;
  double tpr_se = 0.0;
  int tpr_count = 0;  // replicates with a defined tpr
  double fpr_mean = 0.0;
  double fpr_se = 0.0;
  int fpr_count = 0;
};

/// Run every (bundle, method, effect) cell. Rows come back in that nesting
/// order. Throws param_error for incompatible pairings (pooling decode
/// requested for a bundle without a pooling design).
[[nodiscard]] std::vector<StudyRow> run_study(const StudyConfig& cfg);

/// Named presets. Desk-size settings run in seconds; the production table
/// mirrors the large screens the toolkit is sized for.
struct PresetSpec {
  std::string name;
  int n = 0;
  int k = 0;
  int c = 0;
  int q = 0;  // 0 = no compatible pooling design at this size
  int layers = 0;
  int gamma = 0;
  int error_allowance = 2;
};

[[nodiscard]] std::vector<PresetSpec> desk_presets();
[[nodiscard]] std::vector<PresetSpec> table1_presets();

/// Materialize a preset: construct the screen by multi-start descent and
/// build the pooling design when the preset names one.
[[nodiscard]] DesignBundle build_bundle(const PresetSpec& spec, int starts, std::uint64_t seed,
                                        int threads = 1);

}  // namespace crows
