#include "crows/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

#include "crows/common.hpp"
#include "crows/construct.hpp"
#include "crows/parallel.hpp"
#include "crows/rng.hpp"

namespace crows {

namespace {

void check_scenario(const Design& d, const Scenario& sc) {
  require_valid(d);
  if (!std::isfinite(sc.mu)) throw param_error("scenario mean must be finite");
  if (!std::isfinite(sc.sigma) || sc.sigma < 0.0)
    throw param_error("scenario sd must be finite and >= 0");
  if (!std::isfinite(sc.effect) || sc.effect < 0.0)
    throw param_error("effect size must be finite and >= 0");
  std::vector<int> seen = sc.active;
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] < 0 || seen[i] >= d.k) throw param_error("active index out of range");
    if (i > 0 && seen[i] == seen[i - 1]) throw param_error("duplicate active index");
  }
  if (sc.interaction) {
    const InteractionSpec& is = *sc.interaction;
    if (is.first < 0 || is.first >= d.k || is.second < 0 || is.second >= d.k)
      throw param_error("interaction index out of range");
    if (is.first == is.second) throw param_error("interaction needs two distinct factors");
  }
}

double direction_sign(Direction dir) { return dir == Direction::positive ? 1.0 : -1.0; }

}  // namespace

std::vector<double> response_means(const Design& d, const Scenario& sc) {
  check_scenario(d, sc);
  const double sgn = direction_sign(sc.direction);
  const double b = sgn * 0.5 * sc.effect * sc.sigma;
  double g = 0.0;
  if (sc.interaction) {
    const double fs = sc.interaction->form == InteractionForm::synergistic ? 1.0 : -1.0;
    g = fs * sgn * 0.25 * sc.effect * sc.sigma;
  }
  // Intercept pinning a well with no active compound (all active columns -1,
  // interaction product +1 there) exactly at mu.
  const double b0 = sc.mu + double(sc.active.size()) * b - g;
  std::vector<double> mean(std::size_t(d.n), 0.0);
  for (int i = 0; i < d.n; ++i) {
    double m = b0;
    for (int j : sc.active) m += double(d.at(i, j)) * b;
    if (sc.interaction)
      m += double(d.at(i, sc.interaction->first)) * double(d.at(i, sc.interaction->second)) * g;
    mean[std::size_t(i)] = m;
  }
  return mean;
}

std::vector<double> gen_response(const Design& d, const Scenario& sc, std::uint64_t seed) {
  std::vector<double> y = response_means(d, sc);
  Rng rng(seed);
  for (double& v : y) v += sc.sigma * rng.normal();
  return y;
}

std::vector<double> gen_interaction_response(const Design& d, const Scenario& sc,
                                             Heredity heredity, std::uint64_t seed) {
  if (!sc.interaction) throw param_error("interaction scenario has no interaction term");
  check_scenario(d, sc);
  const auto is_active = [&](int j) {
    return std::find(sc.active.begin(), sc.active.end(), j) != sc.active.end();
  };
  const int parents_active =
      int(is_active(sc.interaction->first)) + int(is_active(sc.interaction->second));
  if (heredity == Heredity::strong && parents_active != 2)
    throw param_error("strong heredity needs both interaction parents active");
  if (heredity == Heredity::weak && parents_active != 1)
    throw param_error("weak heredity needs exactly one interaction parent active");
  return gen_response(d, sc, seed);
}

PilotDraw pilot_draw(double mu, double sigma, std::uint64_t seed) {
  if (!std::isfinite(mu)) throw param_error("pilot mean must be finite");
  if (!std::isfinite(sigma) || sigma <= 0.0) throw param_error("pilot sd must be positive");
  Rng rng(seed);
  PilotDraw out;
  out.mean = mu + sigma / std::sqrt(12.0) * rng.normal();
  double ss = 0.0;
  for (int i = 0; i < 11; ++i) {
    const double z = rng.normal();
    ss += z * z;
  }
  out.variance = sigma * sigma * ss / 11.0;
  return out;
}

Rates evaluate(const std::vector<int>& declared, const std::vector<int>& truth, int k) {
  if (k < 1) throw param_error("evaluate needs k >= 1");
  const auto checked_sorted = [&](const std::vector<int>& v, const char* what) {
    std::vector<int> s = v;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 0 || s[i] >= k) throw param_error(std::string(what) + " index out of range");
      if (i > 0 && s[i] == s[i - 1]) throw param_error(std::string(what) + " has duplicates");
    }
    return s;
  };
  const std::vector<int> dec = checked_sorted(declared, "declared");
  const std::vector<int> tru = checked_sorted(truth, "truth");
  std::vector<int> inter;
  std::set_intersection(dec.begin(), dec.end(), tru.begin(), tru.end(),
                        std::back_inserter(inter));
  const auto tp = double(inter.size());
  const auto fp = double(dec.size() - inter.size());
  Rates r;
  if (tru.empty()) {
    if (dec.empty()) r.tpr = 1.0;  // nothing to find, nothing declared
  } else {
    r.tpr = tp / double(tru.size());
  }
  const int negatives = k - int(tru.size());
  if (negatives > 0) r.fpr = fp / double(negatives);
  return r;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::crows: return "crows";
    case Method::poolhits: return "poolhits";
    case Method::ocow: return "ocow";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "crows") return Method::crows;
  if (name == "poolhits") return Method::poolhits;
  if (name == "ocow") return Method::ocow;
  return std::nullopt;
}

namespace {

struct CellSetup {
  const DesignBundle* bundle = nullptr;
  Method method = Method::crows;
  const Design* design = nullptr;  // the matrix this method consumes
  double effect = 0.0;
  std::size_t index = 0;  // cell index in the fixed enumeration order
};

Rates run_replicate(const StudyConfig& cfg, const CellSetup& cell, int rep) {
  const DesignBundle& b = *cell.bundle;
  const Design& d = *cell.design;
  const std::uint64_t seed_r =
      derive_seed(cfg.seed, {std::uint64_t(cell.index), std::uint64_t(rep)});

  // Draw the planted truth (and, for interaction scenarios, the partner).
  Rng pick(derive_seed(seed_r, {1}));
  std::vector<int> idx(std::size_t(b.k));
  for (int j = 0; j < b.k; ++j) idx[std::size_t(j)] = j;
  for (int j = 0; j < cfg.actives; ++j) {
    const auto pos = std::size_t(j) + std::size_t(pick.below(std::uint64_t(b.k - j)));
    std::swap(idx[std::size_t(j)], idx[pos]);
  }
  std::vector<int> active(idx.begin(), idx.begin() + cfg.actives);
  std::sort(active.begin(), active.end());

  Scenario sc;
  sc.mu = cfg.mu;
  sc.sigma = cfg.sigma;
  sc.effect = cell.effect;
  sc.direction = cfg.direction;
  sc.active = active;
  if (cfg.interactions) {
    InteractionSpec is;
    is.form = cfg.interactions->second;
    if (cfg.interactions->first == Heredity::strong) {
      is.first = active[0];
      is.second = active[1];
    } else {
      is.first = active[0];
      // Uniform partner among the inactive compounds (the tail of idx holds
      // exactly those, in shuffled order).
      const auto off = std::size_t(cfg.actives) +
                       std::size_t(pick.below(std::uint64_t(b.k - cfg.actives)));
      is.second = idx[off];
    }
    sc.interaction = is;
  }

  const std::uint64_t y_seed = derive_seed(seed_r, {2});
  const std::vector<double> y =
      cfg.interactions ? gen_interaction_response(d, sc, cfg.interactions->first, y_seed)
                       : gen_response(d, sc, y_seed);

  double mu_use = cfg.mu;
  double sigma_use = cfg.sigma;
  PilotDraw pd;
  if (cfg.pilot) {
    pd = pilot_draw(cfg.mu, cfg.sigma, derive_seed(seed_r, {3}));
    mu_use = pd.mean;
    sigma_use = std::sqrt(std::max(pd.variance, std::numeric_limits<double>::min()));
  }

  std::vector<int> declared;
  switch (cell.method) {
    case Method::crows: {
      declared = analyze_screen(d, y, sigma_use, cfg.direction).hits;
      break;
    }
    case Method::poolhits: {
      const WellLabels labels =
          binarize_wells(y, mu_use, sigma_use, cfg.direction, b.binarize_quantile);
      declared = poolhits_decode(d, labels, b.error_allowance).hits;
      break;
    }
    case Method::ocow: {
      declared = cfg.pilot ? ocow_lenth_analyze(y, mu_use, cfg.direction).hits
                           : ocow_analyze(y, cfg.mu, cfg.sigma, cfg.direction);
      break;
    }
  }
  return evaluate(declared, active, b.k);
}

}  // namespace

std::vector<StudyRow> run_study(const StudyConfig& cfg) {
  if (cfg.bundles.empty()) throw param_error("study needs at least one design bundle");
  if (cfg.methods.empty()) throw param_error("study needs at least one method");
  if (cfg.effects.empty()) throw param_error("study needs at least one effect size");
  for (double e : cfg.effects)
    if (!std::isfinite(e) || e <= 0.0) throw param_error("effect sizes must be positive");
  if (cfg.actives < 1) throw param_error("study needs at least one active compound");
  if (cfg.replicates < 1) throw param_error("study needs at least one replicate");
  if (!std::isfinite(cfg.mu)) throw param_error("study mean must be finite");
  if (!std::isfinite(cfg.sigma) || cfg.sigma <= 0.0)
    throw param_error("study sd must be positive");
  if (cfg.interactions && cfg.actives != 2)
    throw param_error("interaction scenarios use exactly two active compounds");
  for (const DesignBundle& b : cfg.bundles) {
    require_valid(b.screen);
    if (b.screen.k != b.k || b.screen.n != b.n || b.screen.c != b.c)
      throw param_error("bundle shape disagrees with its screen design");
    if (cfg.actives > b.k) throw param_error("more active compounds than compounds");
    if (b.error_allowance < 0) throw param_error("error allowance must be >= 0");
    if (!(b.binarize_quantile > 0.0 && b.binarize_quantile < 1.0))
      throw param_error("binarize quantile must lie in (0, 1)");
    if (cfg.interactions && b.k < 3)
      throw param_error("weak-heredity partners need at least three compounds");
  }
  for (Method m : cfg.methods) {
    if (m == Method::poolhits) {
      for (const DesignBundle& b : cfg.bundles)
        if (!b.pooling)
          throw param_error("bundle '" + b.name + "' has no pooling design for poolhits");
    }
    if (m == Method::ocow) {
      for (const DesignBundle& b : cfg.bundles)
        if (b.k < 6) throw param_error("ocow needs at least six compounds");
    }
  }

  std::vector<StudyRow> rows;
  std::size_t cell_index = 0;
  for (const DesignBundle& b : cfg.bundles) {
    for (Method m : cfg.methods) {
      // Materialize the matrix this method consumes once per (bundle, method).
      Design method_design;
      switch (m) {
        case Method::crows: method_design = b.screen; break;
        case Method::poolhits: method_design = b.pooling->incidence(); break;
        case Method::ocow: method_design = ocow_design(b.k); break;
      }
      for (double effect : cfg.effects) {
        CellSetup cell{&b, m, &method_design, effect, cell_index};
        std::vector<Rates> scores(std::size_t(cfg.replicates));
        parallel_for(0, cfg.replicates, cfg.threads,
                     [&](int r) { scores[std::size_t(r)] = run_replicate(cfg, cell, r); });

        StudyRow row;
        row.design_name = b.name;
        row.method = m;
        row.n = method_design.n;
        row.k = b.k;
        row.c = b.c;
        row.effect = effect;
        row.actives = cfg.actives;
        row.replicates = cfg.replicates;
        const auto fold = [&](auto proj, double& mean_out, double& se_out, int& count_out) {
          double sum = 0.0;
          int count = 0;
          for (const Rates& s : scores)
            if (proj(s)) {
              sum += *proj(s);
              ++count;
            }
          count_out = count;
          if (count == 0) return;
          const double mean = sum / count;
          mean_out = mean;
          if (count >= 2) {
            double ssd = 0.0;
            for (const Rates& s : scores)
              if (proj(s)) {
                const double dlt = *proj(s) - mean;
                ssd += dlt * dlt;
              }
            se_out = std::sqrt(ssd / (double(count) - 1.0) / double(count));
          }
        };
        fold([](const Rates& s) { return s.tpr; }, row.tpr_mean, row.tpr_se, row.tpr_count);
        fold([](const Rates& s) { return s.fpr; }, row.fpr_mean, row.fpr_se, row.fpr_count);
        rows.push_back(std::move(row));
        ++cell_index;
      }
    }
  }
  return rows;
}

std::vector<PresetSpec> desk_presets() {
  // Pooling runs the baseline at its own configuration rule, truncated to the
  // well budget.  For 31 compounds with error allowance 2 and one expected
  // active, the pooled decoder wants gamma*d + 2E + 1 layers; q = 5 would
  // need 7 layers where only q + 1 = 6 exist, so the smallest admissible
  // prime is q = 7 (single-digit codes, pools of 5, 6 layers, 42 wells).  No
  // desk budget holds 42 wells, so the layer count is cut to what fits --
  // 3 layers in 24 wells, 4 in 30 -- and the decode allowance stays at the
  // method's default of 2, exactly as the full-size presets run it.  Pools
  // of 5 fit both capacity limits, so one geometry serves all four presets.
  return {
      {"desk-24x31-c10", 24, 31, 10, 7, 3, 1, 2},
      {"desk-30x31-c10", 30, 31, 10, 7, 4, 1, 2},
      {"desk-24x31-c5", 24, 31, 5, 7, 3, 1, 2},
      {"desk-30x31-c5", 30, 31, 5, 7, 4, 1, 2},
  };
}

std::vector<PresetSpec> table1_presets() {
  return {
      {"t1-88x96-c10", 88, 96, 10, 11, 8, 1, 2},
      {"t1-88x96-c30", 88, 96, 30, 11, 8, 1, 2},
      {"t1-88x96-c50", 88, 96, 50, 11, 8, 1, 2},
      {"t1-85x150-c10", 85, 150, 10, 17, 5, 1, 2},
      {"t1-91x150-c30", 91, 150, 30, 13, 7, 1, 2},
      {"t1-91x150-c50", 91, 150, 50, 13, 7, 1, 2},
      {"t1-92x192-c10", 92, 192, 10, 23, 4, 1, 2},
      {"t1-99x192-c30", 99, 192, 30, 11, 9, 2, 2},
      {"t1-99x192-c50", 99, 192, 50, 11, 9, 2, 2},
  };
}

DesignBundle build_bundle(const PresetSpec& spec, int starts, std::uint64_t seed, int threads) {
  ConstructConfig cc;
  cc.n = spec.n;
  cc.k = spec.k;
  cc.c = spec.c;
  cc.starts = starts;
  cc.seed = seed;
  cc.threads = threads;
  ConstructResult res = construct(cc);

  DesignBundle b;
  b.name = spec.name;
  b.n = spec.n;
  b.k = spec.k;
  b.c = spec.c;
  b.screen = std::move(res.best.design);
  b.error_allowance = spec.error_allowance;
  if (spec.q > 0) {
    // The pooling design must respect the same well capacity as the screen.
    b.pooling = make_std_design(spec.k, spec.q, spec.layers, spec.gamma, spec.c);
  }
  return b;
}

}  // namespace crows
