#include "crows/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crows/analyze.hpp"
#include "crows/baselines.hpp"
#include "crows/bounds.hpp"
#include "crows/common.hpp"
#include "crows/construct.hpp"
#include "crows/design.hpp"
#include "crows/io.hpp"
#include "crows/rng.hpp"
#include "crows/sim.hpp"

namespace crows {

namespace {

namespace fs = std::filesystem;

int resolve_threads(int threads) {
  if (threads < 0) throw param_error("--threads must be >= 0");
  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
  }
  return threads;
}

Direction parse_direction(const std::string& s) {
  if (s == "positive") return Direction::positive;
  if (s == "negative") return Direction::negative;
  throw param_error("--direction must be positive or negative");
}

/// Collects input/output digests during a command and writes the manifest
/// next to the command's primary output.
class ManifestScope {
 public:
  ManifestScope(std::string subcommand, std::vector<std::string> argv, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    m_.subcommand = std::move(subcommand);
    m_.argv = std::move(argv);
    m_.seed = seed;
    m_.version = kVersion;
  }
  void input(const fs::path& p) { m_.inputs[p.string()] = file_digest(p); }
  void output(const fs::path& p) { m_.outputs[p.string()] = file_digest(p); }
  void write_next_to(const fs::path& primary) {
    m_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_manifest(fs::path(primary.string() + ".manifest.json"), m_);
  }

 private:
  RunManifest m_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> labels_for(const std::string& compound_map, int k) {
  return compound_map.empty() ? default_labels(k) : read_compound_map(compound_map, k);
}

void print_hits_line(std::ostream& os, const std::vector<int>& hits) {
  os << "hits:";
  for (int h : hits) os << ' ' << (h + 1);
  os << '\n';
}

nlohmann::json hits_json(const std::vector<int>& hits) {
  nlohmann::json arr = nlohmann::json::array();
  for (int h : hits) arr.push_back(h + 1);
  return arr;
}

// ---------------------------------------------------------------- construct

struct ConstructOpts {
  int n = 0, k = 0, c = 0;
  int starts = 100, pass_cap = 10000, threads = 1;
  std::uint64_t seed = 0;
  std::string out, pool_sheet, compound_map, log;
};

int cmd_construct(const ConstructOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("construct", argv, o.seed);
  ConstructConfig cfg;
  cfg.n = o.n;
  cfg.k = o.k;
  cfg.c = o.c;
  cfg.starts = o.starts;
  cfg.seed = o.seed;
  cfg.pass_cap = o.pass_cap;
  cfg.threads = resolve_threads(o.threads);
  const ConstructResult res = construct(cfg);

  if (!o.compound_map.empty()) ms.input(o.compound_map);
  write_design_csv(o.out, res.best.design);
  ms.output(o.out);
  if (!o.pool_sheet.empty()) {
    write_pool_sheet(o.pool_sheet, res.best.design, labels_for(o.compound_map, o.k));
    ms.output(o.pool_sheet);
  }
  if (!o.log.empty()) {
    write_start_log_csv(o.log, res.log);
    ms.output(o.log);
  }
  ms.write_next_to(o.out);

  const SlackProfile slack = row_slack(res.best.design);
  std::cout << "n " << o.n << "  k " << o.k << "  c " << o.c << '\n'
            << "q " << res.best.q << '\n'
            << "ue " << format_double(ue_s2(res.best)) << '\n'
            << "best start " << res.best_start << " of " << o.starts << '\n'
            << "slack min " << slack.min << "  max " << slack.max << "  mean "
            << format_double(slack.mean) << '\n'
            << "wrote " << o.out << '\n';
  return 0;
}

// -------------------------------------------------------------------- sweep

struct SweepOpts {
  int n = 0, k = 0;
  int starts = 100, pass_cap = 10000, threads = 1;
  std::uint64_t seed = 0;
  std::string c_list, out;
};

int cmd_sweep(const SweepOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("sweep", argv, o.seed);
  const std::vector<int> cs = parse_capacity_list(o.c_list);
  const std::vector<SweepRow> rows =
      constraint_sweep(o.n, o.k, cs, o.starts, o.seed, resolve_threads(o.threads), o.pass_cap);
  write_sweep_csv(o.out, rows);
  ms.output(o.out);
  ms.write_next_to(o.out);
  std::cout << "wrote " << o.out << " (" << rows.size() << " capacities)\n";
  return 0;
}

// -------------------------------------------------------------------- bound

int cmd_bound(int n, int k, int c, bool json) {
  const BoundReport r = tight_row_bound(n, k, c);
  if (json) {
    nlohmann::json j;
    j["n"] = r.n;
    j["k"] = r.k;
    j["c"] = r.c;
    j["gamma"] = r.gamma;
    j["delta"] = r.delta;
    j["phi"] = r.phi;
    j["psi"] = r.psi;
    j["colsum_bound"] = r.colsum_bound;
    j["rowsum_square"] = r.rowsum_square;
    j["pairdiff_bound"] = r.pairdiff_bound;
    j["q_bound"] = r.q_bound;
    j["ue_bound"] = r.ue_bound;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "n " << r.n << "\nk " << r.k << "\nc " << r.c << "\ngamma " << r.gamma
              << "\ndelta " << r.delta << "\nphi " << r.phi << "\npsi " << r.psi
              << "\ncolsum_bound " << r.colsum_bound << "\nrowsum_square " << r.rowsum_square
              << "\npairdiff_bound " << r.pairdiff_bound << "\nq_bound " << r.q_bound
              << "\nue_bound " << format_double(r.ue_bound) << '\n';
  }
  return 0;
}

// ------------------------------------------------------------------ certify

int cmd_certify(const std::string& design_path, int c, bool json) {
  const Design d = read_design_csv(design_path, c);
  const Certificate cert = certify(d);
  if (json) {
    nlohmann::json j;
    j["applicable"] = cert.applicable;
    j["q"] = cert.q;
    j["ue"] = cert.ue;
    if (cert.applicable) {
      j["q_bound"] = cert.q_bound;
      j["ue_bound"] = cert.ue_bound;
      j["gap_q"] = cert.gap_q;
      j["gap_ratio"] = cert.gap_ratio;
      j["tight"] = cert.tight;
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "q " << cert.q << "\nue " << format_double(cert.ue) << '\n';
    if (cert.applicable) {
      std::cout << "q_bound " << cert.q_bound << "\nue_bound " << format_double(cert.ue_bound)
                << "\ngap_q " << cert.gap_q << "\ngap_ratio " << format_double(cert.gap_ratio)
                << "\noptimal " << (cert.tight ? "yes" : "no") << '\n';
    } else {
      std::cout << "bound not applicable: the design has slack rows\n";
    }
  }
  return 0;
}

// ------------------------------------------------------------------ analyze

struct AnalyzeOpts {
  std::string design, response;
  double sigma = 0.0;
  std::string direction = "positive";
  std::string coding = "original";
  int grid = 100;
  double floor_log = -8.0;
  bool json = false;
  std::string out, profile_out;
};

int cmd_analyze(const AnalyzeOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("analyze", argv, 0);
  const Design d = read_design_csv(o.design);
  ms.input(o.design);
  const std::vector<double> y = read_response_csv(o.response);
  ms.input(o.response);
  if (int(y.size()) != d.n)
    throw data_error("response has " + std::to_string(y.size()) + " wells but the design has " +
                     std::to_string(d.n) + " rows");

  AnalyzeConfig cfg;
  cfg.grid_size = o.grid;
  cfg.lambda_floor_log = o.floor_log;
  cfg.coding = o.coding == "scaled" ? ThresholdCoding::scaled : ThresholdCoding::original;
  const AnalysisResult res =
      analyze_screen(d, y, o.sigma, parse_direction(o.direction), cfg);

  nlohmann::json j;
  j["direction"] = o.direction;
  j["sigma"] = res.sigma;
  j["lambda"] = res.lambda;
  j["winner_index"] = res.winner_index;
  j["intercept"] = res.intercept;
  j["hits"] = hits_json(res.hits);
  j["estimates"] = res.hit_estimates;

  if (o.json) std::cout << j.dump(2) << '\n';
  else {
    print_hits_line(std::cout, res.hits);
    std::cout << "lambda " << format_double(res.lambda) << "\nintercept "
              << format_double(res.intercept) << '\n';
  }

  const bool has_output = !o.out.empty() || !o.profile_out.empty();
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw data_error(o.out + ": cannot open for writing");
    f << j.dump(2) << '\n';
    if (!f) throw data_error(o.out + ": write failed");
    f.close();
    ms.output(o.out);
  }
  if (!o.profile_out.empty()) {
    std::ofstream f(o.profile_out, std::ios::binary);
    if (!f) throw data_error(o.profile_out + ": cannot open for writing");
    f << "lambda,support_size,bic\n";
    for (const LambdaDiagnostics& t : res.trace)
      f << format_double(t.lambda) << ',' << t.support_size << ',' << format_double(t.bic)
        << '\n';
    if (!f) throw data_error(o.profile_out + ": write failed");
    f.close();
    ms.output(o.profile_out);
  }
  if (has_output) ms.write_next_to(o.out.empty() ? o.profile_out : o.out);
  return 0;
}

// ---------------------------------------------------------------------- std

struct StdOpts {
  int k = 0, q = 0, layers = 0, gamma = 0;
  int capacity = 0;  // 0 = unconstrained
  std::string out, pool_sheet, compound_map;
};

int cmd_std(const StdOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("std", argv, 0);
  std::optional<int> cap;
  if (o.capacity > 0) cap = o.capacity;
  const STDesign sd = make_std_design(o.k, o.q, o.layers, o.gamma, cap);
  const Design inc = sd.incidence();

  if (!o.compound_map.empty()) ms.input(o.compound_map);
  write_design_csv(o.out, inc);
  ms.output(o.out);
  if (!o.pool_sheet.empty()) {
    write_pool_sheet(o.pool_sheet, inc, labels_for(o.compound_map, o.k));
    ms.output(o.pool_sheet);
  }
  ms.write_next_to(o.out);

  std::cout << "k " << sd.k << "  q " << sd.q << "  layers " << sd.layers << "  gamma "
            << sd.gamma << '\n'
            << "wells " << sd.wells() << '\n'
            << "max pool size " << sd.max_pool_size() << '\n'
            << "wrote " << o.out << '\n';
  return 0;
}

// ---------------------------------------------------------- poolhits-decode

struct DecodeOpts {
  std::string design, labels;
  int allowance = 2;
  bool json = false;
  std::string out;
};

const char* call_name(CompoundCall c) {
  switch (c) {
    case CompoundCall::inert: return "inert";
    case CompoundCall::active: return "active";
    case CompoundCall::inconclusive: return "inconclusive";
  }
  return "?";
}

int cmd_decode(const DecodeOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("poolhits-decode", argv, 0);
  const Design inc = read_design_csv(o.design);
  ms.input(o.design);
  const WellLabels labels = read_labels_csv(o.labels);
  ms.input(o.labels);
  if (int(labels.positive.size()) != inc.n)
    throw data_error("labels cover " + std::to_string(labels.positive.size()) +
                     " wells but the design has " + std::to_string(inc.n) + " rows");
  const DecodeResult res = poolhits_decode(inc, labels, o.allowance);

  if (o.json) {
    nlohmann::json j;
    j["hits"] = hits_json(res.hits);
    nlohmann::json calls = nlohmann::json::array();
    for (CompoundCall c : res.calls) calls.push_back(call_name(c));
    j["calls"] = calls;
    std::cout << j.dump(2) << '\n';
  } else {
    print_hits_line(std::cout, res.hits);
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw data_error(o.out + ": cannot open for writing");
    f << "compound,call,hit\n";
    for (std::size_t i = 0; i < res.calls.size(); ++i) {
      const bool hit = res.calls[i] != CompoundCall::inert;
      f << (i + 1) << ',' << call_name(res.calls[i]) << ',' << int(hit) << '\n';
    }
    if (!f) throw data_error(o.out + ": write failed");
    f.close();
    ms.output(o.out);
    ms.write_next_to(o.out);
  }
  return 0;
}

// --------------------------------------------------------------------- ocow

struct OcowOpts {
  std::string response;
  double mu = 0.0, sigma = 1.0;
  std::string direction = "positive";
  bool lenth = false;
  bool json = false;
};

int cmd_ocow(const OcowOpts& o) {
  const std::vector<double> y = read_response_csv(o.response);
  const Direction dir = parse_direction(o.direction);
  if (o.lenth) {
    const OcowLenthResult res = ocow_lenth_analyze(y, o.mu, dir);
    if (o.json) {
      nlohmann::json j;
      j["hits"] = hits_json(res.hits);
      j["pse"] = res.pse;
      j["threshold"] = res.threshold;
      j["degenerate"] = res.degenerate;
      std::cout << j.dump(2) << '\n';
    } else {
      print_hits_line(std::cout, res.hits);
      std::cout << "pse " << format_double(res.pse) << "\nthreshold "
                << format_double(res.threshold) << '\n';
      if (res.degenerate) std::cout << "degenerate contrasts: nothing declared\n";
    }
  } else {
    const std::vector<int> hits = ocow_analyze(y, o.mu, o.sigma, dir);
    if (o.json) {
      nlohmann::json j;
      j["hits"] = hits_json(hits);
      std::cout << j.dump(2) << '\n';
    } else {
      print_hits_line(std::cout, hits);
    }
  }
  return 0;
}

// ----------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string preset = "desk";
  std::vector<std::string> bundles;
  std::vector<std::string> methods{"crows", "poolhits", "ocow"};
  std::vector<double> effects{1.0, 2.0, 3.0, 4.0};
  int reps = 1000;
  int actives = 1;
  std::uint64_t seed = 42;
  std::uint64_t construct_seed = 7;
  double mu = 0.0, sigma = 1.0;
  std::string direction = "positive";
  bool pilot = false;
  std::string interactions = "none";
  std::string heredity = "strong";
  int starts = 100;
  int threads = 1;
  std::string out;
};

int cmd_simulate(const SimulateOpts& o, const std::vector<std::string>& argv) {
  ManifestScope ms("simulate", argv, o.seed);
  std::vector<PresetSpec> specs;
  if (o.preset == "desk") specs = desk_presets();
  else if (o.preset == "table1") specs = table1_presets();
  else throw param_error("--preset must be desk or table1");

  if (!o.bundles.empty()) {
    std::vector<PresetSpec> chosen;
    for (const PresetSpec& s : specs)
      if (std::find(o.bundles.begin(), o.bundles.end(), s.name) != o.bundles.end())
        chosen.push_back(s);
    for (const std::string& want : o.bundles) {
      bool known = false;
      for (const PresetSpec& s : specs) known = known || s.name == want;
      if (!known) throw param_error("unknown bundle '" + want + "' in preset " + o.preset);
    }
    specs = std::move(chosen);
  }
  if (specs.empty()) throw param_error("no bundles selected");

  StudyConfig cfg;
  cfg.threads = resolve_threads(o.threads);
  for (std::size_t i = 0; i < specs.size(); ++i)
    cfg.bundles.push_back(build_bundle(specs[i], o.starts,
                                       derive_seed(o.construct_seed, {0xB0D1, i}),
                                       cfg.threads));
  for (const std::string& name : o.methods) {
    const std::optional<Method> m = parse_method(name);
    if (!m) throw param_error("unknown method '" + name + "'");
    cfg.methods.push_back(*m);
  }
  cfg.effects = o.effects;
  cfg.actives = o.actives;
  cfg.replicates = o.reps;
  cfg.seed = o.seed;
  cfg.mu = o.mu;
  cfg.sigma = o.sigma;
  cfg.direction = parse_direction(o.direction);
  cfg.pilot = o.pilot;
  if (o.interactions != "none") {
    InteractionForm form;
    if (o.interactions == "synergistic") form = InteractionForm::synergistic;
    else if (o.interactions == "antagonistic") form = InteractionForm::antagonistic;
    else throw param_error("--interactions must be none, synergistic or antagonistic");
    Heredity her;
    if (o.heredity == "strong") her = Heredity::strong;
    else if (o.heredity == "weak") her = Heredity::weak;
    else throw param_error("--heredity must be strong or weak");
    cfg.interactions = std::make_pair(her, form);
  }

  const std::vector<StudyRow> rows = run_study(cfg);
  write_study_csv(o.out, rows);
  ms.output(o.out);
  ms.write_next_to(o.out);

  for (const StudyRow& r : rows) {
    std::cout << r.design_name << ' ' << method_name(r.method) << " D="
              << format_double(r.effect) << " tpr=" << format_double(r.tpr_mean) << " ("
              << format_double(r.tpr_se) << ") fpr=" << format_double(r.fpr_mean) << " ("
              << format_double(r.fpr_se) << ")\n";
  }
  std::cout << "wrote " << o.out << '\n';
  return 0;
}

// ------------------------------------------------------------------- replay

int cmd_replay(const std::string& manifest_path) {
  const RunManifest m = read_manifest(manifest_path);
  for (const auto& [path, digest] : m.inputs) {
    if (file_digest(path) != digest)
      throw data_error("input " + path + " changed since the recorded run");
  }
  const int rc = run_cli(m.argv);
  if (rc != 0) {
    std::cerr << "replay: recorded command failed with exit code " << rc << '\n';
    return rc;
  }
  bool ok = true;
  for (const auto& [path, digest] : m.outputs) {
    const std::string now = file_digest(path);
    const bool match = now == digest;
    ok = ok && match;
    std::cout << (match ? "ok       " : "MISMATCH ") << path << '\n';
  }
  if (!ok) {
    std::cerr << "replay: outputs differ from the recorded run\n";
    return 1;
  }
  std::cout << "replay: all outputs match\n";
  return 0;
}

}  // namespace

std::vector<int> parse_capacity_list(const std::string& spec) {
  std::vector<int> out;
  std::size_t start = 0;
  const auto parse_one = [&](const std::string& tok) -> int {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw param_error("bad capacity token '" + tok + "'");
    }
  };
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string tok =
        spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (tok.empty()) throw param_error("empty capacity token");
    const std::size_t dots = tok.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_one(tok));
    } else {
      const int lo = parse_one(tok.substr(0, dots));
      const int hi = parse_one(tok.substr(dots + 2));
      if (lo > hi) throw param_error("descending capacity range '" + tok + "'");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw param_error("empty capacity list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (int v : out)
    if (v < 1) throw param_error("capacities must be >= 1");
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Capacity-constrained screening designs: construction, bounds and analysis"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int rc = 0;

  ConstructOpts co;
  CLI::App* c_construct = app.add_subcommand(
      "construct", "Build a screen by multi-start coordinate exchange");
  c_construct->add_option("--n", co.n, "wells (rows)")->required();
  c_construct->add_option("--k", co.k, "compounds (columns)")->required();
  c_construct->add_option("--c", co.c, "well capacity")->required();
  c_construct->add_option("--starts", co.starts, "random starts");
  c_construct->add_option("--seed", co.seed, "master seed");
  c_construct->add_option("--pass-cap", co.pass_cap, "max exchange passes per start");
  c_construct->add_option("--threads", co.threads, "worker threads (0 = all cores)")
      ->envname("CROWS_THREADS");
  c_construct->add_option("--out", co.out, "design CSV to write")->required();
  c_construct->add_option("--pool-sheet", co.pool_sheet, "picking sheet to write");
  c_construct->add_option("--compound-map", co.compound_map, "index,label CSV naming compounds");
  c_construct->add_option("--log", co.log, "per-start log CSV to write");
  c_construct->callback([&] { rc = cmd_construct(co, args); });

  SweepOpts so;
  CLI::App* c_sweep =
      app.add_subcommand("sweep", "Construct across a list of capacities and tabulate");
  c_sweep->add_option("--n", so.n, "wells (rows)")->required();
  c_sweep->add_option("--k", so.k, "compounds (columns)")->required();
  c_sweep->add_option("--c-list", so.c_list, "capacities, e.g. 2..12,16,20..31")->required();
  c_sweep->add_option("--starts", so.starts, "random starts per capacity");
  c_sweep->add_option("--seed", so.seed, "master seed");
  c_sweep->add_option("--pass-cap", so.pass_cap, "max exchange passes per start");
  c_sweep->add_option("--threads", so.threads, "worker threads (0 = all cores)")
      ->envname("CROWS_THREADS");
  c_sweep->add_option("--out", so.out, "sweep CSV to write")->required();
  c_sweep->callback([&] { rc = cmd_sweep(so, args); });

  struct {
    int n = 0, k = 0, c = 0;
    bool json = false;
  } bo;
  CLI::App* c_bound = app.add_subcommand("bound", "Analytic criterion bound for tight designs");
  c_bound->add_option("--n", bo.n, "wells (rows)")->required();
  c_bound->add_option("--k", bo.k, "compounds (columns)")->required();
  c_bound->add_option("--c", bo.c, "well capacity")->required();
  c_bound->add_flag("--json", bo.json, "JSON output");
  c_bound->callback([&] { rc = cmd_bound(bo.n, bo.k, bo.c, bo.json); });

  struct {
    std::string design;
    int c = 0;
    bool json = false;
  } ce;
  CLI::App* c_certify = app.add_subcommand("certify", "Compare a design against the bound");
  c_certify->add_option("--design", ce.design, "design CSV")->required();
  c_certify->add_option("--c", ce.c, "well capacity the design was built for")->required();
  c_certify->add_flag("--json", ce.json, "JSON output");
  c_certify->callback([&] { rc = cmd_certify(ce.design, ce.c, ce.json); });

  AnalyzeOpts ao;
  CLI::App* c_analyze = app.add_subcommand("analyze", "Declare hits from one screen response");
  c_analyze->add_option("--design", ao.design, "design CSV")->required();
  c_analyze->add_option("--response", ao.response, "well,response CSV")->required();
  c_analyze->add_option("--sigma", ao.sigma, "response noise sd")->required();
  c_analyze->add_option("--direction", ao.direction, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}));
  c_analyze->add_option("--coding", ao.coding, "threshold coding: original or scaled")
      ->check(CLI::IsMember({"original", "scaled"}));
  c_analyze->add_option("--grid", ao.grid, "penalty grid size");
  c_analyze->add_option("--floor-log", ao.floor_log, "log of the penalty floor scale");
  c_analyze->add_flag("--json", ao.json, "JSON output");
  c_analyze->add_option("--out", ao.out, "result JSON to write");
  c_analyze->add_option("--profile-out", ao.profile_out, "per-penalty diagnostics CSV");
  c_analyze->callback([&] { rc = cmd_analyze(ao, args); });

  StdOpts sd;
  CLI::App* c_std = app.add_subcommand("std", "Build a layered prime-modulus pooling design");
  c_std->add_option("--k", sd.k, "compounds")->required();
  c_std->add_option("--q", sd.q, "prime pool count per layer")->required();
  c_std->add_option("--a", sd.layers, "layers")->required();
  c_std->add_option("--gamma", sd.gamma, "digit degree (q^(gamma+1) >= k)")->required();
  c_std->add_option("--c", sd.capacity, "well capacity cap (0 = unconstrained)");
  c_std->add_option("--out", sd.out, "incidence CSV to write")->required();
  c_std->add_option("--pool-sheet", sd.pool_sheet, "picking sheet to write");
  c_std->add_option("--compound-map", sd.compound_map, "index,label CSV naming compounds");
  c_std->callback([&] { rc = cmd_std(sd, args); });

  DecodeOpts dc;
  CLI::App* c_decode =
      app.add_subcommand("poolhits-decode", "Call compounds from binary well labels");
  c_decode->add_option("--design", dc.design, "incidence CSV")->required();
  c_decode->add_option("--labels", dc.labels, "well,positive CSV")->required();
  c_decode->add_option("--E", dc.allowance, "tolerated well errors per compound")
      ->check(CLI::NonNegativeNumber);
  c_decode->add_flag("--json", dc.json, "JSON output");
  c_decode->add_option("--out", dc.out, "per-compound calls CSV to write");
  c_decode->callback([&] { rc = cmd_decode(dc, args); });

  OcowOpts oo;
  CLI::App* c_ocow = app.add_subcommand("ocow", "One-compound-one-well thresholding");
  c_ocow->add_option("--response", oo.response, "well,response CSV")->required();
  c_ocow->add_option("--mu", oo.mu, "inactive mean (or its estimate)");
  c_ocow->add_option("--sigma", oo.sigma, "noise sd (known-parameter mode)");
  c_ocow->add_option("--direction", oo.direction, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}));
  c_ocow->add_flag("--lenth", oo.lenth, "robust pseudo-sd mode (sd unknown)");
  c_ocow->add_flag("--json", oo.json, "JSON output");
  c_ocow->callback([&] { rc = cmd_ocow(oo); });

  SimulateOpts si;
  CLI::App* c_sim = app.add_subcommand("simulate", "Monte-Carlo method comparison");
  c_sim->add_option("--preset", si.preset, "desk or table1")
      ->check(CLI::IsMember({"desk", "table1"}));
  c_sim->add_option("--bundles", si.bundles, "bundle names from the preset")->delimiter(',');
  c_sim->add_option("--methods", si.methods, "crows,poolhits,ocow")->delimiter(',');
  c_sim->add_option("--D", si.effects, "effect sizes in sd units")->delimiter(',');
  c_sim->add_option("--reps", si.reps, "replicates per cell");
  c_sim->add_option("--a", si.actives, "active compounds per replicate");
  c_sim->add_option("--seed", si.seed, "study master seed");
  c_sim->add_option("--construct-seed", si.construct_seed, "seed for building the screens");
  c_sim->add_option("--mu", si.mu, "inactive mean");
  c_sim->add_option("--sigma", si.sigma, "noise sd");
  c_sim->add_option("--direction", si.direction, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}));
  c_sim->add_flag("--pilot", si.pilot, "estimate mu and sigma from a pilot draw");
  c_sim->add_option("--interactions", si.interactions, "none, synergistic or antagonistic")
      ->check(CLI::IsMember({"none", "synergistic", "antagonistic"}));
  c_sim->add_option("--heredity", si.heredity, "strong or weak")
      ->check(CLI::IsMember({"strong", "weak"}));
  c_sim->add_option("--starts", si.starts, "construction starts per bundle");
  c_sim->add_option("--threads", si.threads, "worker threads (0 = all cores)")
      ->envname("CROWS_THREADS");
  c_sim->add_option("--out", si.out, "study CSV to write")->required();
  c_sim->callback([&] { rc = cmd_simulate(si, args); });

  struct {
    std::string manifest;
  } rp;
  CLI::App* c_replay =
      app.add_subcommand("replay", "Re-run a recorded command and verify its outputs");
  c_replay->add_option("manifest", rp.manifest, "manifest JSON written by a previous run")
      ->required();
  c_replay->callback([&] { rc = cmd_replay(rp.manifest); });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("crows");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const param_error& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}

}  // namespace crows
