#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crows/baselines.hpp"
#include "crows/cli.hpp"
#include "crows/common.hpp"
#include "crows/construct.hpp"
#include "crows/io.hpp"
#include "crows/rng.hpp"
#include "crows/sim.hpp"

#include "test_util.hpp"

using namespace crows;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("crows-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CliResult {
  int rc = -1;
  std::string out;
  std::string err;
};

CliResult run_cli_capture(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  CliResult res;
  try {
    res.rc = run_cli(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  res.out = out.str();
  res.err = err.str();
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(bool(out));
  out << content;
}

}  // namespace

TEST_CASE("capacity lists expand ranges, sort and deduplicate") {
  CHECK(parse_capacity_list("2..5,9") == std::vector<int>{2, 3, 4, 5, 9});
  CHECK(parse_capacity_list("3") == std::vector<int>{3});
  CHECK(parse_capacity_list("9,2..4,3") == std::vector<int>{2, 3, 4, 9});
  CHECK_THROWS_AS((void)parse_capacity_list(""), param_error);
  CHECK_THROWS_AS((void)parse_capacity_list("2,,3"), param_error);
  CHECK_THROWS_AS((void)parse_capacity_list("5..2"), param_error);
  CHECK_THROWS_AS((void)parse_capacity_list("a..b"), param_error);
  CHECK_THROWS_AS((void)parse_capacity_list("0,3"), param_error);
}

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-0.25) == "-0.25");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("design files round-trip and reject malformed content") {
  TempDir tmp;
  Rng rng(2024);
  const Design d = testutil::random_design(rng, 12, 9, 4);
  const std::string path = tmp.file("d.csv");
  write_design_csv(path, d);

  const Design back = read_design_csv(path, 4);
  CHECK(back.n == d.n);
  CHECK(back.k == d.k);
  CHECK(back.c == 4);
  CHECK(back.entries == d.entries);

  const Design loose = read_design_csv(path);
  CHECK(loose.c == 9);  // capacity defaults to k

  // Capacity the file does not satisfy.
  bool violates = false;
  for (int i = 0; i < d.n; ++i) violates = violates || d.row_plus_count(i) > 1;
  if (violates) CHECK_THROWS_AS((void)read_design_csv(path, 1), data_error);

  spit(tmp.file("bad_entry.csv"), "f1,f2\n1,2\n");
  CHECK_THROWS_AS((void)read_design_csv(tmp.file("bad_entry.csv")), data_error);
  spit(tmp.file("ragged.csv"), "f1,f2\n1,-1\n1\n");
  CHECK_THROWS_AS((void)read_design_csv(tmp.file("ragged.csv")), data_error);
  spit(tmp.file("empty.csv"), "");
  CHECK_THROWS_AS((void)read_design_csv(tmp.file("empty.csv")), data_error);
  CHECK_THROWS_AS((void)read_design_csv(tmp.file("missing.csv")), data_error);
}

TEST_CASE("response files key on the well column, not the row order") {
  TempDir tmp;
  const std::vector<double> y{0.5, -1.25, 3.0};
  write_response_csv(tmp.file("y.csv"), y);
  CHECK(read_response_csv(tmp.file("y.csv")) == y);

  // Rows permuted on disk come back in well order.
  spit(tmp.file("perm.csv"), "well,response\n2,-1.25\n3,3\n1,0.5\n");
  CHECK(read_response_csv(tmp.file("perm.csv")) == y);

  spit(tmp.file("dup.csv"), "well,response\n1,0.5\n1,1.5\n");
  CHECK_THROWS_AS((void)read_response_csv(tmp.file("dup.csv")), data_error);
  spit(tmp.file("gap.csv"), "well,response\n1,0.5\n3,1.5\n");
  CHECK_THROWS_AS((void)read_response_csv(tmp.file("gap.csv")), data_error);
  spit(tmp.file("head.csv"), "id,value\n1,0.5\n");
  CHECK_THROWS_AS((void)read_response_csv(tmp.file("head.csv")), data_error);
  spit(tmp.file("word.csv"), "well,response\n1,abc\n");
  CHECK_THROWS_AS((void)read_response_csv(tmp.file("word.csv")), data_error);
}

TEST_CASE("label files round-trip with domain checks") {
  TempDir tmp;
  WellLabels labels;
  labels.positive = {1, 0, 0, 1};
  write_labels_csv(tmp.file("l.csv"), labels);
  CHECK(read_labels_csv(tmp.file("l.csv")).positive == labels.positive);

  spit(tmp.file("bad.csv"), "well,positive\n1,2\n");
  CHECK_THROWS_AS((void)read_labels_csv(tmp.file("bad.csv")), data_error);
}

TEST_CASE("compound maps bind every index exactly once") {
  TempDir tmp;
  spit(tmp.file("map.csv"), "index,label\n2,aspirin\n1,caffeine\n3,taxol b\n");
  const std::vector<std::string> labels = read_compound_map(tmp.file("map.csv"), 3);
  CHECK(labels == std::vector<std::string>{"caffeine", "aspirin", "taxol b"});

  spit(tmp.file("dup.csv"), "index,label\n1,a\n1,b\n");
  CHECK_THROWS_AS((void)read_compound_map(tmp.file("dup.csv"), 2), data_error);
  spit(tmp.file("short.csv"), "index,label\n1,a\n");
  CHECK_THROWS_AS((void)read_compound_map(tmp.file("short.csv"), 2), data_error);
}

TEST_CASE("pool sheets list the contents of each well") {
  TempDir tmp;
  Design d = make_design(2, 3, 2);
  d.set(0, 0, 1);
  d.set(0, 2, 1);
  write_pool_sheet(tmp.file("sheet.txt"), d, {"a", "b", "c"});
  CHECK(slurp(tmp.file("sheet.txt")) == "well 1: a c\nwell 2:\n");
}

TEST_CASE("tabular writers produce stable golden output") {
  TempDir tmp;

  StartRecord rec;
  rec.start = 0;
  rec.seed = 12345;
  rec.q = 112;
  rec.ue = 0.8;
  rec.passes = 3;
  rec.converged = true;
  write_start_log_csv(tmp.file("log.csv"), {rec});
  CHECK(slurp(tmp.file("log.csv")) ==
        "start,seed,q,ue,passes,converged\n0,12345,112,0.8,3,1\n");

  SweepRow tight;
  tight.c = 2;
  tight.q = 100;
  tight.ue = 1.25;
  tight.ue_doubled = 2.5;
  tight.bound_applicable = true;
  tight.q_bound = 96;
  tight.ue_bound = 1.2;
  SweepRow slackrow;
  slackrow.c = 3;
  slackrow.q = 90;
  slackrow.ue = 1.0;
  slackrow.ue_doubled = 2.0;
  slackrow.slack_min = 0;
  slackrow.slack_max = 2;
  slackrow.slack_mean = 0.5;
  write_sweep_csv(tmp.file("sweep.csv"), {tight, slackrow});
  CHECK(slurp(tmp.file("sweep.csv")) ==
        "c,q,ue,ue_doubled,slack_min,slack_max,slack_mean,q_bound,ue_bound\n"
        "2,100,1.25,2.5,0,0,0,96,1.2\n"
        "3,90,1,2,0,2,0.5,,\n");

  StudyRow row;
  row.design_name = "tiny";
  row.method = Method::ocow;
  row.n = 9;
  row.k = 9;
  row.c = 3;
  row.effect = 2.0;
  row.actives = 1;
  row.replicates = 4;
  row.tpr_mean = 0.75;
  row.tpr_se = 0.25;
  row.tpr_count = 4;
  row.fpr_mean = 0.125;
  row.fpr_se = 0.0625;
  row.fpr_count = 4;
  write_study_csv(tmp.file("study.csv"), {row});
  CHECK(slurp(tmp.file("study.csv")) ==
        "design,method,n,k,c,D,a,replicates,tpr,tpr_se,tpr_count,fpr,fpr_se,fpr_count\n"
        "tiny,ocow,9,9,3,2,1,4,0.75,0.25,4,0.125,0.0625,4\n");
}

TEST_CASE("file digests match the reference checksum") {
  TempDir tmp;
  spit(tmp.file("abc.txt"), "abc");
  CHECK(file_digest(tmp.file("abc.txt")) == "e71fa2190541574b");
  spit(tmp.file("empty.txt"), "");
  CHECK(file_digest(tmp.file("empty.txt")) == "cbf29ce484222325");
}

TEST_CASE("manifests round-trip every field") {
  TempDir tmp;
  RunManifest m;
  m.subcommand = "construct";
  m.argv = {"construct", "--n", "4"};
  m.seed = 987654321;
  m.version = kVersion;
  m.inputs["in.csv"] = "0123456789abcdef";
  m.outputs["out.csv"] = "fedcba9876543210";
  m.wall_seconds = 1.25;
  write_manifest(tmp.file("m.json"), m);
  const RunManifest back = read_manifest(tmp.file("m.json"));
  CHECK(back.subcommand == m.subcommand);
  CHECK(back.argv == m.argv);
  CHECK(back.seed == m.seed);
  CHECK(back.version == m.version);
  CHECK(back.inputs == m.inputs);
  CHECK(back.outputs == m.outputs);
  CHECK(back.wall_seconds == m.wall_seconds);

  spit(tmp.file("broken.json"), "{ not json");
  CHECK_THROWS_AS((void)read_manifest(tmp.file("broken.json")), data_error);
  spit(tmp.file("partial.json"), "{\"subcommand\": \"x\"}");
  CHECK_THROWS_AS((void)read_manifest(tmp.file("partial.json")), data_error);
}

TEST_CASE("the bound command reports the worked shape") {
  const CliResult json = run_cli_capture({"bound", "--n", "4", "--k", "4", "--c", "1", "--json"});
  CHECK(json.rc == 0);
  const nlohmann::json j = nlohmann::json::parse(json.out);
  CHECK(j.at("q_bound").get<long long>() == 112);
  CHECK(j.at("ue_bound").get<double>() == doctest::Approx(0.8));

  const CliResult text = run_cli_capture({"bound", "--n", "4", "--k", "4", "--c", "1"});
  CHECK(text.rc == 0);
  CHECK(text.out.find("q_bound 112") != std::string::npos);
}

TEST_CASE("usage problems exit with code 2, bad data with 3") {
  CHECK(run_cli_capture({"bound", "--n", "0", "--k", "4", "--c", "1"}).rc == 2);
  CHECK(run_cli_capture({"bound", "--n", "4", "--k", "4"}).rc == 2);  // missing --c
  CHECK(run_cli_capture({"nonsense"}).rc == 2);
  CHECK(run_cli_capture({}).rc == 2);
  CHECK(run_cli_capture({"bound", "--n", "4", "--k", "4", "--c", "1", "--bogus"}).rc == 2);

  const CliResult version = run_cli_capture({"--version"});
  CHECK(version.rc == 0);
  CHECK(version.out.find("crows") != std::string::npos);
  CHECK(run_cli_capture({"--help"}).rc == 0);

  TempDir tmp;
  CHECK(run_cli_capture({"analyze", "--design", tmp.file("no.csv"), "--response",
                         tmp.file("no2.csv"), "--sigma", "1"})
            .rc == 3);
}

TEST_CASE("certify confirms the identity-pattern optimum from a file") {
  TempDir tmp;
  write_design_csv(tmp.file("eye.csv"), ocow_design(4));
  const CliResult res =
      run_cli_capture({"certify", "--design", tmp.file("eye.csv"), "--c", "1", "--json"});
  CHECK(res.rc == 0);
  const nlohmann::json j = nlohmann::json::parse(res.out);
  CHECK(j.at("applicable").get<bool>());
  CHECK(j.at("q").get<long long>() == 112);
  CHECK(j.at("gap_q").get<long long>() == 0);
  CHECK(j.at("tight").get<bool>());
}

TEST_CASE("construction runs are reproducible from the command line") {
  TempDir tmp;
  const std::vector<std::string> base{"construct", "--n",   "8",  "--k",
                                      "6",         "--c",   "2",  "--starts",
                                      "5",         "--seed", "3"};
  auto with_out = [&](const std::string& out, const std::string& threads) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--out", out, "--threads", threads});
    return args;
  };

  std::vector<std::string> first = with_out(tmp.file("d1.csv"), "1");
  first.insert(first.end(), {"--log", tmp.file("log.csv"), "--pool-sheet", tmp.file("sheet.txt")});
  const CliResult r1 = run_cli_capture(first);
  CHECK(r1.rc == 0);
  CHECK(fs::exists(tmp.file("d1.csv")));
  CHECK(fs::exists(tmp.file("log.csv")));
  CHECK(fs::exists(tmp.file("sheet.txt")));
  CHECK(fs::exists(tmp.file("d1.csv") + ".manifest.json"));

  const Design d = read_design_csv(tmp.file("d1.csv"), 2);
  CHECK(d.n == 8);
  CHECK(d.k == 6);

  // Re-running with another thread count writes the same design bytes.
  CHECK(run_cli_capture(with_out(tmp.file("d2.csv"), "3")).rc == 0);
  CHECK(slurp(tmp.file("d1.csv")) == slurp(tmp.file("d2.csv")));

  // The recorded manifest replays cleanly in place.
  const CliResult replay =
      run_cli_capture({"replay", tmp.file("d1.csv") + ".manifest.json"});
  CHECK(replay.rc == 0);
  CHECK(replay.out.find("all outputs match") != std::string::npos);
}

TEST_CASE("the sweep command tabulates one row per capacity") {
  TempDir tmp;
  const CliResult res = run_cli_capture({"sweep", "--n", "8", "--k", "6", "--c-list", "2..4",
                                         "--starts", "3", "--seed", "1", "--out",
                                         tmp.file("sweep.csv")});
  CHECK(res.rc == 0);
  const std::string text = slurp(tmp.file("sweep.csv"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);  // header + 3 rows
  CHECK(fs::exists(tmp.file("sweep.csv") + ".manifest.json"));
}

TEST_CASE("analysis from files finds a planted factor and replays byte-identically") {
  TempDir tmp;
  ConstructConfig cc;
  cc.n = 12;
  cc.k = 8;
  cc.c = 3;
  cc.starts = 10;
  cc.seed = 77;
  const Design d = construct(cc).best.design;
  write_design_csv(tmp.file("d.csv"), d);

  std::vector<double> y(12);
  for (int i = 0; i < 12; ++i) y[i] = 3.0 * double(d.at(i, 2));
  write_response_csv(tmp.file("y.csv"), y);

  const CliResult res = run_cli_capture({"analyze", "--design", tmp.file("d.csv"), "--response",
                                         tmp.file("y.csv"), "--sigma", "1", "--json", "--out",
                                         tmp.file("res.json"), "--profile-out",
                                         tmp.file("prof.csv")});
  CHECK(res.rc == 0);
  const nlohmann::json j = nlohmann::json::parse(res.out);
  CHECK(j.at("hits").get<std::vector<int>>() == std::vector<int>{3});  // 1-based

  CHECK(fs::exists(tmp.file("res.json")));
  CHECK(fs::exists(tmp.file("prof.csv")));
  CHECK(nlohmann::json::parse(slurp(tmp.file("res.json"))) == j);
  CHECK(slurp(tmp.file("prof.csv")).rfind("lambda,support_size,bic\n", 0) == 0);

  const CliResult replay =
      run_cli_capture({"replay", tmp.file("res.json") + ".manifest.json"});
  CHECK(replay.rc == 0);

  // A response of the wrong length is a data problem.
  write_response_csv(tmp.file("short.csv"), std::vector<double>{1.0, 2.0});
  CHECK(run_cli_capture({"analyze", "--design", tmp.file("d.csv"), "--response",
                         tmp.file("short.csv"), "--sigma", "1"})
            .rc == 3);
}

TEST_CASE("pooling designs decode planted actives end to end") {
  TempDir tmp;
  const CliResult made = run_cli_capture({"std", "--k", "9", "--q", "3", "--a", "4", "--gamma",
                                          "1", "--out", tmp.file("std.csv"), "--pool-sheet",
                                          tmp.file("pools.txt")});
  CHECK(made.rc == 0);
  CHECK(made.out.find("wells 12") != std::string::npos);

  const Design inc = read_design_csv(tmp.file("std.csv"));
  REQUIRE(inc.n == 12);

  // Wells containing compound 5 read positive; everything else negative.
  WellLabels labels;
  labels.positive.assign(12, 0);
  for (int i = 0; i < 12; ++i)
    if (inc.at(i, 5) == 1) labels.positive[std::size_t(i)] = 1;
  write_labels_csv(tmp.file("labels.csv"), labels);

  const CliResult dec = run_cli_capture({"poolhits-decode", "--design", tmp.file("std.csv"),
                                         "--labels", tmp.file("labels.csv"), "--E", "0",
                                         "--json", "--out", tmp.file("calls.csv")});
  CHECK(dec.rc == 0);
  const nlohmann::json j = nlohmann::json::parse(dec.out);
  CHECK(j.at("hits").get<std::vector<int>>() == std::vector<int>{6});  // 1-based
  const std::string calls = slurp(tmp.file("calls.csv"));
  CHECK(calls.find("6,active,1") != std::string::npos);
  CHECK(calls.find("1,inert,0") != std::string::npos);

  // Infeasible pooling parameters are a usage error.
  CHECK(run_cli_capture({"std", "--k", "9", "--q", "4", "--a", "3", "--gamma", "1", "--out",
                         tmp.file("x.csv")})
            .rc == 2);
}

TEST_CASE("one-well commands threshold from files") {
  TempDir tmp;
  write_response_csv(tmp.file("y.csv"), std::vector<double>{2.0, 0.1, 1.0});
  const CliResult known = run_cli_capture(
      {"ocow", "--response", tmp.file("y.csv"), "--mu", "0", "--sigma", "1", "--json"});
  CHECK(known.rc == 0);
  CHECK(nlohmann::json::parse(known.out).at("hits").get<std::vector<int>>() ==
        std::vector<int>{1});

  write_response_csv(tmp.file("y6.csv"),
                     std::vector<double>{10.0, 0.1, -0.2, 0.15, -0.1, 0.05});
  const CliResult robust =
      run_cli_capture({"ocow", "--response", tmp.file("y6.csv"), "--lenth", "--json"});
  CHECK(robust.rc == 0);
  CHECK(nlohmann::json::parse(robust.out).at("hits").get<std::vector<int>>() ==
        std::vector<int>{1});
}

TEST_CASE("small studies run from the command line and are thread-invariant") {
  TempDir tmp;
  const std::vector<std::string> base{
      "simulate", "--preset", "desk",   "--bundles", "desk-24x31-c10", "--methods",
      "crows,ocow", "--D",    "4",      "--reps",    "4",              "--a",
      "1",          "--seed", "9",      "--construct-seed", "2",       "--starts",
      "2"};
  std::vector<std::string> one = base;
  one.insert(one.end(), {"--threads", "1", "--out", tmp.file("s1.csv")});
  std::vector<std::string> two = base;
  two.insert(two.end(), {"--threads", "2", "--out", tmp.file("s2.csv")});

  const CliResult r1 = run_cli_capture(one);
  CHECK(r1.rc == 0);
  const CliResult r2 = run_cli_capture(two);
  CHECK(r2.rc == 0);
  CHECK(slurp(tmp.file("s1.csv")) == slurp(tmp.file("s2.csv")));
  CHECK(fs::exists(tmp.file("s1.csv") + ".manifest.json"));

  const CliResult replay =
      run_cli_capture({"replay", tmp.file("s1.csv") + ".manifest.json"});
  CHECK(replay.rc == 0);

  // Unknown bundle names and methods are usage errors.
  CHECK(run_cli_capture({"simulate", "--preset", "desk", "--bundles", "nope", "--out",
                         tmp.file("x.csv")})
            .rc == 2);
  CHECK(run_cli_capture({"simulate", "--preset", "desk", "--methods", "magic", "--out",
                         tmp.file("x.csv")})
            .rc == 2);
}

TEST_CASE("replay detects tampered outputs and changed inputs") {
  TempDir tmp;
  const CliResult made =
      run_cli_capture({"construct", "--n", "6", "--k", "4", "--c", "2", "--starts", "2",
                       "--seed", "1", "--out", tmp.file("d.csv")});
  REQUIRE(made.rc == 0);
  const std::string manifest = tmp.file("d.csv") + ".manifest.json";

  // Tampering with the output is healed by the re-run, so replay matches;
  // tampering with the *command* in the manifest must be caught instead.
  RunManifest m = read_manifest(manifest);
  m.outputs[tmp.file("d.csv")] = std::string(16, '0');
  write_manifest(manifest, m);
  const CliResult replay = run_cli_capture({"replay", manifest});
  CHECK(replay.rc == 1);
  CHECK(replay.out.find("MISMATCH") != std::string::npos);

  // A changed input file is refused before anything is re-run.
  write_design_csv(tmp.file("base.csv"), ocow_design(6));
  Rng rng(11);
  std::vector<double> y(6);
  for (auto& v : y) v = rng.normal();
  write_response_csv(tmp.file("y.csv"), y);
  const CliResult an = run_cli_capture({"analyze", "--design", tmp.file("base.csv"),
                                        "--response", tmp.file("y.csv"), "--sigma", "1",
                                        "--out", tmp.file("res.json")});
  REQUIRE(an.rc == 0);
  write_response_csv(tmp.file("y.csv"), std::vector<double>{9.0, 0, 0, 0, 0, 0});
  CHECK(run_cli_capture({"replay", tmp.file("res.json") + ".manifest.json"}).rc == 3);
}
