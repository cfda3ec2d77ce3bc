#include "crows/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "crows/common.hpp"

namespace crows {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_file(const fs::path& path, const std::string& what) {
  throw data_error(path.string() + ": " + what);
}

[[noreturn]] void bad_line(const fs::path& path, std::size_t line_no, const std::string& what) {
  bad_file(path, "line " + std::to_string(line_no) + ": " + what);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(path.string() + ": cannot open for writing");
  return out;
}

/// All lines of a text file, tolerant of a missing final newline and of
/// CRLF endings.
std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file(path, "cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

long long parse_int(const fs::path& path, std::size_t line_no, const std::string& tok) {
  long long v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    bad_line(path, line_no, "expected an integer, got '" + tok + "'");
  return v;
}

double parse_double(const fs::path& path, std::size_t line_no, const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    bad_line(path, line_no, "expected a number, got '" + tok + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw error("number formatting failed");
  return std::string(buf, ptr);
}

std::vector<std::string> default_labels(int k) {
  std::vector<std::string> out;
  out.reserve(std::size_t(std::max(k, 0)));
  for (int j = 1; j <= k; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

void write_design_csv(const fs::path& path, const Design& d) {
  require_valid(d);
  std::ofstream out = open_out(path);
  const std::vector<std::string> labels = default_labels(d.k);
  for (int j = 0; j < d.k; ++j) out << (j ? "," : "") << labels[std::size_t(j)];
  out << '\n';
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.k; ++j) out << (j ? "," : "") << int(d.at(i, j));
    out << '\n';
  }
  if (!out) bad_file(path, "write failed");
}

Design read_design_csv(const fs::path& path, std::optional<int> capacity) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) bad_file(path, "empty file");
  const std::vector<std::string> header = split_csv(lines[0]);
  const int k = int(header.size());
  if (k < 1 || header[0].empty()) bad_line(path, 1, "missing column header");
  const int n = int(lines.size()) - 1;
  if (n < 1) bad_file(path, "no design rows");
  const int c = capacity.value_or(k);
  if (c < 1 || c > k) throw param_error("capacity must lie in [1, k]");
  Design d = make_design(n, k, c);
  for (int i = 0; i < n; ++i) {
    const std::size_t line_no = std::size_t(i) + 2;
    const std::vector<std::string> toks = split_csv(lines[std::size_t(i) + 1]);
    if (int(toks.size()) != k)
      bad_line(path, line_no,
               "expected " + std::to_string(k) + " entries, got " + std::to_string(toks.size()));
    for (int j = 0; j < k; ++j) {
      const long long v = parse_int(path, line_no, toks[std::size_t(j)]);
      if (v != 1 && v != -1) bad_line(path, line_no, "design entries must be -1 or 1");
      d.set(i, j, std::int8_t(v));
    }
  }
  require_valid(d);
  return d;
}

void write_response_csv(const fs::path& path, std::span<const double> y) {
  std::ofstream out = open_out(path);
  out << "well,response\n";
  for (std::size_t i = 0; i < y.size(); ++i)
    out << (i + 1) << ',' << format_double(y[i]) << '\n';
  if (!out) bad_file(path, "write failed");
}

std::vector<double> read_response_csv(const fs::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) bad_file(path, "empty file");
  if (lines[0] != "well,response") bad_line(path, 1, "expected header 'well,response'");
  const std::size_t n = lines.size() - 1;
  if (n == 0) bad_file(path, "no response rows");
  std::vector<double> y(n, 0.0);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    const std::vector<std::string> toks = split_csv(lines[i + 1]);
    if (toks.size() != 2) bad_line(path, line_no, "expected 'well,response'");
    const long long well = parse_int(path, line_no, toks[0]);
    if (well < 1 || std::size_t(well) > n) bad_line(path, line_no, "well index out of range");
    if (seen[std::size_t(well - 1)]) bad_line(path, line_no, "duplicate well index");
    seen[std::size_t(well - 1)] = 1;
    y[std::size_t(well - 1)] = parse_double(path, line_no, toks[1]);
  }
  return y;
}

void write_labels_csv(const fs::path& path, const WellLabels& labels) {
  std::ofstream out = open_out(path);
  out << "well,positive\n";
  for (std::size_t i = 0; i < labels.positive.size(); ++i)
    out << (i + 1) << ',' << int(labels.positive[i]) << '\n';
  if (!out) bad_file(path, "write failed");
}

WellLabels read_labels_csv(const fs::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) bad_file(path, "empty file");
  if (lines[0] != "well,positive") bad_line(path, 1, "expected header 'well,positive'");
  const std::size_t n = lines.size() - 1;
  if (n == 0) bad_file(path, "no label rows");
  WellLabels labels;
  labels.positive.assign(n, 0);
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    const std::vector<std::string> toks = split_csv(lines[i + 1]);
    if (toks.size() != 2) bad_line(path, line_no, "expected 'well,positive'");
    const long long well = parse_int(path, line_no, toks[0]);
    if (well < 1 || std::size_t(well) > n) bad_line(path, line_no, "well index out of range");
    if (seen[std::size_t(well - 1)]) bad_line(path, line_no, "duplicate well index");
    seen[std::size_t(well - 1)] = 1;
    const long long flag = parse_int(path, line_no, toks[1]);
    if (flag != 0 && flag != 1) bad_line(path, line_no, "labels must be 0 or 1");
    labels.positive[std::size_t(well - 1)] = std::uint8_t(flag);
  }
  return labels;
}

std::vector<std::string> read_compound_map(const fs::path& path, int k) {
  if (k < 1) throw param_error("compound map needs k >= 1");
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) bad_file(path, "empty file");
  if (lines[0] != "index,label") bad_line(path, 1, "expected header 'index,label'");
  if (int(lines.size()) - 1 != k)
    bad_file(path, "expected " + std::to_string(k) + " rows, got " +
                       std::to_string(lines.size() - 1));
  std::vector<std::string> labels(static_cast<std::size_t>(k));
  std::vector<char> seen(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < k; ++i) {
    const std::size_t line_no = std::size_t(i) + 2;
    const std::string& line = lines[std::size_t(i) + 1];
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) bad_line(path, line_no, "expected 'index,label'");
    const long long idx = parse_int(path, line_no, line.substr(0, comma));
    if (idx < 1 || idx > k) bad_line(path, line_no, "compound index out of range");
    if (seen[std::size_t(idx - 1)]) bad_line(path, line_no, "duplicate compound index");
    seen[std::size_t(idx - 1)] = 1;
    const std::string label = line.substr(comma + 1);
    if (label.empty()) bad_line(path, line_no, "empty label");
    labels[std::size_t(idx - 1)] = label;
  }
  return labels;
}

void write_pool_sheet(const fs::path& path, const Design& d,
                      const std::vector<std::string>& labels) {
  require_valid(d);
  if (int(labels.size()) != d.k)
    throw param_error("pool sheet needs one label per compound");
  std::ofstream out = open_out(path);
  for (int i = 0; i < d.n; ++i) {
    out << "well " << (i + 1) << ':';
    for (int j = 0; j < d.k; ++j)
      if (d.at(i, j) == 1) out << ' ' << labels[std::size_t(j)];
    out << '\n';
  }
  if (!out) bad_file(path, "write failed");
}

void write_start_log_csv(const fs::path& path, const std::vector<StartRecord>& log) {
  std::ofstream out = open_out(path);
  out << "start,seed,q,ue,passes,converged\n";
  for (const StartRecord& r : log)
    out << r.start << ',' << r.seed << ',' << r.q << ',' << format_double(r.ue) << ','
        << r.passes << ',' << int(r.converged) << '\n';
  if (!out) bad_file(path, "write failed");
}

void write_sweep_csv(const fs::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out = open_out(path);
  out << "c,q,ue,ue_doubled,slack_min,slack_max,slack_mean,q_bound,ue_bound\n";
  for (const SweepRow& r : rows) {
    out << r.c << ',' << r.q << ',' << format_double(r.ue) << ','
        << format_double(r.ue_doubled) << ',' << r.slack_min << ',' << r.slack_max << ','
        << format_double(r.slack_mean) << ',';
    if (r.bound_applicable) out << r.q_bound << ',' << format_double(r.ue_bound);
    else out << ',';
    out << '\n';
  }
  if (!out) bad_file(path, "write failed");
}

void write_study_csv(const fs::path& path, const std::vector<StudyRow>& rows) {
  std::ofstream out = open_out(path);
  out << "design,method,n,k,c,D,a,replicates,"
         "tpr,tpr_se,tpr_count,fpr,fpr_se,fpr_count\n";
  for (const StudyRow& r : rows) {
    out << r.design_name << ',' << method_name(r.method) << ',' << r.n << ',' << r.k << ','
        << r.c << ',' << format_double(r.effect) << ',' << r.actives << ',' << r.replicates
        << ',';
    if (r.tpr_count > 0)
      out << format_double(r.tpr_mean) << ',' << format_double(r.tpr_se);
    else out << ',';
    out << ',' << r.tpr_count << ',';
    if (r.fpr_count > 0)
      out << format_double(r.fpr_mean) << ',' << format_double(r.fpr_se);
    else out << ',';
    out << ',' << r.fpr_count << '\n';
  }
  if (!out) bad_file(path, "write failed");
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file(path, "cannot open");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= std::uint64_t(std::uint8_t(buf[i]));
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex, 16);
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["argv"] = m.argv;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["wall_seconds"] = m.wall_seconds;
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) bad_file(path, "write failed");
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file(path, "cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad_file(path, std::string("invalid JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    bad_file(path, std::string("missing or mistyped manifest field: ") + e.what());
  }
  return m;
}

}  // namespace crows
