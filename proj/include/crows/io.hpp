#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crows/baselines.hpp"
#include "crows/construct.hpp"
#include "crows/design.hpp"
#include "crows/sim.hpp"

namespace crows {

// CSV and manifest plumbing for the command-line tools. Numeric output uses
// shortest round-trip formatting so repeated runs produce bit-identical
// files; readers validate shape and domain and raise data_error naming the
// offending line. Wells and compounds are 1-based in every file format
// (library indices are 0-based).

[[nodiscard]] std::string format_double(double v);

/// Default compound names f1..fk, used when no compound map is supplied.
[[nodiscard]] std::vector<std::string> default_labels(int k);

void write_design_csv(const std::filesystem::path& path, const Design& d);

/// Read a +-1 design (header row names the columns, one CSV row per well).
/// The well capacity is `capacity` when given, otherwise k; rows that exceed
/// it make the file invalid.
[[nodiscard]] Design read_design_csv(const std::filesystem::path& path,
                                     std::optional<int> capacity = std::nullopt);

void write_response_csv(const std::filesystem::path& path, std::span<const double> y);

/// well,response rows; the wells must form a permutation of 1..n. Values
/// come back in well order.
[[nodiscard]] std::vector<double> read_response_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path, const WellLabels& labels);
[[nodiscard]] WellLabels read_labels_csv(const std::filesystem::path& path);

/// index,label rows mapping every 1-based compound index up to k to a name.
[[nodiscard]] std::vector<std::string> read_compound_map(const std::filesystem::path& path,
                                                         int k);

/// Picking sheet: one line per well listing the compounds it contains.
void write_pool_sheet(const std::filesystem::path& path, const Design& d,
                      const std::vector<std::string>& labels);

void write_start_log_csv(const std::filesystem::path& path, const std::vector<StartRecord>& log);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_study_csv(const std::filesystem::path& path, const std::vector<StudyRow>& rows);

/// FNV-1a 64-bit digest of the file's bytes, as 16 lowercase hex digits.
[[nodiscard]] std::string file_digest(const std::filesystem::path& path);

/// Execution record written next to every file a command produces
/// (<output>.manifest.json). The manifest itself is not listed among the
/// outputs, and its wall-clock field is the only part of a run that is not
/// reproduced bit-exactly by a replay.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;  // arguments after the program name
  std::uint64_t seed = 0;
  std::string version;
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest
  double wall_seconds = 0.0;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
[[nodiscard]] RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace crows
