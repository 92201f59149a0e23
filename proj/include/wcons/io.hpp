#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wcons/engine.hpp"

namespace wcons::io {

inline constexpr int kSchemaVersion = 1;
std::string_view version() noexcept;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

nlohmann::json measure_to_json(const Measure& m);
/// Throws ParseError: SchemaError for shape problems, ValidationError (with
/// the measure's own error code as cause) for invariant violations.
Measure measure_from_json(const nlohmann::json& j, const std::string& path = "measure");

/// Command-line measure argument: a JSON file path, inline JSON, `N(mean,var)`
/// or `delta(x)`.
Measure parse_measure_spec(std::string_view spec);

/// A fully validated scenario document.
struct Scenario {
  std::string name;
  std::vector<Measure> agents;
  TopologySchedule schedule;
  ConsensusConfig config;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  bool plots = true;
  std::string scenario_hash;  // hex FNV-1a 64 of the normalized document
};

/// `base_dir` resolves relative file references inside the document.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& file, std::string_view content);

std::string fnv1a_hex(std::string_view bytes);

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records);
nlohmann::json final_measures_json(const ConsensusState& state);
std::vector<Measure> final_measures_from_json(const nlohmann::json& j);

struct RunArtifacts {
  std::filesystem::path diagnostics_csv;
  std::filesystem::path final_measures;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> plots;
  std::string scenario_hash;
  Termination terminated_by = Termination::MaxSteps;
  std::size_t steps = 0;
  RunResult result;
};

/// Output directory after applying the WCONS_OUT_DIR override.
std::filesystem::path resolve_output_dir(const Scenario& s);

RunArtifacts run_scenario(const Scenario& s);

}  // namespace wcons::io
