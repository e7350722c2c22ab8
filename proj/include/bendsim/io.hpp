#pragma once

#include <string>
#include <vector>

#include "bendsim/sim.hpp"

namespace bendsim {

inline constexpr const char* kToolVersion = "1.0.0";
// bumped together for the trial CSV layout and the summary JSON layout;
// docs/csv_schema.md describes the current revision
inline constexpr int kSchemaVersion = 1;

// everything needed to reproduce a run from the output directory alone
struct RunManifest {
  std::string config_path;      // as given on the command line, may be "-"
  std::string resolved_config;  // dump_config of the run, defaults included
  std::string output_dir;
  std::string tool_version = kToolVersion;
  unsigned seed = 0;
};

struct TrialStats {
  int trial = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double hold_mean = 0.0;  // NaN outside hold scenarios
  double hold_std = 0.0;
  double max_command_jump = 0.0;
  bool saturated = false;
  bool diverged = false;
  bool task_success = true;
};

struct RunSummary {
  int schema_version = kSchemaVersion;
  std::string scenario;
  std::string method;
  unsigned seed = 0;
  std::string tool_version = kToolVersion;
  std::vector<TrialStats> trials;
};

// write-to-temp then rename, so readers never observe a partial file
void write_text_atomic(const std::string& path, const std::string& content);

// "{scenario}_{method}_{trial}" for per-trial artifact names
std::string trial_file_stem(const ScenarioSpec& scenario, Method method, int trial);

void write_trial_csv(const std::string& path, const TrialReport& report);

void write_snapshots_json(const std::string& path,
                          const std::vector<EstimatorSnapshot>& snapshots);

void write_manifest_json(const std::string& path, const RunManifest& manifest);

RunSummary summarize(const SimConfig& cfg, const BatchReport& batch);

void write_summary_json(const std::string& path, const RunSummary& summary);

// throws SchemaMismatch when the file's schema_version differs from ours
RunSummary load_summary(const std::string& path);

// side-by-side per-run digest, one row per summary
std::string compare_table(const std::vector<RunSummary>& runs);

// one row per (run, trial), for external plotting
std::string compare_long_csv(const std::vector<RunSummary>& runs);

}  // namespace bendsim
