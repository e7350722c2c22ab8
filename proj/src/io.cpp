#include "bendsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bendsim/config.hpp"
#include "bendsim/errors.hpp"

namespace bendsim {
namespace {

using nlohmann::json;

void append_num(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void append_vec(std::string& out, const Vec3<double>& v) {
  for (int a = 0; a < 3; ++a) {
    out += ',';
    append_num(out, v[a]);
  }
}

json num_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double num_or_nan(const json& j) {
  if (j.is_number()) return j.get<double>();
  return std::numeric_limits<double>::quiet_NaN();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string pad(const std::string& s, size_t width) {
  std::string out = s;
  while (out.size() < width) out += ' ';
  return out;
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[32];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp + " into place: " + ec.message());
  }
}

std::string trial_file_stem(const ScenarioSpec& scenario, Method method, int trial) {
  return std::string(scenario_kind_name(scenario.kind)) + "_" + method_name(method) +
         "_" + std::to_string(trial);
}

void write_trial_csv(const std::string& path, const TrialReport& report) {
  std::string out;
  out.reserve(report.steps.size() * 600 + 1024);
  out += "t";
  for (int i = 1; i <= 2; ++i) {
    const std::string v = std::to_string(i);
    for (const char* base : {"p", "pd", "e", "u", "fo", "fhat", "eps", "ftrue"})
      for (const char* axis : {"x", "y", "z"})
        out += "," + std::string(base) + v + "_" + axis;
  }
  out += ",V_p,V_W,w_err,rod_energy\n";
  for (const StepRecord& s : report.steps) {
    append_num(out, s.t);
    for (int i = 0; i < 2; ++i) {
      append_vec(out, s.p[i]);
      append_vec(out, s.p_d[i]);
      append_vec(out, s.e[i]);
      append_vec(out, s.u[i]);
      append_vec(out, s.f_o[i]);
      append_vec(out, s.f_hat[i]);
      append_vec(out, s.eps[i]);
      append_vec(out, s.f_true_sample[i]);
    }
    out += ',';
    append_num(out, s.V_p);
    out += ',';
    append_num(out, s.V_W);
    out += ',';
    append_num(out, s.w_err);
    out += ',';
    append_num(out, s.rod_energy);
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_snapshots_json(const std::string& path,
                          const std::vector<EstimatorSnapshot>& snapshots) {
  json root = json::array();
  for (const EstimatorSnapshot& s : snapshots) {
    json entry;
    entry["t"] = s.t;
    entry["W_hat"] = json::array({matrix_to_json(s.W_hat[0]), matrix_to_json(s.W_hat[1])});
    entry["P"] = json::array({matrix_to_json(s.P[0]), matrix_to_json(s.P[1])});
    root.push_back(std::move(entry));
  }
  write_text_atomic(path, root.dump(1) + "\n");
}

void write_manifest_json(const std::string& path, const RunManifest& manifest) {
  json root;
  root["config_path"] = manifest.config_path;
  root["resolved_config"] = manifest.resolved_config;
  root["output_dir"] = manifest.output_dir;
  root["tool_version"] = manifest.tool_version;
  root["seed"] = manifest.seed;
  write_text_atomic(path, root.dump(2) + "\n");
}

RunSummary summarize(const SimConfig& cfg, const BatchReport& batch) {
  RunSummary summary;
  summary.scenario = scenario_kind_name(cfg.scenario.kind);
  summary.method = method_name(batch.method);
  summary.seed = cfg.seed;
  for (const TrialReport& r : batch.trials) {
    TrialStats s;
    s.trial = r.trial;
    s.mean_error = r.mean_error;
    s.std_error = r.std_error;
    s.hold_mean = r.hold_mean;
    s.hold_std = r.hold_std;
    s.max_command_jump = r.max_command_jump;
    s.saturated = r.saturated;
    s.diverged = r.diverged;
    s.task_success = r.task_success;
    summary.trials.push_back(s);
  }
  return summary;
}

void write_summary_json(const std::string& path, const RunSummary& summary) {
  json root;
  root["schema_version"] = summary.schema_version;
  root["scenario"] = summary.scenario;
  root["method"] = summary.method;
  root["seed"] = summary.seed;
  root["tool_version"] = summary.tool_version;
  json trials = json::array();
  for (const TrialStats& s : summary.trials) {
    json t;
    t["trial"] = s.trial;
    t["mean_error"] = num_or_null(s.mean_error);
    t["std_error"] = num_or_null(s.std_error);
    t["hold_mean"] = num_or_null(s.hold_mean);
    t["hold_std"] = num_or_null(s.hold_std);
    t["max_command_jump"] = num_or_null(s.max_command_jump);
    t["saturated"] = s.saturated;
    t["diverged"] = s.diverged;
    t["task_success"] = s.task_success;
    trials.push_back(std::move(t));
  }
  root["trials"] = std::move(trials);
  write_text_atomic(path, root.dump(2) + "\n");
}

RunSummary load_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summary: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw SchemaMismatch(path + ": not a summary file (" + e.what() + ")");
  }
  try {
    const int version = root.at("schema_version").get<int>();
    if (version != kSchemaVersion)
      throw SchemaMismatch(path + ": schema_version " + std::to_string(version) +
                           ", this build reads " + std::to_string(kSchemaVersion));
    RunSummary summary;
    summary.schema_version = version;
    summary.scenario = root.at("scenario").get<std::string>();
    summary.method = root.at("method").get<std::string>();
    summary.seed = root.at("seed").get<unsigned>();
    summary.tool_version = root.at("tool_version").get<std::string>();
    for (const json& t : root.at("trials")) {
      TrialStats s;
      s.trial = t.at("trial").get<int>();
      s.mean_error = num_or_nan(t.at("mean_error"));
      s.std_error = num_or_nan(t.at("std_error"));
      s.hold_mean = num_or_nan(t.at("hold_mean"));
      s.hold_std = num_or_nan(t.at("hold_std"));
      s.max_command_jump = num_or_nan(t.at("max_command_jump"));
      s.saturated = t.at("saturated").get<bool>();
      s.diverged = t.at("diverged").get<bool>();
      s.task_success = t.at("task_success").get<bool>();
      summary.trials.push_back(s);
    }
    return summary;
  } catch (const json::exception& e) {
    throw SchemaMismatch(path + ": malformed summary (" + e.what() + ")");
  }
}

std::string compare_table(const std::vector<RunSummary>& runs) {
  std::string out;
  out += pad("scenario", 18) + pad("method", 15) + pad("trials", 8) +
         pad("mean", 10) + pad("first", 10) + pad("last", 10) +
         pad("hold_std", 10) + "success\n";
  for (const RunSummary& run : runs) {
    double total = 0.0;
    int success = 0;
    for (const TrialStats& s : run.trials) {
      total += s.mean_error;
      success += s.task_success ? 1 : 0;
    }
    const size_t n = run.trials.size();
    const double mean = n ? total / static_cast<double>(n) : 0.0;
    const double first = n ? run.trials.front().mean_error : 0.0;
    const double last = n ? run.trials.back().mean_error : 0.0;
    const double hold = n ? run.trials.back().hold_std
                          : std::numeric_limits<double>::quiet_NaN();
    out += pad(run.scenario, 18) + pad(run.method, 15) +
           pad(std::to_string(n), 8) + pad(fmt(mean), 10) + pad(fmt(first), 10) +
           pad(fmt(last), 10) +
           pad(std::isfinite(hold) ? fmt(hold) : std::string("-"), 10) +
           std::to_string(success) + "/" + std::to_string(n) + "\n";
  }
  return out;
}

std::string compare_long_csv(const std::vector<RunSummary>& runs) {
  std::string out =
      "scenario,method,seed,trial,mean_error,std_error,hold_mean,hold_std,"
      "max_command_jump,saturated,diverged,task_success\n";
  for (const RunSummary& run : runs) {
    for (const TrialStats& s : run.trials) {
      out += run.scenario + "," + run.method + "," + std::to_string(run.seed) + "," +
             std::to_string(s.trial);
      for (double v : {s.mean_error, s.std_error, s.hold_mean, s.hold_std,
                       s.max_command_jump}) {
        out += ',';
        append_num(out, v);
      }
      out += std::string(",") + (s.saturated ? "1" : "0") + "," +
             (s.diverged ? "1" : "0") + "," + (s.task_success ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace bendsim
