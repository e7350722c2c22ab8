#include "bendsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "bendsim/errors.hpp"

namespace bendsim {
namespace {

// map reader that tracks consumed keys so typos surface as errors instead of
// silently falling back to defaults
class Reader {
 public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsMap())
      throw ConfigError(path_ + ": expected a mapping");
  }

  bool present(const std::string& key) const { return node_ && node_[key]; }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!present(key)) return fallback;
    try {
      return node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(field(key) + ": cannot convert value");
    }
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }

  Reader sub(const std::string& key) {
    seen_.insert(key);
    return Reader(node_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined),
                  field(key));
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown key: " + field(key));
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

Eigen::VectorXd read_vector(const YAML::Node& node, const std::string& path) {
  if (!node || !node.IsSequence())
    throw ConfigError(path + ": expected a number sequence");
  Eigen::VectorXd out(node.size());
  for (size_t i = 0; i < node.size(); ++i) {
    try {
      out[i] = node[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path + "[" + std::to_string(i) + "]: not a number");
    }
  }
  return out;
}

Vec3<double> read_vec3(const YAML::Node& node, const std::string& path,
                       const Vec3<double>& fallback) {
  if (!node) return fallback;
  const Eigen::VectorXd v = read_vector(node, path);
  if (v.size() != 3) throw ConfigError(path + ": expected 3 numbers");
  return v.head<3>();
}

void read_exp1(Reader r, Exp1Params& p) {
  p.speed_x = r.get("speed_x", p.speed_x);
  p.z0 = r.get("z0", p.z0);
  p.dist_mean = r.get("dist_mean", p.dist_mean);
  p.dist_amp = r.get("dist_amp", p.dist_amp);
  p.dist_period = r.get("dist_period", p.dist_period);
  p.wobble_amp = r.get("wobble_amp", p.wobble_amp);
  p.wobble_period_1 = r.get("wobble_period_1", p.wobble_period_1);
  p.wobble_period_2 = r.get("wobble_period_2", p.wobble_period_2);
  r.finish();
}

void read_exp2(Reader r, Exp2Params& p) {
  p.x0 = r.get("x0", p.x0);
  p.speed_x = r.get("speed_x", p.speed_x);
  p.z_start = r.get("z_start", p.z_start);
  p.z_peak = r.get("z_peak", p.z_peak);
  p.z_pass = r.get("z_pass", p.z_pass);
  p.dist_pass = r.get("dist_pass", p.dist_pass);
  p.dist_recover = r.get("dist_recover", p.dist_recover);
  p.hold_begin = r.get("hold_begin", p.hold_begin);
  p.hold_end = r.get("hold_end", p.hold_end);
  p.window_x = r.get("window_x", p.window_x);
  p.window_half_width = r.get("window_half_width", p.window_half_width);
  p.window_z_min = r.get("window_z_min", p.window_z_min);
  p.window_z_max = r.get("window_z_max", p.window_z_max);
  p.hold_measure_begin = r.get("hold_measure_begin", p.hold_measure_begin);
  p.hold_measure_end = r.get("hold_measure_end", p.hold_measure_end);
  r.finish();
}

void read_exp3(Reader r, Exp3Params& p) {
  p.phase1_end = r.get("phase1_end", p.phase1_end);
  p.z0 = r.get("z0", p.z0);
  p.dist_min = r.get("dist_min", p.dist_min);
  p.dist_max = r.get("dist_max", p.dist_max);
  p.dist_period = r.get("dist_period", p.dist_period);
  p.speed_x = r.get("speed_x", p.speed_x);
  p.z_pass = r.get("z_pass", p.z_pass);
  p.dist_pass = r.get("dist_pass", p.dist_pass);
  p.window1_x = r.get("window1_x", p.window1_x);
  p.window2_x = r.get("window2_x", p.window2_x);
  p.window_half_width = r.get("window_half_width", p.window_half_width);
  p.window_z_min = r.get("window_z_min", p.window_z_min);
  p.window_z_max = r.get("window_z_max", p.window_z_max);
  p.dist_final = r.get("dist_final", p.dist_final);
  p.z_final = r.get("z_final", p.z_final);
  r.finish();
}

void read_custom(Reader r, CustomParams& p) {
  p.center = read_vec3(r.raw("center"), r.field("center"), p.center);
  p.distance = r.get("distance", p.distance);
  p.yaw = r.get("yaw", p.yaw);
  r.finish();
}

void read_scenario(Reader r, ScenarioSpec& s, double duration) {
  const std::string kind = r.get<std::string>("kind", scenario_kind_name(s.kind));
  const auto parsed = parse_scenario_kind(kind);
  if (!parsed)
    throw ConfigError(r.field("kind") + ": unknown scenario '" + kind + "'");
  s.kind = *parsed;
  s.duration = duration;
  read_exp1(r.sub("exp1"), s.exp1);
  read_exp2(r.sub("exp2"), s.exp2);
  read_exp3(r.sub("exp3"), s.exp3);
  read_custom(r.sub("custom"), s.custom);
  const YAML::Node exc = r.raw("excitation");
  if (exc) {
    if (!exc.IsSequence()) throw ConfigError(r.field("excitation") + ": expected a list");
    for (size_t i = 0; i < exc.size(); ++i) {
      Reader cr(exc[i], r.field("excitation") + "[" + std::to_string(i) + "]");
      ExcitationComponent c;
      c.endpoint = cr.get("endpoint", c.endpoint);
      c.axis = cr.get("axis", c.axis);
      c.amplitude = cr.get("amplitude", c.amplitude);
      c.frequency = cr.get("frequency", c.frequency);
      c.phase = cr.get("phase", c.phase);
      cr.finish();
      s.excitation.push_back(c);
    }
  }
  r.finish();
}

void read_rod(Reader r, RodSpec& rod) {
  rod.L0 = r.get("L0", rod.L0);
  rod.r0 = r.get("r0", rod.r0);
  rod.N = r.get("N", rod.N);
  if (r.present("k_b")) rod.k_b = read_vector(r.raw("k_b"), r.field("k_b"));
  else r.raw("k_b");
  if (r.present("m_s")) rod.m_s = read_vector(r.raw("m_s"), r.field("m_s"));
  else r.raw("m_s");
  rod.damping = r.get("damping", rod.damping);
  r.finish();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::VaryingDistance: return "varying-distance";
    case ScenarioKind::WindowPass: return "window-pass";
    case ScenarioKind::DualWindow: return "dual-window";
    case ScenarioKind::Custom: return "custom";
    case ScenarioKind::Validation: return "validation";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& name) {
  for (ScenarioKind k : {ScenarioKind::VaryingDistance, ScenarioKind::WindowPass,
                         ScenarioKind::DualWindow, ScenarioKind::Custom,
                         ScenarioKind::Validation})
    if (name == scenario_kind_name(k)) return k;
  return std::nullopt;
}

SimConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  SimConfig cfg;
  Reader r(root, "");
  cfg.duration = r.get("duration", cfg.duration);
  cfg.trials = r.get("trials", cfg.trials);
  cfg.seed = r.get("seed", cfg.seed);
  cfg.dt_physics = r.get("dt_physics", cfg.dt_physics);
  cfg.dt_control = r.get("dt_control", cfg.dt_control);
  cfg.sigma_a = r.get("sigma_a", cfg.sigma_a);
  cfg.mass = r.get("mass", cfg.mass);
  const std::string method = r.get<std::string>("method", method_name(cfg.method));
  const auto parsed = parse_method(method);
  if (!parsed) throw ConfigError("method: unknown method '" + method + "'");
  cfg.method = *parsed;

  Reader g = r.sub("gains");
  cfg.kp = g.get("kp", cfg.kp);
  cfg.kd = g.get("kd", cfg.kd);
  cfg.ki_low = g.get("ki_low", cfg.ki_low);
  cfg.ki_high = g.get("ki_high", cfg.ki_high);
  cfg.i_max = g.get("i_max", cfg.i_max);
  cfg.u_max = g.get("u_max", cfg.u_max);
  cfg.command_jump_limit = g.get("command_jump_limit", cfg.command_jump_limit);
  g.finish();

  Reader e = r.sub("estimator");
  cfg.feature_order = e.get("order", cfg.feature_order);
  cfg.p0 = e.get("p0", cfg.p0);
  cfg.lambda = e.get("lambda", cfg.lambda);
  cfg.observer_delay = e.get("observer_delay", cfg.observer_delay);
  cfg.snapshot_every = e.get("snapshot_every", cfg.snapshot_every);
  e.finish();

  const std::string truth = r.get<std::string>(
      "truth", cfg.truth == TruthKind::Elastica ? "elastica" : "synthetic");
  if (truth == "elastica") cfg.truth = TruthKind::Elastica;
  else if (truth == "synthetic") cfg.truth = TruthKind::SyntheticLinear;
  else throw ConfigError("truth: expected 'elastica' or 'synthetic', got '" + truth + "'");
  cfg.w_true_scale = r.get("w_true_scale", cfg.w_true_scale);
  cfg.thrust_filter = r.get("thrust_filter", cfg.thrust_filter);
  cfg.thrust_tau = r.get("thrust_tau", cfg.thrust_tau);

  read_rod(r.sub("rod"), cfg.rod);
  read_scenario(r.sub("scenario"), cfg.scenario, cfg.duration);
  r.finish();

  validate_config(cfg);
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const SimConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "duration" << YAML::Value << cfg.duration;
  out << YAML::Key << "trials" << YAML::Value << cfg.trials;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "method" << YAML::Value << method_name(cfg.method);
  out << YAML::Key << "dt_physics" << YAML::Value << cfg.dt_physics;
  out << YAML::Key << "dt_control" << YAML::Value << cfg.dt_control;
  out << YAML::Key << "sigma_a" << YAML::Value << cfg.sigma_a;
  out << YAML::Key << "mass" << YAML::Value << cfg.mass;
  out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kp" << YAML::Value << cfg.kp;
  out << YAML::Key << "kd" << YAML::Value << cfg.kd;
  out << YAML::Key << "ki_low" << YAML::Value << cfg.ki_low;
  out << YAML::Key << "ki_high" << YAML::Value << cfg.ki_high;
  out << YAML::Key << "i_max" << YAML::Value << cfg.i_max;
  out << YAML::Key << "u_max" << YAML::Value << cfg.u_max;
  out << YAML::Key << "command_jump_limit" << YAML::Value << cfg.command_jump_limit;
  out << YAML::EndMap;
  out << YAML::Key << "estimator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "order" << YAML::Value << cfg.feature_order;
  out << YAML::Key << "p0" << YAML::Value << cfg.p0;
  out << YAML::Key << "lambda" << YAML::Value << cfg.lambda;
  out << YAML::Key << "observer_delay" << YAML::Value << cfg.observer_delay;
  out << YAML::Key << "snapshot_every" << YAML::Value << cfg.snapshot_every;
  out << YAML::EndMap;
  out << YAML::Key << "truth" << YAML::Value
      << (cfg.truth == TruthKind::Elastica ? "elastica" : "synthetic");
  out << YAML::Key << "w_true_scale" << YAML::Value << cfg.w_true_scale;
  out << YAML::Key << "thrust_filter" << YAML::Value << cfg.thrust_filter;
  out << YAML::Key << "thrust_tau" << YAML::Value << cfg.thrust_tau;
  out << YAML::Key << "rod" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "L0" << YAML::Value << cfg.rod.L0;
  out << YAML::Key << "r0" << YAML::Value << cfg.rod.r0;
  out << YAML::Key << "N" << YAML::Value << cfg.rod.N;
  std::vector<double> kb(cfg.rod.k_b.data(), cfg.rod.k_b.data() + cfg.rod.k_b.size());
  std::vector<double> ms(cfg.rod.m_s.data(), cfg.rod.m_s.data() + cfg.rod.m_s.size());
  out << YAML::Key << "k_b" << YAML::Value << YAML::Flow << kb;
  out << YAML::Key << "m_s" << YAML::Value << YAML::Flow << ms;
  out << YAML::Key << "damping" << YAML::Value << cfg.rod.damping;
  out << YAML::EndMap;
  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << scenario_kind_name(cfg.scenario.kind);
  const Exp1Params& p1 = cfg.scenario.exp1;
  out << YAML::Key << "exp1" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "speed_x" << YAML::Value << p1.speed_x;
  out << YAML::Key << "z0" << YAML::Value << p1.z0;
  out << YAML::Key << "dist_mean" << YAML::Value << p1.dist_mean;
  out << YAML::Key << "dist_amp" << YAML::Value << p1.dist_amp;
  out << YAML::Key << "dist_period" << YAML::Value << p1.dist_period;
  out << YAML::Key << "wobble_amp" << YAML::Value << p1.wobble_amp;
  out << YAML::Key << "wobble_period_1" << YAML::Value << p1.wobble_period_1;
  out << YAML::Key << "wobble_period_2" << YAML::Value << p1.wobble_period_2;
  out << YAML::EndMap;
  const Exp2Params& p2 = cfg.scenario.exp2;
  out << YAML::Key << "exp2" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "x0" << YAML::Value << p2.x0;
  out << YAML::Key << "speed_x" << YAML::Value << p2.speed_x;
  out << YAML::Key << "z_start" << YAML::Value << p2.z_start;
  out << YAML::Key << "z_peak" << YAML::Value << p2.z_peak;
  out << YAML::Key << "z_pass" << YAML::Value << p2.z_pass;
  out << YAML::Key << "dist_pass" << YAML::Value << p2.dist_pass;
  out << YAML::Key << "dist_recover" << YAML::Value << p2.dist_recover;
  out << YAML::Key << "hold_begin" << YAML::Value << p2.hold_begin;
  out << YAML::Key << "hold_end" << YAML::Value << p2.hold_end;
  out << YAML::Key << "window_x" << YAML::Value << p2.window_x;
  out << YAML::Key << "window_half_width" << YAML::Value << p2.window_half_width;
  out << YAML::Key << "window_z_min" << YAML::Value << p2.window_z_min;
  out << YAML::Key << "window_z_max" << YAML::Value << p2.window_z_max;
  out << YAML::Key << "hold_measure_begin" << YAML::Value << p2.hold_measure_begin;
  out << YAML::Key << "hold_measure_end" << YAML::Value << p2.hold_measure_end;
  out << YAML::EndMap;
  const Exp3Params& p3 = cfg.scenario.exp3;
  out << YAML::Key << "exp3" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "phase1_end" << YAML::Value << p3.phase1_end;
  out << YAML::Key << "z0" << YAML::Value << p3.z0;
  out << YAML::Key << "dist_min" << YAML::Value << p3.dist_min;
  out << YAML::Key << "dist_max" << YAML::Value << p3.dist_max;
  out << YAML::Key << "dist_period" << YAML::Value << p3.dist_period;
  out << YAML::Key << "speed_x" << YAML::Value << p3.speed_x;
  out << YAML::Key << "z_pass" << YAML::Value << p3.z_pass;
  out << YAML::Key << "dist_pass" << YAML::Value << p3.dist_pass;
  out << YAML::Key << "window1_x" << YAML::Value << p3.window1_x;
  out << YAML::Key << "window2_x" << YAML::Value << p3.window2_x;
  out << YAML::Key << "window_half_width" << YAML::Value << p3.window_half_width;
  out << YAML::Key << "window_z_min" << YAML::Value << p3.window_z_min;
  out << YAML::Key << "window_z_max" << YAML::Value << p3.window_z_max;
  out << YAML::Key << "dist_final" << YAML::Value << p3.dist_final;
  out << YAML::Key << "z_final" << YAML::Value << p3.z_final;
  out << YAML::EndMap;
  const CustomParams& pc = cfg.scenario.custom;
  out << YAML::Key << "custom" << YAML::Value << YAML::BeginMap;
  std::vector<double> center{pc.center.x(), pc.center.y(), pc.center.z()};
  out << YAML::Key << "center" << YAML::Value << YAML::Flow << center;
  out << YAML::Key << "distance" << YAML::Value << pc.distance;
  out << YAML::Key << "yaw" << YAML::Value << pc.yaw;
  out << YAML::EndMap;
  if (!cfg.scenario.excitation.empty()) {
    out << YAML::Key << "excitation" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : cfg.scenario.excitation) {
      out << YAML::BeginMap;
      out << YAML::Key << "endpoint" << YAML::Value << c.endpoint;
      out << YAML::Key << "axis" << YAML::Value << c.axis;
      out << YAML::Key << "amplitude" << YAML::Value << c.amplitude;
      out << YAML::Key << "frequency" << YAML::Value << c.frequency;
      out << YAML::Key << "phase" << YAML::Value << c.phase;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void validate_config(const SimConfig& cfg) {
  require(cfg.dt_physics > 0.0, "dt_physics: must be positive");
  require(cfg.dt_control > 0.0, "dt_control: must be positive");
  const double ratio = cfg.dt_control / cfg.dt_physics;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 && ratio >= 1.0 - 1e-9,
          "dt_control: must be an integer multiple of dt_physics");
  require(cfg.duration >= 0.0, "duration: must be nonnegative");
  require(cfg.trials >= 1, "trials: must be at least 1");
  require(cfg.mass > 0.0, "mass: must be positive");
  require(cfg.sigma_a >= 0.0, "sigma_a: must be nonnegative");

  require(cfg.kp > 0.0, "gains.kp: must be positive");
  const bool adaptive =
      cfg.method == Method::AdaptivePhi || cfg.method == Method::AdaptivePhib;
  if (adaptive)
    require(cfg.kd > 0.25,
            "gains.kd: adaptive stability requires kd > 0.25, got " +
                std::to_string(cfg.kd));
  else
    require(cfg.kd > 0.0, "gains.kd: must be positive");
  require(cfg.ki_low >= 0.0 && cfg.ki_high >= 0.0, "gains.ki: must be nonnegative");
  require(cfg.i_max >= 0.0, "gains.i_max: must be nonnegative");
  require(cfg.u_max > cfg.mass * kGravity,
          "gains.u_max: must exceed hover thrust m*g = " +
              std::to_string(cfg.mass * kGravity));
  require(cfg.command_jump_limit > 0.0, "gains.command_jump_limit: must be positive");

  require(cfg.feature_order >= 1, "estimator.order: must be at least 1");
  require(cfg.p0 > 0.0, "estimator.p0: must be positive");
  require(cfg.lambda >= 0.0, "estimator.lambda: must be nonnegative");
  require(cfg.observer_delay == 0 || cfg.observer_delay == 1,
          "estimator.observer_delay: must be 0 or 1");
  require(cfg.snapshot_every >= 0, "estimator.snapshot_every: must be nonnegative");
  require(cfg.w_true_scale > 0.0, "w_true_scale: must be positive");
  require(cfg.thrust_tau > 0.0, "thrust_tau: must be positive");

  require(cfg.rod.L0 > 0.0, "rod.L0: must be positive");
  require(cfg.rod.r0 > 0.0 && cfg.rod.r0 <= cfg.rod.L0,
          "rod.r0: must lie in (0, L0]");
  require(cfg.rod.N >= 8, "rod.N: must be at least 8");
  require(cfg.rod.k_b.size() == cfg.rod.N - 1,
          "rod.k_b: expected " + std::to_string(cfg.rod.N - 1) + " joint stiffnesses");
  require(cfg.rod.m_s.size() == cfg.rod.N,
          "rod.m_s: expected " + std::to_string(cfg.rod.N) + " segment masses");
  require((cfg.rod.k_b.array() > 0.0).all(), "rod.k_b: all stiffnesses must be positive");
  require((cfg.rod.m_s.array() >= 0.0).all(), "rod.m_s: masses must be nonnegative");
  require(cfg.rod.damping >= 0.0, "rod.damping: must be nonnegative");

  require(cfg.scenario.duration == cfg.duration,
          "scenario.duration: must match the run duration");
  for (size_t i = 0; i < cfg.scenario.excitation.size(); ++i) {
    const auto& c = cfg.scenario.excitation[i];
    const std::string at = "scenario.excitation[" + std::to_string(i) + "]";
    require(c.endpoint == 0 || c.endpoint == 1, at + ".endpoint: must be 0 or 1");
    require(c.axis >= 0 && c.axis <= 2, at + ".axis: must be 0, 1, or 2");
    require(c.frequency > 0.0, at + ".frequency: must be positive");
  }
  try {
    check_distance_bounds(cfg.scenario, cfg.rod.L0);
  } catch (const DistanceBoundViolation& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

SimConfig preset_config(ScenarioKind kind) {
  SimConfig cfg;
  cfg.scenario.kind = kind;
  switch (kind) {
    case ScenarioKind::VaryingDistance:
      cfg.duration = 40.0;
      cfg.trials = 10;
      break;
    case ScenarioKind::WindowPass:
      cfg.duration = 60.0;
      cfg.trials = 3;
      break;
    case ScenarioKind::DualWindow:
      cfg.duration = 120.0;
      cfg.trials = 1;
      break;
    case ScenarioKind::Custom:
      cfg.duration = 60.0;
      cfg.trials = 1;
      break;
    case ScenarioKind::Validation:
      cfg.duration = 20.0;
      cfg.trials = 1;
      cfg.truth = TruthKind::SyntheticLinear;
      cfg.sigma_a = 0.0;
      cfg.p0 = 1e6;
      cfg.observer_delay = 0;
      break;
  }
  cfg.scenario.duration = cfg.duration;
  return cfg;
}

}  // namespace bendsim
