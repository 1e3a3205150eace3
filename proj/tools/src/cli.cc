// Copyright 2026 The dlbandit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dlbandit_cli/cli.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dlbandit/errors.h"

namespace dlbandit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  throw ConfigError("config key '" + key + "' must be " + expected);
}

double get_number(const std::string& key, const json& v) {
  if (!v.is_number()) bad_type(key, "a number");
  return v.get<double>();
}

long long get_integer(const std::string& key, const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  bad_type(key, "an integer");
}

std::size_t get_count(const std::string& key, const json& v) {
  const long long n = get_integer(key, v);
  if (n < 0) bad_type(key, "a non-negative integer");
  return static_cast<std::size_t>(n);
}

std::string get_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad_type(key, "a string");
  return v.get<std::string>();
}

bool get_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad_type(key, "a boolean");
  return v.get<bool>();
}

// Re-raises library parse errors (unknown enum names) as config errors.
template <typename F>
auto as_config(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

void parse_safe(const json& j, SafeSpec& safe) {
  if (!j.is_object()) bad_type("safe", "an object");
  for (const auto& [key, v] : j.items()) {
    const std::string full = "safe." + key;
    if (key == "c") {
      if (v.is_string() && v.get<std::string>() == "uniform") {
        safe.c.reset();
      } else {
        safe.c = get_number(full, v);
      }
    } else if (key == "min_gap") {
      safe.min_gap = get_number(full, v);
    } else if (key == "x0") {
      const std::string mode = get_string(full, v);
      if (mode == "zero") {
        safe.x0 = SafeActionMode::kZero;
      } else if (mode == "first_arm") {
        safe.x0 = SafeActionMode::kFirstArm;
      } else {
        throw ConfigError("safe.x0 must be 'zero' or 'first_arm'");
      }
    } else {
      throw ConfigError("unknown config key '" + full + "'");
    }
  }
}

json* walk(json& j, std::string_view dotted, bool create) {
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part(dotted.substr(start, dot == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : dot - start));
    if (part.empty()) throw ConfigError("malformed key '" + std::string(dotted) + "'");
    if (!node->is_object()) {
      if (!create) return nullptr;
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) return node;
    start = dot + 1;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// Refuses to write into a non-empty directory unless overwriting.
void prepare_out_dir(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) {
      throw ConfigError("output path '" + dir.string() + "' is not a directory");
    }
    if (!fs::is_empty(dir, ec) && !overwrite) {
      throw ConfigError("output directory '" + dir.string() +
                        "' is not empty (use --overwrite)");
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create '" + dir.string() + "': " + ec.message());
}

struct RunResult {
  int code = kExitOk;
  std::vector<Trace> traces;
  std::optional<Aggregate> agg;
};

RunResult run_into(const ExperimentConfig& config, const RunOptions& options,
                   const fs::path& dir, std::ostream& log) {
  RunResult result;
  try {
    config.validate();
    prepare_realization(config, 0);  // surfaces graph / matrix errors early
    prepare_out_dir(dir, options.overwrite);
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    result.code = kExitConfig;
    return result;
  }
  try {
    result.traces = run_experiment(config, options.workers);
  } catch (const InvariantViolation& e) {
    log << "invariant violation: " << e.what() << '\n';
    result.code = kExitRuntime;
    return result;
  } catch (const std::exception& e) {
    log << "runtime error: " << e.what() << '\n';
    result.code = kExitRuntime;
    return result;
  }
  result.agg = aggregate(result.traces);
  write_text(dir / "trace.csv", trace_csv(*result.agg));
  write_text(dir / "summary.json", summary_json(config, result.traces, *result.agg).dump(2) + "\n");
  return result;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  std::optional<std::string> decision;
  for (const auto& [key, v] : j.items()) {
    if (key == "topology") {
      c.topology.kind = as_config([&] { return parse_topology_kind(get_string(key, v)); });
    } else if (key == "N") {
      c.topology.n = get_count(key, v);
    } else if (key == "p") {
      c.topology.p = get_number(key, v);
    } else if (key == "edge_file") {
      c.topology.edge_file = get_string(key, v);
    } else if (key == "resample_graph") {
      c.topology.resample_random_graph = get_bool(key, v);
    } else if (key == "d") {
      c.dim = get_count(key, v);
    } else if (key == "T") {
      const long long t = get_integer(key, v);
      if (t < 0 || t > 100000000) bad_type(key, "an integer in [0, 1e8]");
      c.horizon = static_cast<int>(t);
    } else if (key == "algorithm") {
      c.algorithm = as_config([&] { return parse_algorithm(get_string(key, v)); });
    } else if (key == "decision_set") {
      decision = get_string(key, v);
      if (*decision != "box" && *decision != "finite") {
        throw ConfigError("decision_set must be 'box' or 'finite'");
      }
      c.decision.box = *decision == "box";
    } else if (key == "K") {
      c.decision.arms = get_count(key, v);
    } else if (key == "arm_distribution") {
      const std::string dist = get_string(key, v);
      if (dist != "sphere" && dist != "ball") {
        throw ConfigError("arm_distribution must be 'sphere' or 'ball'");
      }
      c.decision.ball = dist == "ball";
    } else if (key == "resample_arms") {
      c.decision.resample_arms = get_bool(key, v);
    } else if (key == "arm_seed") {
      c.decision.arm_seed = static_cast<std::uint64_t>(get_count(key, v));
    } else if (key == "sigma") {
      c.sigma = get_number(key, v);
    } else if (key == "lambda") {
      c.lambda = get_number(key, v);
    } else if (key == "delta") {
      c.delta = get_number(key, v);
    } else if (key == "epsilon") {
      if (v.is_null()) {
        c.epsilon.reset();
      } else {
        c.epsilon = get_number(key, v);
      }
    } else if (key == "safe") {
      parse_safe(v, c.safe);
    } else if (key == "realizations") {
      const long long r = get_integer(key, v);
      if (r < 1 || r > 1000000) bad_type(key, "an integer in [1, 1e6]");
      c.realizations = static_cast<int>(r);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(get_count(key, v));
    } else if (key == "keep_warmup_data") {
      c.keep_warmup_data = get_bool(key, v);
    } else if (key == "scheme") {
      c.scheme = as_config([&] { return parse_comm_scheme(get_string(key, v)); });
    } else if (key == "rounding") {
      const std::string r = get_string(key, v);
      if (r == "ceil") {
        c.rounding = MixingRounding::kCeil;
      } else if (r == "nearest") {
        c.rounding = MixingRounding::kNearest;
      } else {
        throw ConfigError("rounding must be 'ceil' or 'nearest'");
      }
    } else if (key == "rc_threshold") {
      if (v.is_null()) {
        c.rc_threshold.reset();
      } else {
        c.rc_threshold = get_number(key, v);
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["topology"] = std::string(to_string(c.topology.kind));
  j["N"] = c.topology.n;
  if (c.topology.kind == TopologyKind::kErdosRenyi) {
    j["p"] = c.topology.p;
    j["resample_graph"] = c.topology.resample_random_graph;
  }
  if (c.topology.kind == TopologyKind::kExplicit) j["edge_file"] = c.topology.edge_file;
  j["d"] = c.dim;
  j["T"] = c.horizon;
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["decision_set"] = c.decision.box ? "box" : "finite";
  if (!c.decision.box) {
    j["K"] = c.decision.arms;
    j["arm_seed"] = c.decision.arm_seed;
    j["arm_distribution"] = c.decision.ball ? "ball" : "sphere";
    j["resample_arms"] = c.decision.resample_arms;
  }
  j["sigma"] = c.sigma;
  j["lambda"] = c.lambda;
  j["delta"] = c.delta;
  j["epsilon"] = c.resolved_epsilon();
  if (c.safe_mode()) {
    json s;
    s["c"] = c.safe.c ? json(*c.safe.c) : json("uniform");
    s["min_gap"] = c.safe.min_gap;
    s["x0"] = c.safe.x0 == SafeActionMode::kZero ? "zero" : "first_arm";
    j["safe"] = s;
  }
  j["realizations"] = c.realizations;
  j["seed"] = c.seed;
  j["keep_warmup_data"] = c.keep_warmup_data;
  j["scheme"] = std::string(to_string(c.scheme));
  j["rounding"] = c.rounding == MixingRounding::kCeil ? "ceil" : "nearest";
  if (c.rc_threshold) j["rc_threshold"] = *c.rc_threshold;
  return j;
}

void apply_override(json& j, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *walk(j, key, true) = std::move(value);
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      j = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j);
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const Aggregate& agg) {
  std::string out =
      "t,regret_mean,regret_std,per_agent_regret_mean,comm_scalars_cum,phases_cum,"
      "violations_cum\n";
  for (std::size_t t = 0; t < agg.regret_mean.size(); ++t) {
    out += std::to_string(t + 1);
    for (double v : {agg.regret_mean[t], agg.regret_std[t], agg.per_agent_regret_mean[t],
                     agg.comm_scalars_cum[t], agg.phases_cum[t], agg.violations_cum[t]}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

json summary_json(const ExperimentConfig& config, const std::vector<Trace>& traces,
                  const Aggregate& agg) {
  json s;
  s["config"] = config_to_json(config);
  s["realizations"] = traces.size();
  s["T"] = config.horizon;
  const bool any = !agg.regret_mean.empty();
  s["final_regret_mean"] = any ? agg.regret_mean.back() : 0.0;
  s["final_regret_std"] = any ? agg.regret_std.back() : 0.0;
  s["per_agent_final_regret_mean"] = any ? agg.per_agent_regret_mean.back() : 0.0;
  s["phase_count"] = agg.phase_count_mean;
  s["phase_count_std"] = agg.phase_count_std;
  s["total_comm_cost"] = any ? agg.comm_scalars_cum.back() : 0.0;
  s["violations_mean"] = any ? agg.violations_cum.back() : 0.0;
  const Trace& first = traces.front();
  s["S"] = first.mixing_rounds;
  s["lambda2_abs"] = first.lambda2_abs;

  std::optional<double> bound_sum;
  int within = 0;
  json per = json::array();
  for (const Trace& tr : traces) {
    json r;
    r["final_regret"] = tr.final_regret();
    r["phase_count"] = tr.phase_count;
    r["comm_cost"] = tr.total_scalars();
    r["violations"] = tr.total_violations();
    r["S"] = tr.mixing_rounds;
    r["lambda2_abs"] = tr.lambda2_abs;
    r["theoretical_bound"] = tr.bound ? json(*tr.bound) : json(nullptr);
    if (tr.bound) {
      bound_sum = bound_sum.value_or(0.0) + *tr.bound;
      if (tr.final_regret() <= *tr.bound) ++within;
    }
    per.push_back(std::move(r));
  }
  if (bound_sum) {
    s["theoretical_bound"] = *bound_sum / static_cast<double>(traces.size());
    s["realizations_within_bound"] = within;
  } else {
    s["theoretical_bound"] = nullptr;
    s["realizations_within_bound"] = nullptr;
  }
  s["per_realization"] = std::move(per);
  return s;
}

int cmd_run(const ExperimentConfig& config, const RunOptions& options, std::ostream& log) {
  const RunResult r = run_into(config, options, options.out, log);
  if (r.code == kExitOk) {
    log << "wrote " << (fs::path(options.out) / "trace.csv").string() << " and summary.json"
        << " (final regret mean " << format_double(r.agg->regret_mean.empty()
                                                       ? 0.0
                                                       : r.agg->regret_mean.back())
        << ")\n";
  }
  return r.code;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "T") return SweepAxis::kT;
  if (name == "N") return SweepAxis::kN;
  if (name == "algorithm") return SweepAxis::kAlgorithm;
  if (name == "topology") return SweepAxis::kTopology;
  throw ConfigError("sweep axis must be one of T, N, algorithm, topology");
}

ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis,
                            std::string_view value) {
  json j = config_to_json(base);
  const std::string key = axis == SweepAxis::kT          ? "T"
                          : axis == SweepAxis::kN         ? "N"
                          : axis == SweepAxis::kAlgorithm ? "algorithm"
                                                          : "topology";
  apply_override(j, key + "=" + std::string(value));
  if (axis == SweepAxis::kTopology && j["topology"] == "erdos_renyi" && !j.contains("p")) {
    j["p"] = base.topology.p;
  }
  if (axis == SweepAxis::kAlgorithm && j["algorithm"] == "safe_dlucb" && !j.contains("safe")) {
    j["safe"] = json::object();
  }
  return parse_config(j);
}

int cmd_sweep(const ExperimentConfig& base, std::string_view axis_name,
              const std::vector<std::string>& values, const RunOptions& options,
              std::ostream& log) {
  SweepAxis axis;
  std::vector<ExperimentConfig> points;
  try {
    axis = parse_sweep_axis(axis_name);
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    for (const auto& v : values) points.push_back(apply_axis(base, axis, v));
    prepare_out_dir(options.out, options.overwrite);
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::string csv =
      "axis,value,T,N,algorithm,topology,final_regret_mean,final_regret_std,"
      "per_agent_final_regret_mean,phase_count_mean,comm_cost_mean,violations_mean,S\n";
  int worst = kExitOk;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const ExperimentConfig& c = points[k];
    const fs::path dir = fs::path(options.out) / (std::string(axis_name) + "_" + values[k]);
    RunOptions sub = options;
    sub.overwrite = true;
    const RunResult r = run_into(c, sub, dir, log);
    if (r.code != kExitOk) {
      worst = std::max(worst, r.code);
      continue;
    }
    const Aggregate& a = *r.agg;
    const bool any = !a.regret_mean.empty();
    csv += std::string(axis_name) + ',' + values[k] + ',' + std::to_string(c.horizon) + ',' +
           std::to_string(c.topology.n) + ',' + std::string(to_string(c.algorithm)) + ',' +
           std::string(to_string(c.topology.kind)) + ',' +
           format_double(any ? a.regret_mean.back() : 0.0) + ',' +
           format_double(any ? a.regret_std.back() : 0.0) + ',' +
           format_double(any ? a.per_agent_regret_mean.back() : 0.0) + ',' +
           format_double(a.phase_count_mean) + ',' +
           format_double(any ? a.comm_scalars_cum.back() : 0.0) + ',' +
           format_double(any ? a.violations_cum.back() : 0.0) + ',' +
           std::to_string(r.traces.front().mixing_rounds) + '\n';
    log << axis_name << '=' << values[k] << ": final regret mean "
        << format_double(any ? a.regret_mean.back() : 0.0) << '\n';
  }
  write_text(fs::path(options.out) / "sweep.csv", csv);
  return worst;
}

int cmd_graph_info(const ExperimentConfig& config, std::ostream& out) {
  try {
    const RealizationSetup setup = [&] {
      // Matrix construction may legitimately fail; rebuild the pieces by hand.
      ExperimentConfig c = config;
      c.scheme = CommScheme::kLaplacian;
      return prepare_realization(c, 0);
    }();
    const GraphTopology& topo = setup.comm->topology();
    const Eigen::MatrixXd p = comm_matrix_entries(topo, config.scheme);
    const AssumptionReport report = check_assumption(topo, p);
    const double eps = config.resolved_epsilon();
    out << "topology: " << to_string(topo.kind()) << '\n'
        << "N: " << topo.size() << '\n'
        << "edges: " << topo.edge_count() << '\n'
        << "max_degree: " << topo.max_degree() << '\n'
        << "scheme: " << to_string(config.scheme) << '\n'
        << "lambda2_abs: " << format_double(report.lambda2_abs) << '\n'
        << "epsilon: " << format_double(eps) << '\n';
    if (report.lambda2_abs < 1.0) {
      out << "S: " << compute_mixing_rounds(topo.size(), eps, report.lambda2_abs, config.rounding)
          << '\n'
          << "S_ceil: "
          << compute_mixing_rounds(topo.size(), eps, report.lambda2_abs, MixingRounding::kCeil)
          << '\n'
          << "S_nearest: "
          << compute_mixing_rounds(topo.size(), eps, report.lambda2_abs,
                                   MixingRounding::kNearest)
          << '\n';
    }
    out << "max_row_sum_deviation: " << format_double(report.max_row_sum_deviation) << '\n'
        << "assumption_check: " << (report.ok ? "PASS" : "FAIL") << '\n';
    if (!report.ok) out << "diagnostic: " << report.diagnostic << '\n';
    return kExitOk;
  } catch (const Error& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace dlbandit::cli
