#ifndef PUSHSUB_CONFIG_HPP
#define PUSHSUB_CONFIG_HPP

/// \file config.hpp
/// \brief Experiment configuration: a JSON document with fixed nested
/// sections. Unknown keys are rejected. to_text() is canonical, so a config
/// read from its own to_text() output serializes to the same bytes.

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace pushsub {

/// Bad or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphConfig {
  std::string kind = "static-cycle";
  std::size_t n = 3;
  std::size_t horizon = 100;
  std::size_t inject_period = 5;
  double arc_probability = 0.2;
  std::string file;  // overrides kind/n/horizon when set
};

struct WeightsConfig {
  std::string rule = "uniform-out-degree";  // or "custom"
  std::string file;                         // dense matrices, required for "custom"
};

struct ObjectiveConfig {
  std::string kind = "quadratic";
  std::vector<std::vector<double>> targets;   // quadratic, l1
  std::vector<std::vector<double>> features;  // hinge
  std::vector<double> labels;                 // hinge
  std::vector<double> box_lo;
  std::vector<double> box_hi;
  std::optional<double> G;
  std::optional<std::vector<double>> zstar;
};

struct ScheduleConfig {
  std::string kind = "harmonic";
  double a = 1.0;
  double p = 1.0;
  std::size_t T = 0;
};

struct InitConfig {
  std::string mode = "random";  // or "explicit"
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::vector<double>> x;
};

struct BoundsConfig {
  bool network = true;
  bool agents = true;
  bool consensus = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t d = 1;
  GraphConfig graph;
  WeightsConfig weights;
  ObjectiveConfig objective;
  ScheduleConfig schedule;
  InitConfig init;
  BoundsConfig bounds;
  std::string output = "out";
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["seed"] = c.seed;
  j["d"] = c.d;
  j["graph"] = {{"kind", c.graph.kind},
                {"n", c.graph.n},
                {"horizon", c.graph.horizon},
                {"inject_period", c.graph.inject_period},
                {"arc_probability", c.graph.arc_probability},
                {"file", c.graph.file}};
  j["weights"] = {{"rule", c.weights.rule}, {"file", c.weights.file}};
  json obj = {{"kind", c.objective.kind},
              {"targets", c.objective.targets},
              {"features", c.objective.features},
              {"labels", c.objective.labels},
              {"box", {{"lo", c.objective.box_lo}, {"hi", c.objective.box_hi}}}};
  obj["G"] = c.objective.G ? json(*c.objective.G) : json(nullptr);
  obj["zstar"] = c.objective.zstar ? json(*c.objective.zstar) : json(nullptr);
  j["objective"] = obj;
  j["schedule"] = {{"kind", c.schedule.kind}, {"a", c.schedule.a}, {"p", c.schedule.p},
                   {"T", c.schedule.T}};
  j["init"] = {{"mode", c.init.mode}, {"lo", c.init.lo}, {"hi", c.init.hi}, {"x", c.init.x}};
  j["bounds"] = {{"network", c.bounds.network},
                 {"agents", c.bounds.agents},
                 {"consensus", c.bounds.consensus}};
  j["output"] = c.output;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read_opt;
  using detail::require_keys;
  ExperimentConfig c;
  require_keys(j, "config",
               {"seed", "d", "graph", "weights", "objective", "schedule", "init", "bounds",
                "output"});
  read_opt(j, "seed", c.seed, "config");
  read_opt(j, "d", c.d, "config");
  read_opt(j, "output", c.output, "config");
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    require_keys(g, "graph", {"kind", "n", "horizon", "inject_period", "arc_probability", "file"});
    read_opt(g, "kind", c.graph.kind, "graph");
    read_opt(g, "n", c.graph.n, "graph");
    read_opt(g, "horizon", c.graph.horizon, "graph");
    read_opt(g, "inject_period", c.graph.inject_period, "graph");
    read_opt(g, "arc_probability", c.graph.arc_probability, "graph");
    read_opt(g, "file", c.graph.file, "graph");
  }
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    require_keys(w, "weights", {"rule", "file"});
    read_opt(w, "rule", c.weights.rule, "weights");
    read_opt(w, "file", c.weights.file, "weights");
  }
  if (j.contains("objective")) {
    const auto& o = j["objective"];
    require_keys(o, "objective",
                 {"kind", "targets", "features", "labels", "box", "G", "zstar"});
    read_opt(o, "kind", c.objective.kind, "objective");
    read_opt(o, "targets", c.objective.targets, "objective");
    read_opt(o, "features", c.objective.features, "objective");
    read_opt(o, "labels", c.objective.labels, "objective");
    if (o.contains("box")) {
      require_keys(o["box"], "objective.box", {"lo", "hi"});
      read_opt(o["box"], "lo", c.objective.box_lo, "objective.box");
      read_opt(o["box"], "hi", c.objective.box_hi, "objective.box");
    }
    if (o.contains("G") && !o["G"].is_null()) {
      double g = 0.0;
      read_opt(o, "G", g, "objective");
      c.objective.G = g;
    }
    if (o.contains("zstar") && !o["zstar"].is_null()) {
      std::vector<double> z;
      read_opt(o, "zstar", z, "objective");
      c.objective.zstar = z;
    }
  }
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    require_keys(s, "schedule", {"kind", "a", "p", "T"});
    read_opt(s, "kind", c.schedule.kind, "schedule");
    read_opt(s, "a", c.schedule.a, "schedule");
    read_opt(s, "p", c.schedule.p, "schedule");
    read_opt(s, "T", c.schedule.T, "schedule");
  }
  if (j.contains("init")) {
    const auto& i = j["init"];
    require_keys(i, "init", {"mode", "lo", "hi", "x"});
    read_opt(i, "mode", c.init.mode, "init");
    read_opt(i, "lo", c.init.lo, "init");
    read_opt(i, "hi", c.init.hi, "init");
    read_opt(i, "x", c.init.x, "init");
  }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    require_keys(b, "bounds", {"network", "agents", "consensus"});
    read_opt(b, "network", c.bounds.network, "bounds");
    read_opt(b, "agents", c.bounds.agents, "bounds");
    read_opt(b, "consensus", c.bounds.consensus, "bounds");
  }
  return c;
}

inline std::string to_text(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace pushsub

#endif  // PUSHSUB_CONFIG_HPP
