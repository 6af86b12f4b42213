#include "llg/config.hpp"

#include "llg/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace llg {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& obj, const std::string& key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  const std::string path = where + "." + key;
  if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer, got " + v.dump());
    out = v.get<int>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(path + ": expected a non-negative integer, got " + v.dump());
    }
    out = v.get<std::uint64_t>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number, got " + v.dump());
    out = v.get<double>();
  }
}

json parse_json(const std::string& text, const std::string& source) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    return json::object();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // locate the byte offset as line:column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  reject_unknown(j, {"K", "mu1", "mu2", "noise_scale", "control_modes", "T", "dt", "seed", "steering", "support", "pde"},
                 source);
  ExperimentConfig c;
  if (j.contains("K")) {
    int K = 0;
    read(j, "K", K, source);
    c.K = K;
  }
  read(j, "mu1", c.mu1, source);
  read(j, "mu2", c.mu2, source);
  read(j, "noise_scale", c.noise_scale, source);
  read(j, "T", c.T, source);
  read(j, "dt", c.dt, source);
  read(j, "seed", c.seed, source);
  if (j.contains("control_modes")) {
    const json& m = j.at("control_modes");
    if (!m.is_array()) throw ConfigError(source + ".control_modes: expected a list of [k, l] pairs");
    c.control_modes.clear();
    for (const auto& e : m) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw ConfigError(source + ".control_modes: expected [k, l] integer pairs, got " + e.dump());
      }
      c.control_modes.push_back({e[0].get<int>(), e[1].get<int>()});
    }
  }
  auto block = [&](const char* name) -> const json* {
    if (!j.contains(name)) return nullptr;
    const json& b = j.at(name);
    if (!b.is_object()) throw ConfigError(source + "." + name + ": expected an object");
    return &b;
  };
  if (const json* b = block("steering")) {
    const std::string w = source + ".steering";
    reject_unknown(*b, {"S", "budget", "eps_target", "restarts", "amplitude_bound"}, w);
    read(*b, "S", c.steering.S, w);
    read(*b, "budget", c.steering.budget, w);
    read(*b, "eps_target", c.steering.eps_target, w);
    read(*b, "restarts", c.steering.restarts, w);
    if (b->contains("amplitude_bound")) {
      double a = 0.0;
      read(*b, "amplitude_bound", a, w);
      c.steering.amplitude_bound = a;
    }
  }
  if (const json* b = block("support")) {
    const std::string w = source + ".support";
    reject_unknown(*b, {"N", "eps", "R", "grid_points"}, w);
    read(*b, "N", c.support.N, w);
    read(*b, "eps", c.support.eps, w);
    read(*b, "R", c.support.R, w);
    read(*b, "grid_points", c.support.grid_points, w);
  }
  if (const json* b = block("pde")) {
    const std::string w = source + ".pde";
    reject_unknown(*b, {"N_x"}, w);
    read(*b, "N_x", c.pde.N_x, w);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void ExperimentConfig::validate() const {
  if (!K) throw ConfigError("missing required key 'K'");
  if (*K < 0) throw ConfigError("K: must be >= 0");
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + ": must be a finite number > 0");
  };
  if (!std::isfinite(mu1)) throw ConfigError("mu1: must be finite");
  if (!(mu2 >= 0.0) || !std::isfinite(mu2)) throw ConfigError("mu2: must be finite and >= 0");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw ConfigError("noise_scale: must be finite and >= 0");
  positive(T, "T");
  positive(dt, "dt");
  if (dt > T) throw ConfigError("dt: must not exceed T");
  for (const auto& [k, l] : control_modes) {
    if (k < 0 || k > *K) throw ConfigError("control_modes: frequency " + std::to_string(k) + " outside 0..K");
    if (l < 1 || l > 3) throw ConfigError("control_modes: axis " + std::to_string(l) + " outside 1..3");
  }
  if (steering.S < 1) throw ConfigError("steering.S: must be >= 1");
  if (steering.budget < 0) throw ConfigError("steering.budget: must be >= 0");
  if (steering.restarts < 0) throw ConfigError("steering.restarts: must be >= 0");
  positive(steering.eps_target, "steering.eps_target");
  if (steering.amplitude_bound) positive(*steering.amplitude_bound, "steering.amplitude_bound");
  if (support.N < 1) throw ConfigError("support.N: must be >= 1");
  positive(support.eps, "support.eps");
  if (!(support.R >= 0.0)) throw ConfigError("support.R: must be >= 0");
  if (support.grid_points < 1) throw ConfigError("support.grid_points: must be >= 1");
  if (pde.N_x < 3) throw ConfigError("pde.N_x: must be >= 3");
}

LlgParams ExperimentConfig::params() const {
  LlgParams p;
  p.K = K.value_or(0);
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.noise_scale = noise_scale;
  p.control_modes = control_modes;
  return p;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = json::object();
  if (c.K) j["K"] = *c.K;
  j["mu1"] = c.mu1;
  j["mu2"] = c.mu2;
  j["noise_scale"] = c.noise_scale;
  j["control_modes"] = c.control_modes;
  j["T"] = c.T;
  j["dt"] = c.dt;
  j["seed"] = c.seed;
  json s = {{"S", c.steering.S},
            {"budget", c.steering.budget},
            {"eps_target", c.steering.eps_target},
            {"restarts", c.steering.restarts}};
  if (c.steering.amplitude_bound) s["amplitude_bound"] = *c.steering.amplitude_bound;
  j["steering"] = s;
  j["support"] = {{"N", c.support.N}, {"eps", c.support.eps}, {"R", c.support.R}, {"grid_points", c.support.grid_points}};
  j["pde"] = {{"N_x", c.pde.N_x}};
}

}  // namespace llg
