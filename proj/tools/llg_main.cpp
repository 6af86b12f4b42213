// llg: command-line entry point for the controlled LLG Galerkin experiments.
//
// Exit codes: 0 success, 1 validation error, 2 steering completed without converging.

#include "llg/config.hpp"
#include "llg/galerkin.hpp"
#include "llg/integrators.hpp"
#include "llg/json_io.hpp"
#include "llg/lie.hpp"
#include "llg/parallel.hpp"
#include "llg/pde.hpp"
#include "llg/steering.hpp"
#include "llg/stochastic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace llg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;

struct Common {
  std::string config_path;
  int K = 0;
  double mu1 = 1, mu2 = 1, noise_scale = 1, T = 1, dt = 1e-3;
  std::uint64_t seed = 0;
  std::string modes;
  int threads = 0;
  std::string out;
  // subcommand blocks
  int S = 8, budget = 2000, restarts = 5;
  double eps_target = 1e-2, amplitude_bound = 0;
  int N = 10000, grid_points = 5;
  double eps = 0.05, R = 0;
  int N_x = 257;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<ModeIndex> parse_modes(const std::string& s) {
  // "0,1;0,2;1,1"
  std::vector<ModeIndex> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    int k = 0, l = 0;
    char comma = 0;
    std::stringstream is(item);
    if (!(is >> k >> comma >> l) || comma != ',' || !is.eof()) {
      throw ConfigError("--modes: expected 'k,l;k,l;...', got '" + item + "'");
    }
    out.push_back({k, l});
  }
  return out;
}

std::vector<double> parse_list(const std::string& s, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(flag) + ": not a number: '" + item + "'");
    }
  }
  return out;
}

// file config, then explicitly given flags
ExperimentConfig effective_config(const CLI::App& app, const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--K")) cfg.K = c.K;
  if (given("--mu1")) cfg.mu1 = c.mu1;
  if (given("--mu2")) cfg.mu2 = c.mu2;
  if (given("--noise-scale")) cfg.noise_scale = c.noise_scale;
  if (given("--T")) cfg.T = c.T;
  if (given("--dt")) cfg.dt = c.dt;
  if (given("--seed")) cfg.seed = c.seed;
  if (given("--modes")) cfg.control_modes = parse_modes(c.modes);
  if (given("--S")) cfg.steering.S = c.S;
  if (given("--budget")) cfg.steering.budget = c.budget;
  if (given("--restarts")) cfg.steering.restarts = c.restarts;
  if (given("--eps-target")) cfg.steering.eps_target = c.eps_target;
  if (given("--amplitude-bound")) cfg.steering.amplitude_bound = c.amplitude_bound;
  if (given("--N")) cfg.support.N = c.N;
  if (given("--eps")) cfg.support.eps = c.eps;
  if (given("--R")) cfg.support.R = c.R;
  if (given("--grid-points")) cfg.support.grid_points = c.grid_points;
  if (given("--Nx")) cfg.pde.N_x = c.N_x;
  cfg.validate();
  return cfg;
}

ModeState load_state(const std::string& path, int K) {
  json j = read_json_file(path);
  if (j.contains("coeffs")) {
    ModeState m = j.get<ModeState>();
    if (m.K() != K) throw ConfigError(path + ": state has K=" + std::to_string(m.K()) + ", config has K=" + std::to_string(K));
    return m;
  }
  throw ConfigError(path + ": expected a state object {\"K\", \"coeffs\"}");
}

// Accepts a bare schedule, a SteeringResult, or a steer summary.
const json* find_schedule(const json& j) {
  if (j.contains("values") && j.contains("modes")) return &j;
  if (j.contains("schedule")) return find_schedule(j.at("schedule"));
  if (j.contains("result")) return find_schedule(j.at("result"));
  return nullptr;
}

ControlSchedule load_schedule(const std::string& path) {
  const json j = read_json_file(path);
  const json* s = find_schedule(j);
  if (!s) throw ConfigError(path + ": no control schedule found");
  return s->get<ControlSchedule>();
}

struct Output {
  std::string base;  // path prefix for data files
  std::string json_path;
  std::vector<std::string> artifacts;

  explicit Output(const std::string& out, const std::string& sub) {
    if (out.empty()) {
      base = sub;
    } else {
      json_path = out;
      const fs::path p(out);
      base = (p.parent_path() / p.stem()).string();
    }
  }
  std::ofstream csv(const std::string& suffix) {
    const std::string path = base + "_" + suffix + ".csv";
    artifacts.push_back(path);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError(path + ": cannot write");
    return f;
  }
  void emit(json summary) {
    summary["artifacts"] = artifacts;
    const std::string text = summary.dump(2) + "\n";
    if (json_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(json_path);
      if (!f) throw ConfigError(json_path + ": cannot write");
      f << text;
    }
  }
};

json summary_head(const std::string& sub, const ExperimentConfig& cfg, int threads) {
  return {{"subcommand", sub}, {"config", cfg}, {"seed", cfg.seed}, {"threads", threads}};
}

ModeState default_state(int K, std::uint64_t seed) { return lie::random_sphere_state(K, std::sqrt(kTwoPi), seed); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled LLG spectral-Galerkin experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--config", c.config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
  app.add_option("--K", c.K, "Galerkin truncation");
  app.add_option("--mu1", c.mu1);
  app.add_option("--mu2", c.mu2);
  app.add_option("--noise-scale", c.noise_scale, "multiplies the stochastic forcing");
  app.add_option("--modes", c.modes, "control modes 'k,l;k,l;...'");
  app.add_option("--T", c.T, "horizon");
  app.add_option("--dt", c.dt, "time step");
  app.add_option("--seed", c.seed);
  app.add_option("--threads", c.threads, "worker threads (default: LLG_THREADS, else all cores)");
  app.add_option("--out", c.out, "JSON summary path (default: stdout)");
  app.add_option("--S", c.S, "steering segments");
  app.add_option("--budget", c.budget, "steering iteration budget");
  app.add_option("--restarts", c.restarts, "steering random restarts");
  app.add_option("--eps-target", c.eps_target, "relative steering tolerance");
  app.add_option("--amplitude-bound", c.amplitude_bound, "box bound on control amplitudes");
  app.add_option("--N", c.N, "Monte-Carlo paths");
  app.add_option("--eps", c.eps, "small-ball radius");
  app.add_option("--R", c.R, "radius of the initial-point grid");
  app.add_option("--grid-points", c.grid_points, "number of initial points when R > 0");
  app.add_option("--Nx", c.N_x, "PDE grid points including both endpoints");

  std::string m0_path, m1_path, schedule_path, shift_path_arg, method = "auto", ks = "2,4,8,16",
                                                                t1s = "0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1";
  int samples = 100, depth_cap = -1, stride = 1, k_ref = 48;
  bool stochastic = false, with_drift = false;

  auto* sim = app.add_subcommand("simulate", "integrate the Galerkin system, write a trajectory CSV");
  sim->add_option("--m0", m0_path, "initial state JSON (default: random sphere state from --seed)");
  sim->add_option("--schedule", schedule_path, "control schedule JSON (default: zero)");
  sim->add_flag("--stochastic", stochastic, "drive with noise (Heun-Stratonovich) instead of a control");
  sim->add_option("--stride", stride, "store every n-th step");

  auto* rank = app.add_subcommand("rank", "bracket-generating rank at random sphere states");
  rank->add_option("--samples", samples);
  rank->add_option("--depth-cap", depth_cap);
  rank->add_flag("--with-drift", with_drift, "also report the rank of the drift-extended family");

  auto* steer = app.add_subcommand("steer", "synthesize a steering control");
  steer->add_option("--m0", m0_path, "initial state JSON (default: random from --seed)");
  steer->add_option("--m1", m1_path, "target state JSON, or 'drift' for the uncontrolled endpoint (default: random from --seed + 1)");

  auto* support = app.add_subcommand("support", "small-ball probability estimates");
  support->add_option("--m0", m0_path);
  support->add_option("--m1", m1_path);
  support->add_option("--shift", shift_path_arg, "steering summary or schedule used as the Girsanov shift");
  support->add_option("--method", method, "direct | shifted | both | auto")
      ->check(CLI::IsMember({"direct", "shifted", "both", "auto"}));

  auto* pdec = app.add_subcommand("pde-compare", "Galerkin vs finite-difference reference");
  pdec->add_option("--Ks", ks, "comma-separated Galerkin truncations");
  pdec->add_option("--K-ref", k_ref, "resolution of the smooth initial field");

  auto* tail = app.add_subcommand("tail", "tail growth beyond frequency K in the PDE");
  tail->add_option("--T1", t1s, "comma-separated horizons");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    const ExperimentConfig cfg = effective_config(app, c);
    const int threads = resolve_threads(c.threads);
    const LlgParams params = cfg.params();
    const int K = *cfg.K;
    const std::string sub = app.get_subcommands().front()->get_name();
    Output out(c.out, sub);
    json summary = summary_head(sub, cfg, threads);

    if (sub == "simulate") {
      const GalerkinModel model(params);
      const ModeState m0 = m0_path.empty() ? default_state(K, cfg.seed) : load_state(m0_path, K);
      Trajectory traj;
      if (stochastic) {
        const SamplePath path = sample_brownian(params.control_modes, cfg.T, cfg.dt, cfg.seed);
        traj = integrate_sde(model, m0, path, SdeScheme::HeunStratonovich, stride);
      } else {
        const ControlSchedule sched =
            schedule_path.empty() ? ControlSchedule::Zero(params.control_modes, cfg.T, 1) : load_schedule(schedule_path);
        IntegrateOptions o;
        o.stride = stride;
        traj = integrate_controlled(model, m0, sched, cfg.dt, o);
      }
      auto f = out.csv("trajectory");
      write_trajectory_csv(f, traj);
      summary["options"] = {{"stochastic", stochastic}, {"stride", stride}, {"m0", m0_path}, {"schedule", schedule_path}};
      summary["result"] = {{"norm_drift", traj.norm_drift}, {"initial_state", m0}, {"final_state", traj.final_state()}};
      out.emit(summary);
      return kExitOk;
    }

    if (sub == "rank") {
      const lie::RankReport r = lie::bracket_generating_report(K, params.control_modes, samples, cfg.seed, depth_cap, threads);
      summary["options"] = {{"samples", samples}, {"depth_cap", depth_cap}, {"with_drift", with_drift}};
      summary["result"] = r;
      if (with_drift) {
        const GalerkinModel model(params);
        summary["result"]["drift_extended"] = lie::accessibility_report(model, samples, cfg.seed, depth_cap, 2, threads);
      }
      out.emit(summary);
      return kExitOk;
    }

    if (sub == "steer") {
      const GalerkinModel model(params);
      const ModeState m0 = m0_path.empty() ? default_state(K, cfg.seed) : load_state(m0_path, K);
      ModeState m1;
      if (m1_path == "drift") {
        m1 = ModeState(K, integrate_final(model, m0.coeffs(), ControlSchedule::Zero(params.control_modes, cfg.T, 1), cfg.dt));
      } else {
        m1 = m1_path.empty() ? default_state(K, cfg.seed + 1) : load_state(m1_path, K);
      }
      summary["options"] = {{"m0", m0_path}, {"m1", m1_path}};
      const NormCheck nc = norm_compatibility_check(m0, m1);
      if (!nc.compatible) {
        std::cerr << "steer: refused, |m0|_w and |m1|_w differ by " << format_double(nc.gap)
                  << "; the weighted L2 norm is conserved by the system\n";
        summary["result"] = {{"refused", true}, {"norm_gap", nc.gap}, {"m0", m0}, {"m1", m1}};
        out.emit(summary);
        return kExitInvalid;
      }
      SteeringOptions so;
      so.segments = cfg.steering.S;
      so.budget = cfg.steering.budget;
      so.eps_target = cfg.steering.eps_target;
      so.restarts = cfg.steering.restarts;
      so.amplitude_bound = cfg.steering.amplitude_bound;
      so.seed = cfg.seed;
      so.dt = cfg.dt;
      so.threads = threads;
      const SteeringResult r = synthesize_steering(model, m0, m1, cfg.T, so);
      auto f = out.csv("schedule");
      write_schedule_csv(f, r.schedule);
      json res = r;
      res["m0"] = m0;
      res["m1"] = m1;
      res["T"] = cfg.T;
      summary["result"] = res;
      out.emit(summary);
      return r.converged ? kExitOk : kExitNotConverged;
    }

    if (sub == "support") {
      const GalerkinModel model(params);
      json shift_doc;
      if (!shift_path_arg.empty()) shift_doc = read_json_file(shift_path_arg);
      // endpoints: explicit files, else those recorded in the steering summary
      auto endpoint = [&](const std::string& path, const char* key, std::uint64_t fallback_seed) {
        if (!path.empty()) return load_state(path, K);
        for (const json* d : {&shift_doc, shift_doc.contains("result") ? &shift_doc.at("result") : nullptr}) {
          if (d && d->contains(key)) {
            ModeState m = d->at(key).get<ModeState>();
            if (m.K() != K) throw ConfigError(std::string("shift file ") + key + " has a different K");
            return m;
          }
        }
        return default_state(K, fallback_seed);
      };
      const ModeState m0 = endpoint(m0_path, "m0", cfg.seed);
      const ModeState m1 = endpoint(m1_path, "m1", cfg.seed + 1);
      std::optional<ControlSchedule> shift;
      if (!shift_path_arg.empty()) {
        const json* s = find_schedule(shift_doc);
        if (!s) throw ConfigError(shift_path_arg + ": no control schedule found");
        shift = s->get<ControlSchedule>();
        if (std::abs(shift->T() - cfg.T) > 1e-9 * cfg.T) {
          throw ConfigError("--shift: schedule horizon " + format_double(shift->T()) + " differs from T=" + format_double(cfg.T));
        }
      }
      const std::string m = method == "auto" ? (shift ? "shifted" : "direct") : method;
      if ((m == "shifted" || m == "both") && !shift) throw ConfigError("--method " + m + " needs --shift");

      SmallBallOptions sb;
      sb.eps = cfg.support.eps;
      sb.T = cfg.T;
      sb.dt = cfg.dt;
      sb.N = cfg.support.N;
      sb.seed = cfg.seed;
      sb.threads = threads;

      std::vector<SweepPoint> points;
      if (cfg.support.R > 0.0) {
        SteeringOptions so;
        so.segments = shift ? shift->segments() : cfg.steering.S;
        so.budget = cfg.steering.budget;
        so.eps_target = cfg.steering.eps_target;
        so.restarts = cfg.steering.restarts;
        so.seed = cfg.seed;
        so.threads = threads;
        for (const auto& p : control_orbit_grid(model, m0, cfg.support.R, cfg.support.grid_points)) {
          SweepPoint sp{p, std::nullopt, 0.0};
          if (shift) sp.shift = synthesize_steering(model, p, m1, cfg.T, so).schedule;
          points.push_back(std::move(sp));
        }
      } else {
        points.push_back({m0, shift, 0.0});
      }

      json res = {{"m0", m0}, {"m1", m1}, {"method", m}};
      auto run = [&](bool shifted) {
        std::vector<SweepPoint> pts = points;
        if (!shifted)
          for (auto& p : pts) p.shift.reset();
        return support_theorem_sweep(model, pts, m1, cfg.support.R, sb);
      };
      std::vector<double> lows;
      if (m == "direct" || m == "both") {
        const SweepReport r = run(false);
        res["direct"] = r;
        lows.push_back(r.delta);
      }
      if (m == "shifted" || m == "both") {
        const SweepReport r = run(true);
        res["shifted"] = r;
        lows.push_back(r.delta);
        if (points.size() == 1) res["estimate"] = r.estimates.front();
      } else if (points.size() == 1) {
        res["estimate"] = res["direct"]["estimates"][0];
      }
      summary["options"] = {{"m0", m0_path}, {"m1", m1_path}, {"shift", shift_path_arg}, {"method", m}};
      summary["result"] = res;
      out.emit(summary);
      return kExitOk;
    }

    if (sub == "pde-compare") {
      const std::vector<double> kv = parse_list(ks, "--Ks");
      const ModeState M0 = project_function(SmoothUnitField{}, k_ref);
      json rows = json::array();
      const std::optional<ControlSchedule> none;
      for (double kd : kv) {
        const int Kc = static_cast<int>(kd);
        if (Kc != kd || Kc < 0 || Kc > k_ref) throw ConfigError("--Ks: truncations must be integers in 0..K-ref");
        rows.push_back(compare_galerkin_pde(params, M0, Kc, none, cfg.T, cfg.dt, cfg.pde.N_x));
      }
      PdeRunOptions po;
      const PdeRun run = pde_integrate(grid_from_modes(M0, cfg.pde.N_x), params, cfg.T, none, po);
      auto f = out.csv("pde_final");
      write_grid_csv(f, run.final_state);
      summary["options"] = {{"Ks", ks}, {"K_ref", k_ref}};
      summary["result"] = {{"comparisons", rows}, {"pde_dt", run.dt}, {"pde_steps", run.steps}};
      out.emit(summary);
      return kExitOk;
    }

    if (sub == "tail") {
      const std::vector<double> T1 = parse_list(t1s, "--T1");
      const GridState g0 = make_grid(cfg.pde.N_x, SmoothUnitField{});
      const TailGrowthReport r = tail_growth_experiment(g0, params, K, T1);
      auto f = out.csv("tail");
      f << "T1,growth\r\n";
      for (std::size_t i = 0; i < r.T1.size(); ++i) f << format_double(r.T1[i]) << ',' << format_double(r.growth[i]) << "\r\n";
      summary["options"] = {{"T1", t1s}};
      summary["result"] = r;
      out.emit(summary);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}
