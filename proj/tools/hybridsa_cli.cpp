// hybridsa: run experiments from a JSON config, verify chain files, list presets.
//
//   hybridsa run --config cfg.json [--out DIR] [--jobs N] [--seed-override S...]
//   hybridsa verify chain.json --preset rotation [--params '{"omega":1}'] [--tol 0.01]
//   hybridsa list-presets
//
// Exit codes: 0 success, 1 configuration or parse error, 2 runtime error
// (escape, overflow, horizon too short), 3 invalid chain.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridsa/hybridsa.hpp"
#include "hybridsa/io.hpp"

using namespace hybridsa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigFailure(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigFailure("unknown key '" + k + "' in " + where);
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

// ---------------------------------------------------------------------------
// Presets

Objective objective_from(const json& j) {
  check_keys(j, {"kind", "bound", "dim", "A"}, "annealing objective");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "double_well") return double_well(get_or(j, "bound", 2.0));
  if (kind == "rastrigin") return rastrigin(get_or<std::size_t>(j, "dim", 1), get_or(j, "A", 10.0), get_or(j, "bound", 5.12));
  throw ConfigFailure("unknown objective '" + kind + "'");
}

Preset preset_from(const json& sys, std::uint64_t seed) {
  if (sys.contains("product")) {
    check_keys(sys, {"product"}, "system");
    const auto& f = sys.at("product");
    if (!f.is_array() || f.size() < 2) throw ConfigFailure("product needs two or more systems");
    Preset p = preset_from(f[0], seed);
    for (std::size_t i = 1; i < f.size(); ++i) p = product_preset(p, preset_from(f[i], seed));
    return p;
  }
  check_keys(sys, {"preset", "params"}, "system");
  std::string name = sys.at("preset").get<std::string>();
  json params = sys.value("params", json::object());
  // "dwell(2,0.5)" is shorthand for dwell with N = 2, delta = 0.5.
  static const std::regex dwell_call(R"(dwell\(\s*(\d+)\s*,\s*([0-9.eE+-]+)\s*\))");
  std::smatch m;
  if (std::regex_match(name, m, dwell_call)) {
    params["N"] = std::stoi(m[1].str());
    params["delta"] = std::stod(m[2].str());
    name = "dwell";
  }
  const std::string where = name + " params";
  if (name == "cubic") {
    check_keys(params, {}, where);
    Preset p;
    p.name = "cubic";
    p.system = cubic_system();
    p.model = cubic_model<double>();
    p.policy = JumpPolicy::prefer_flow();
    p.x0 = {std::sqrt(3.0)};
    return p;
  }
  if (name == "cubic_reset") {
    check_keys(params, {"c", "N", "delta"}, where);
    return cubic_reset(get_or(params, "c", 2.0), get_or(params, "N", 1), get_or(params, "delta", 1.0));
  }
  if (name == "rotation") {
    check_keys(params, {"omega"}, where);
    return rotation(get_or(params, "omega", 1.0));
  }
  if (name == "decay") {
    check_keys(params, {"dim"}, where);
    return decay(get_or<std::size_t>(params, "dim", 1));
  }
  if (name == "two_well") {
    check_keys(params, {}, where);
    return two_well();
  }
  if (name == "dwell") {
    check_keys(params, {"N", "delta"}, where);
    return dwell(get_or(params, "N", 2), get_or(params, "delta", 0.5));
  }
  if (name == "annealing") {
    check_keys(params, {"objective", "N", "delta", "z_sigma", "clip_z", "ell"}, where);
    AnnealingConfig cfg;
    if (params.contains("objective")) cfg.objective = objective_from(params.at("objective"));
    cfg.N = get_or(params, "N", 2);
    cfg.delta = get_or(params, "delta", 0.5);
    cfg.z_sigma = get_or(params, "z_sigma", 1.0);
    cfg.clip_z = get_or(params, "clip_z", false);
    if (params.contains("ell")) {
      const auto& e = params.at("ell");
      check_keys(e, {"kind", "beta", "power"}, "annealing ell");
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "capped") {
        const double pw = get_or(e, "power", 1.0);
        cfg.ell = EllSchedule::capped(get_or(e, "beta", 1.0), [pw](int j) { return std::pow(j, -pw); });
      } else if (kind == "uncapped") {
        const double pw = get_or(e, "power", 0.0);
        cfg.ell = EllSchedule::uncapped([pw](int j) { return std::pow(j, -pw); });
      } else if (kind != "borel_cantelli") {
        throw ConfigFailure("unknown ell schedule '" + kind + "'");
      }
      if (const auto v = check_ell_decay(cfg); !v.vanishes)
        std::cerr << "warning: jump perturbations do not vanish (" << v.reason << "); not an asymptotic simulation\n";
    }
    cfg.seed = seed;
    return annealing(cfg);
  }
  throw ConfigFailure("unknown preset '" + name + "' (see list-presets)");
}

// ---------------------------------------------------------------------------
// Schedules, policies, noise

StepSchedule schedule_from(const json& j) {
  check_keys(j, {"kind", "a", "scale", "h", "steps"}, "schedule");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") return StepSchedule::power(j.at("a").get<double>(), get_or(j, "scale", 1.0));
  if (kind == "constant") return StepSchedule::constant(j.at("h").get<double>());
  if (kind == "list") return StepSchedule::list(j.at("steps").get<std::vector<double>>());
  throw ConfigFailure("unknown schedule kind '" + kind + "'");
}

JumpPolicy policy_from(const json& j, std::uint64_t seed) {
  check_keys(j, {"kind", "p"}, "policy");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "prefer_jump") return JumpPolicy::prefer_jump();
  if (kind == "prefer_flow") return JumpPolicy::prefer_flow();
  if (kind == "randomized") return JumpPolicy::randomized(get_or(j, "p", 0.5), seed);
  throw ConfigFailure("unknown policy '" + kind + "'");
}

struct NoiseSetup {
  NoiseModel flow = NoiseModel::bounded(0.0);
  std::optional<JumpNoiseModel> jump;
  bool active = false;
};

NoiseSetup noise_from(const json& j, const StepSchedule& schedule) {
  check_keys(j, {"kind", "radius", "sigma", "p", "rho", "jump_mode"}, "noise");
  NoiseSetup out;
  out.active = true;
  const std::string kind = j.at("kind").get<std::string>();
  const double p = get_or(j, "p", 1.0);
  BranchVerdict verdict;
  if (kind == "bounded") {
    out.flow = NoiseModel::bounded(j.at("radius").get<double>(), p);
    verdict = validate_moment_branch(schedule, p);
  } else if (kind == "gaussian") {
    out.flow = NoiseModel::gaussian(j.at("sigma").get<double>(), p);
    verdict = validate_subgaussian_branch(schedule, {out.flow.subgaussian_envelope()});
  } else {
    throw ConfigFailure("unknown noise kind '" + kind + "'");
  }
  if (!verdict.accept) {
    if (verdict.analytic) throw ConfigFailure("noise branch rejected: " + verdict.reason);
    std::cerr << "warning: noise branch not confirmed: " << verdict.reason << '\n';
  }
  if (j.contains("rho")) {
    const auto& r = j.at("rho");
    check_keys(r, {"kind", "param"}, "noise rho");
    const std::string rk = r.at("kind").get<std::string>();
    const double param = r.at("param").get<double>();
    RhoSequence rho = rk == "geometric" ? RhoSequence::geometric(param)
                      : rk == "power"   ? RhoSequence::power(param)
                      : rk == "constant" ? RhoSequence::constant(param)
                                         : throw ConfigFailure("unknown rho kind '" + rk + "'");
    JumpNoiseMode mode = rho.summable() ? JumpNoiseMode::SummableRho : JumpNoiseMode::DirectDecay;
    if (j.contains("jump_mode")) {
      const std::string m = j.at("jump_mode").get<std::string>();
      if (m == "summable") mode = JumpNoiseMode::SummableRho;
      else if (m == "direct") mode = JumpNoiseMode::DirectDecay;
      else throw ConfigFailure("jump_mode must be 'summable' or 'direct'");
    }
    out.jump = jump_noise_schedule(out.flow, rho, mode);
  }
  return out;
}

Horizon horizon_from(const json& j) {
  check_keys(j, {"max_k", "max_j", "max_length"}, "horizon");
  Horizon h;
  h.max_k = get_or(j, "max_k", h.max_k);
  h.max_j = get_or(j, "max_j", h.max_j);
  h.max_length = get_or(j, "max_length", h.max_length);
  return h;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw RuntimeFailure("cannot write " + p.string());
  f << j.dump(2) << '\n';
}

void write_run_dat(const fs::path& p, const SimulationResult<double>& r) {
  std::ofstream f(p);
  f << "# k j tau_k";
  for (std::size_t i = 0; i < r.dim(); ++i) f << " x_" << i;
  f << '\n';
  for (std::size_t idx = 0; idx < r.steps.size(); ++idx) {
    const auto [k, j] = r.steps[idx];
    f << k << ' ' << j << ' ' << io::num(r.tau[static_cast<std::size_t>(k)]);
    for (double v : r.states[idx]) f << ' ' << io::num(v);
    f << '\n';
  }
}

void write_points_dat(const fs::path& p, const std::vector<Vector>& pts, const std::string& header) {
  std::ofstream f(p);
  f << "# " << header << '\n';
  for (const auto& x : pts) {
    for (std::size_t i = 0; i < x.size(); ++i) f << (i ? " " : "") << io::num(x[i]);
    f << '\n';
  }
}

ReachOptions reach_from(const json& j, unsigned jobs) {
  ReachOptions o;
  o.net_radius = get_or(j, "net_radius", o.net_radius);
  o.tau = get_or(j, "tau", o.tau);
  o.eps = get_or(j, "eps", o.eps);
  o.internal = get_or(j, "internal", o.internal);
  o.variants = get_or(j, "variants", o.variants);
  o.extra_length = get_or(j, "extra_length", o.extra_length);
  o.dt = get_or(j, "dt", o.dt);
  o.budget = get_or(j, "budget", o.budget);
  o.jobs = jobs;
  return o;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string config;
  std::string out;
  unsigned jobs = 0;
  std::vector<std::uint64_t> seed_override;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFailure("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigFailure("config is not valid JSON: " + std::string(e.what()));
  }
  // A manifest carries the config it ran.
  if (j.contains("config") && j.contains("created")) j = j.at("config");
  return j;
}

int cmd_run(const RunArgs& args) {
  json cfg = load_config(args.config);
  check_keys(cfg, {"schema_version", "name", "system", "x0", "schedule", "policy", "noise", "horizon", "seeds",
                   "guard_eps", "analyses", "output"},
             "config");
  if (cfg.value("schema_version", 0) != io::kSchemaVersion)
    throw ConfigFailure("schema_version must be " + std::to_string(io::kSchemaVersion));
  for (const char* req : {"system", "schedule", "horizon"})
    if (!cfg.contains(req)) throw ConfigFailure(std::string("config needs '") + req + "'");
  if (!args.seed_override.empty()) cfg["seeds"] = args.seed_override;
  const auto seeds = get_or(cfg, "seeds", std::vector<std::uint64_t>{0});
  if (seeds.empty()) throw ConfigFailure("seeds must not be empty");

  const StepSchedule schedule = schedule_from(cfg.at("schedule"));
  const auto adm = check_admissible(schedule);
  if (!adm.admissible) {
    if (adm.analytic) throw ConfigFailure("inadmissible step schedule: " + adm.reason);
    std::cerr << "warning: step schedule not confirmed admissible: " << adm.reason << '\n';
  }
  const Horizon horizon = horizon_from(cfg.at("horizon"));
  const NoiseSetup noise = cfg.contains("noise") ? noise_from(cfg.at("noise"), schedule) : NoiseSetup{};
  const json analyses = cfg.value("analyses", json::array());
  if (!analyses.is_array()) throw ConfigFailure("analyses must be an array");
  for (const auto& a : analyses) {
    if (!a.is_object() || a.size() != 1) throw ConfigFailure("each analysis is an object with one key");
    check_keys(a, {"omega", "benaim", "chain", "recurrent", "tail"}, "analyses");
  }
  // Build every preset up front so configuration errors surface before any work.
  std::vector<Preset> presets;
  for (auto s : seeds) presets.push_back(preset_from(cfg.at("system"), s));
  Vector x0 = presets.front().x0;
  if (cfg.contains("x0")) {
    x0 = cfg.at("x0").get<Vector>();
    if (x0.size() != presets.front().system.dim) throw ConfigFailure("x0 has the wrong dimension");
  }
  NoisyOptions nopt;
  nopt.guard_eps = get_or(cfg, "guard_eps", 0.0);

  const std::string name = cfg.value("name", fs::path(args.config).stem().string());
  fs::path out;
  if (!args.out.empty()) out = args.out;
  else if (cfg.contains("output")) out = cfg.at("output").get<std::string>();
  else if (const char* env = std::getenv("HYBRIDSA_OUT")) out = fs::path(env) / name;
  else out = fs::path("hybridsa_out") / name;
  fs::create_directories(out / "runs");

  // Seeds fan out; analyses run after all runs are back.
  std::vector<std::uint64_t> order(seeds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto runs = monte_carlo(
      order,
      [&](std::uint64_t i) {
        const Vector start = cfg.contains("x0") ? x0 : presets[i].x0;
        const JumpPolicy pol = cfg.contains("policy") ? policy_from(cfg.at("policy"), seeds[i]) : presets[i].policy;
        return noisy_simulate(presets[i].model, start, schedule, noise.flow, noise.jump, seeds[i], horizon, pol, nopt);
      },
      args.jobs);

  std::vector<std::string> problems;
  json run_entries = json::array();
  for (const auto& run : runs) {
    const std::string stem = "seed_" + std::to_string(run.seed);
    {
      std::ofstream f(out / "runs" / (stem + ".csv"));
      io::write_result_csv(f, run.result);
    }
    write_run_dat(out / "runs" / (stem + ".dat"), run.result);
    json m = io::run_manifest(run.result, presets.front().name, run.seed, horizon);
    m["csv"] = "runs/" + stem + ".csv";
    if (!run.result.message.empty()) m["message"] = run.result.message;
    run_entries.push_back(m);
    if (run.result.status != RunStatus::Completed)
      problems.push_back("seed " + std::to_string(run.seed) + ": " + run.result.message);
  }

  json manifest = {{"schema_version", io::kSchemaVersion},
                   {"version", io::kVersion},
                   {"created", timestamp()},
                   {"config", cfg},
                   {"seeds", seeds},
                   {"runs", run_entries}};
  write_json(out / "manifest.json", manifest);

  const HybridSystem& system = presets.front().system;
  for (const auto& item : analyses) {
    const std::string kind = item.begin().key();
    const json& a = item.begin().value();
    try {
      if (kind == "omega") {
        check_keys(a, {"fractions", "eps", "max_cloud", "bound"}, "omega analysis");
        OmegaOptions o;
        o.fractions = get_or(a, "fractions", o.fractions);
        o.eps = get_or(a, "eps", o.eps);
        o.max_cloud = get_or(a, "max_cloud", o.max_cloud);
        o.bound = get_or(a, "bound", o.bound);
        json per = json::array();
        for (const auto& run : runs) {
          const auto est = omega_estimate(run.result, o);
          json trace = json::array();
          for (const auto& [th, d] : est.hausdorff_trace) trace.push_back({th, d});
          Vector max_abs(run.result.dim(), 0.0);
          for (const auto& x : est.points)
            for (std::size_t c = 0; c < x.size(); ++c) max_abs[c] = std::max(max_abs[c], std::abs(x[c]));
          json e = {{"seed", run.seed},
                    {"points", est.points.size()},
                    {"tail_threshold", est.tail_threshold},
                    {"length", est.length},
                    {"hausdorff_trace", trace},
                    {"converged", est.converged},
                    {"max_abs_coordinate", max_abs}};
          if (presets.front().name.rfind("cubic", 0) == 0) e["z_distance_to_0"] = max_abs[0];
          per.push_back(e);
          write_points_dat(out / ("omega_seed_" + std::to_string(run.seed) + ".dat"), est.points, "omega-limit points");
        }
        write_json(out / "omega.json", {{"schema_version", io::kSchemaVersion}, {"eps", o.eps}, {"runs", per}});
      } else if (kind == "benaim") {
        check_keys(a, {"T", "checkpoints"}, "benaim analysis");
        const auto tab = empirical_benaim_decay(runs, get_or(a, "T", 1.0),
                                                get_or(a, "checkpoints", std::vector<long>{10, 100, 1000}));
        write_json(out / "benaim.json", {{"schema_version", io::kSchemaVersion},
                                         {"T", get_or(a, "T", 1.0)},
                                         {"checkpoints", tab.checkpoints},
                                         {"per_seed", tab.per_seed},
                                         {"mean", tab.mean},
                                         {"decreasing", tab.decreasing},
                                         {"verdict", tab.verdict}});
        std::ofstream f(out / "benaim.dat");
        f << "# checkpoint mean\n";
        for (std::size_t i = 0; i < tab.checkpoints.size(); ++i) f << tab.checkpoints[i] << ' ' << io::num(tab.mean[i]) << '\n';
      } else if (kind == "chain") {
        check_keys(a, {"region", "from", "to", "tau", "eps", "net_radius", "internal", "variants", "extra_length", "dt",
                       "budget", "tol"},
                   "chain analysis");
        const SetRegion K = io::region_from_json(a.at("region"));
        const ReachOptions ro = reach_from(a, args.jobs);
        const ReachGraph g = build_reach_graph(system, K, ro);
        const auto search = find_chain(g, a.at("from").get<Vector>(), a.at("to").get<Vector>());
        json rep = {{"schema_version", io::kSchemaVersion},
                    {"nodes", g.nodes.size()},
                    {"edges", g.edges.size()},
                    {"partial", g.partial},
                    {"found", search.chain.has_value()},
                    {"message", search.message}};
        if (search.chain) {
          io::write_chain(out / "chain", "chain", *search.chain, a.at("region"));
          const auto v = verify_chain(*search.chain, system, ro.internal, get_or(a, "tol", 1e-2));
          rep["chain_file"] = "chain/chain.json";
          rep["links"] = search.chain->links.size();
          rep["verdict"] = io::verdict_to_json(v);
        }
        write_json(out / "chain.json", rep);
      } else if (kind == "recurrent") {
        check_keys(a, {"region", "tau", "eps", "net_radius", "internal", "variants", "extra_length", "dt", "budget",
                       "refine"},
                   "recurrent analysis");
        const SetRegion K = io::region_from_json(a.at("region"));
        const ReachOptions ro = reach_from(a, args.jobs);
        const ReachGraph g = build_reach_graph(system, K, ro);
        const auto est = chain_recurrent_estimate(g);
        std::vector<Vector> pts;
        for (auto i : est.nodes) pts.push_back(g.nodes[i]);
        std::vector<std::size_t> sizes;
        for (const auto& c : est.classes) sizes.push_back(c.size());
        json rep = {{"schema_version", io::kSchemaVersion}, {"nodes", g.nodes.size()},   {"edges", g.edges.size()},
                    {"partial", g.partial},                 {"recurrent", pts.size()},    {"classes", sizes}};
        if (get_or(a, "refine", false)) {
          const auto rr = refinement_sweep(system, K, ro);
          rep["refinement"] = {{"coarse_classes", rr.coarse.classes.size()},
                               {"fine_classes", rr.fine.classes.size()},
                               {"stability", rr.stability}};
        }
        write_json(out / "recurrent.json", rep);
        write_points_dat(out / "recurrent.dat", pts, "recurrent grid nodes");
      } else if (kind == "tail") {
        check_keys(a, {"T", "starts", "search_radius", "budget", "dt"}, "tail analysis");
        SolveOptions so;
        so.dt = get_or(a, "dt", 1e-2);
        const auto family = system_family(system, so);
        const double T = a.at("T").get<double>();
        json per = json::array();
        for (const auto& run : runs) {
          const HybridMapping graph = compress(run.result);
          const auto times = graph.times();
          std::vector<HybridTime> starts;
          for (double s : a.at("starts").get<std::vector<double>>()) {
            auto it = std::find_if(times.begin(), times.end(), [&](const HybridTime& h) { return h.length() >= s; });
            if (it == times.end()) throw HorizonError("tail start beyond the run's length");
            starts.push_back(*it);
          }
          json fits = json::array();
          for (const auto& f : tail_closeness_diagnostic(graph, family, T, starts, get_or(a, "search_radius", 0.5),
                                                         get_or<std::size_t>(a, "budget", 10000)))
            fits.push_back({{"t", f.start.t},
                            {"j", f.start.j},
                            {"eps", f.inconclusive ? json(nullptr) : json(f.eps)},
                            {"inconclusive", f.inconclusive},
                            {"candidates", f.candidates}});
          per.push_back({{"seed", run.seed}, {"fits", fits}});
        }
        write_json(out / "tail.json", {{"schema_version", io::kSchemaVersion}, {"T", T}, {"runs", per}});
      }
    } catch (const HorizonError& e) {
      problems.push_back(kind + ": " + e.what());
    } catch (const BoundednessError& e) {
      problems.push_back(kind + ": " + e.what());
    }
  }

  if (presets.front().name == "annealing") {
    const json& params = cfg.at("system").value("params", json::object());
    const Objective obj = params.contains("objective") ? objective_from(params.at("objective")) : double_well();
    json per = json::array();
    for (const auto& run : runs) {
      const Vector& xf = run.result.final_state();
      const Vector y(xf.begin(), xf.end() - 1);
      per.push_back({{"seed", run.seed},
                     {"y", y},
                     {"theta", obj.theta(y)},
                     {"critical_set_distance", critical_set_distance(y, obj)},
                     {"minimizer_distance", set_distance(y, obj.minimizers)}});
    }
    write_json(out / "objective.json", {{"schema_version", io::kSchemaVersion},
                                        {"objective", obj.name},
                                        {"critical_points", obj.critical_points},
                                        {"minimizers", obj.minimizers},
                                        {"runs", per}});
  }

  std::cout << "artifacts in " << out.string() << '\n';
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "runtime: " << p << '\n';
    return 2;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify, list-presets

int cmd_verify(const std::string& chain_path, const std::string& preset, const std::string& params, double tol) {
  json sys = {{"preset", preset}};
  if (!params.empty()) {
    try {
      sys["params"] = json::parse(params);
    } catch (const json::exception& e) {
      throw ConfigFailure("--params is not valid JSON: " + std::string(e.what()));
    }
  }
  const Preset p = preset_from(sys, 0);
  io::ChainFile cf;
  try {
    cf = io::read_chain(chain_path);
  } catch (const io::FormatError& e) {
    throw ConfigFailure(e.what());
  }
  const auto v = verify_chain(cf.chain, p.system, cf.internal, tol);
  std::cout << io::verdict_to_json(v).dump(2) << '\n';
  return v.valid ? 0 : 3;
}

int cmd_list_presets() {
  const std::vector<std::pair<std::string, std::string>> rows = {
      {"cubic", "{}  z' = -z^3, no jumps"},
      {"cubic_reset", R"({"c": 2, "N": 1, "delta": 1}  cubic flow with timer and saturated reset)"},
      {"rotation", R"({"omega": 1})"},
      {"decay", R"({"dim": 1}  x' = -x)"},
      {"two_well", "{}  x' = -4x(x^2 - 1)"},
      {"dwell(N,delta)", R"x({"N": 2, "delta": 0.5}  or the literal name "dwell(2,0.5)")x"},
      {"annealing", R"({"objective": {"kind": "double_well"|"rastrigin", ...}, "N": 2, "delta": 0.5, "z_sigma": 1, "clip_z": false, "ell": {"kind": "borel_cantelli"|"capped"|"uncapped", "beta", "power"}})"},
  };
  for (const auto& [n, d] : rows) std::cout << n << "  " << d << '\n';
  std::cout << R"(product  {"product": [system, system, ...]})" << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid stochastic approximation experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate and analyse from a JSON config");
  run->add_option("--config", run_args.config, "Config file (or a manifest.json)")->required();
  run->add_option("--out", run_args.out, "Output directory (default: $HYBRIDSA_OUT/<name>)");
  run->add_option("--jobs", run_args.jobs, "Parallel seeds and graph batches (0 = hardware)");
  run->add_option("--seed-override", run_args.seed_override, "Replace the config's seeds");

  std::string chain_path, preset, params;
  double tol = 1e-2;
  auto* verify = app.add_subcommand("verify", "Verify a chain file against a preset system");
  verify->add_option("chain", chain_path, "Chain JSON file")->required();
  verify->add_option("--preset", preset, "System preset name")->required();
  verify->add_option("--params", params, "Preset parameters as JSON");
  verify->add_option("--tol", tol, "Solution check tolerance");

  auto* list = app.add_subcommand("list-presets", "List system presets and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*verify) return cmd_verify(chain_path, preset, params, tol);
    if (*list) return cmd_list_presets();
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ScheduleError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const io::FormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
