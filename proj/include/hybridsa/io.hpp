#pragma once

// Text formats: arcs and run results as CSV, domains, chains and region
// descriptions as JSON. Doubles are written with %.17g so files round-trip.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridsa/analyze.hpp"
#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/sets.hpp"
#include "hybridsa/simulate.hpp"

namespace hybridsa::io {

using nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("trailing characters in number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("not a number: '" + s + "'");
  }
}

// ---------------------------------------------------------------------------
// Arcs and domains

/// Columns t, j, x_0..x_{d-1}; one row per sample.
inline void write_arc_csv(std::ostream& os, const HybridArc& arc) {
  const auto rows = arc.samples();
  const std::size_t d = rows.empty() ? 0 : rows.front().x.size();
  os << "t,j";
  for (std::size_t i = 0; i < d; ++i) os << ",x_" << i;
  os << '\n';
  for (const auto& r : rows) {
    os << num(r.t) << ',' << r.j;
    for (double v : r.x) os << ',' << num(v);
    os << '\n';
  }
}

inline HybridArc read_arc_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("arc CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "j") throw FormatError("arc CSV header must start with t,j,x_0");
  std::vector<GraphPoint> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw FormatError("arc CSV row has " + std::to_string(cells.size()) + " cells");
    GraphPoint p;
    p.t = parse_double(cells[0]);
    p.j = static_cast<int>(parse_double(cells[1]));
    for (std::size_t i = 2; i < cells.size(); ++i) p.x.push_back(parse_double(cells[i]));
    rows.push_back(std::move(p));
  }
  if (rows.empty()) throw FormatError("arc CSV has no rows");
  return HybridArc::from_samples(rows);
}

inline HybridArc read_arc_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_arc_csv(in);
}

inline void write_arc_csv(const std::filesystem::path& path, const HybridArc& arc) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_arc_csv(out, arc);
}

/// [[t_start, t_end, j], ...]; an unbounded last interval ends in null.
inline json domain_to_json(const HybridTimeDomain& d) {
  json out = json::array();
  for (const auto& iv : d.intervals()) {
    json e = json::array({iv.t_start, nullptr, iv.j});
    if (!std::isinf(iv.t_end)) e[1] = iv.t_end;
    out.push_back(e);
  }
  return out;
}

inline HybridTimeDomain domain_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw FormatError("domain must be a non-empty array");
  std::vector<TimeInterval> ivs;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw FormatError("domain entries are [t_start, t_end, j]");
    ivs.push_back({e[0].get<double>(), e[1].is_null() ? kInf : e[1].get<double>(), e[2].get<int>()});
  }
  return HybridTimeDomain(std::move(ivs));
}

// ---------------------------------------------------------------------------
// Simulation results

/// Columns k, j, tau_k, x_*, fhat_*, fsel_*. The f columns are filled on the
/// row (k, jbar_k) from which flow step k + 1 leaves and empty elsewhere.
inline void write_result_csv(std::ostream& os, const SimulationResult<double>& r) {
  const std::size_t d = r.dim();
  os << "k,j,tau_k";
  for (const char* p : {"x_", "fhat_", "fsel_"})
    for (std::size_t i = 0; i < d; ++i) os << ',' << p << i;
  os << '\n';
  for (std::size_t idx = 0; idx < r.steps.size(); ++idx) {
    const auto [k, j] = r.steps[idx];
    os << k << ',' << j << ',' << num(r.tau[static_cast<std::size_t>(k)]);
    for (double v : r.states[idx]) os << ',' << num(v);
    const bool flows = k < r.K() && r.jbar[static_cast<std::size_t>(k)] == j;
    for (const auto* vec : {&r.fhat, &r.fsel})
      for (std::size_t i = 0; i < d; ++i) {
        os << ',';
        if (flows) os << num((*vec)[static_cast<std::size_t>(k)][i]);
      }
    os << '\n';
  }
}

inline json schedule_to_json(const StepSchedule& s) {
  json j;
  switch (s.kind()) {
    case StepSchedule::Kind::Power:
      j = {{"kind", "power"}, {"a", s.exponent()}};
      if (s.scale() != 1.0) j["scale"] = s.scale();
      break;
    case StepSchedule::Kind::Constant: j = {{"kind", "constant"}, {"h", s.scale()}}; break;
    default: j = {{"kind", s.label()}}; break;
  }
  return j;
}

inline json run_manifest(const SimulationResult<double>& r, const std::string& system, std::uint64_t seed,
                         const Horizon& horizon) {
  json h = {{"max_k", horizon.max_k}, {"max_j", horizon.max_j}};
  if (!std::isinf(horizon.max_length)) h["max_length"] = horizon.max_length;
  return {{"system", system},
          {"schedule", schedule_to_json(r.schedule)},
          {"seed", seed},
          {"horizon", h},
          {"policy", r.policy},
          {"status", to_string(r.status)},
          {"K", r.K()},
          {"J", r.J()}};
}

// ---------------------------------------------------------------------------
// Regions

/// Parameters for the regions:: factories, e.g.
/// {"kind": "annulus", "center": [0, 0], "r_in": 0.5, "r_out": 1.5}.
inline SetRegion region_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw FormatError("region needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : j.items()) {
      bool ok = k == "kind";
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) throw FormatError("unknown key '" + k + "' in " + kind + " region");
    }
  };
  try {
    if (kind == "box") {
      allow({"lo", "hi"});
      return regions::box(j.at("lo").get<Vector>(), j.at("hi").get<Vector>());
    }
    if (kind == "ball") {
      allow({"center", "radius"});
      return regions::ball(j.at("center").get<Vector>(), j.at("radius").get<double>());
    }
    if (kind == "annulus") {
      allow({"center", "r_in", "r_out"});
      return regions::annulus(j.at("center").get<Vector>(), j.at("r_in").get<double>(), j.at("r_out").get<double>());
    }
    if (kind == "circle") {
      allow({"center", "radius"});
      return regions::circle(j.at("center").get<Vector>(), j.at("radius").get<double>());
    }
    if (kind == "everything") {
      allow({"dim"});
      return regions::everything(j.at("dim").get<std::size_t>());
    }
    if (kind == "product") {
      allow({"factors"});
      const auto& f = j.at("factors");
      if (!f.is_array() || f.size() < 2) throw FormatError("product region needs two or more factors");
      SetRegion r = region_from_json(f[0]);
      for (std::size_t i = 1; i < f.size(); ++i) r = regions::product(r, region_from_json(f[i]));
      return r;
    }
  } catch (const json::exception& e) {
    throw FormatError(kind + " region: " + e.what());
  }
  throw FormatError("unknown region kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Chains

/// Writes each link's arc to <stem>_link<k>.csv next to the chain file and
/// the chain itself to <stem>.json.
inline void write_chain(const std::filesystem::path& dir, const std::string& stem, const Chain& c,
                        const json& region = nullptr) {
  std::filesystem::create_directories(dir);
  json links = json::array();
  for (std::size_t k = 0; k < c.links.size(); ++k) {
    const std::string ref = stem + "_link" + std::to_string(k) + ".csv";
    write_arc_csv(dir / ref, c.links[k].arc);
    links.push_back({{"arc_ref", ref}, {"end", {c.links[k].end.t, c.links[k].end.j}}});
  }
  json out = {{"schema_version", kSchemaVersion},
              {"origin", c.origin},
              {"target", c.target},
              {"waypoints", c.waypoints},
              {"links", links},
              {"tau", c.tau},
              {"eps", c.eps},
              {"generalized", c.generalized},
              {"internal", c.region.has_value()}};
  if (!region.is_null()) out["region"] = region;
  std::ofstream f(dir / (stem + ".json"));
  if (!f) throw FormatError("cannot write chain file in " + dir.string());
  f << out.dump(2) << '\n';
}

struct ChainFile {
  Chain chain;
  bool internal = false;
};

/// Arc references resolve relative to the chain file's directory.
inline ChainFile read_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("chain file: " + std::string(e.what()));
  }
  ChainFile out;
  try {
    auto& c = out.chain;
    c.waypoints = j.at("waypoints").get<std::vector<Vector>>();
    if (c.waypoints.empty()) throw FormatError("chain has no waypoints");
    c.origin = j.contains("origin") ? j.at("origin").get<Vector>() : c.waypoints.front();
    c.target = j.contains("target") ? j.at("target").get<Vector>() : c.waypoints.back();
    c.tau = j.at("tau").get<double>();
    c.eps = j.at("eps").get<double>();
    c.generalized = j.value("generalized", false);
    out.internal = j.value("internal", false);
    if (j.contains("region")) c.region = region_from_json(j.at("region"));
    if (out.internal && !c.region) throw FormatError("internal chain without a region");
    for (const auto& l : j.at("links")) {
      const auto ref = path.parent_path() / l.at("arc_ref").get<std::string>();
      const auto& e = l.at("end");
      c.links.push_back({read_arc_csv(ref), HybridTime{e.at(0).get<double>(), e.at(1).get<int>()}});
    }
  } catch (const json::exception& e) {
    throw FormatError("chain file: " + std::string(e.what()));
  }
  return out;
}

inline json verdict_to_json(const ChainVerdict& v) {
  json w = json::array();
  for (const auto& x : v.witnesses) w.push_back({{"link", x.link}, {"what", x.what}, {"value", x.value}});
  return {{"schema_version", kSchemaVersion}, {"valid", v.valid}, {"witnesses", w}};
}

}  // namespace hybridsa::io
