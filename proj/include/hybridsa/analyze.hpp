#pragma once

// Limit-set analysis on finite data: omega-limit clouds, (tau, eps)-chains
// and their verification, reachability graphs over an eps-net with the
// strongly connected components as a chain-recurrence estimate, weak
// invariance probes and tail-closeness fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/linalg.hpp"
#include "hybridsa/presets.hpp"
#include "hybridsa/sets.hpp"
#include "hybridsa/simulate.hpp"
#include "hybridsa/system.hpp"

namespace hybridsa {

class BoundednessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Omega-limit estimation

struct OmegaEstimate {
  std::vector<Vector> points;  // values with t + j >= tail_threshold
  double tail_threshold = 0.0;
  std::vector<std::pair<double, double>> hausdorff_trace;  // (threshold, distance to the previous cloud)
  bool converged = false;  // the last two clouds agree within eps
  double eps = 0.0;
  double length = 0.0;
};

struct OmegaOptions {
  std::vector<double> fractions = {0.25, 0.5, 0.75, 0.9};  // of the final length
  std::vector<double> thresholds;                           // absolute; overrides fractions
  double eps = 0.05;
  std::size_t max_cloud = 4000;  // clouds are thinned by a fixed stride beyond this
  double bound = 1e12;           // |x| beyond this counts as unbounded
};

namespace detail {

inline std::vector<Vector> thin(const std::vector<Vector>& pts, std::size_t max_n) {
  if (pts.size() <= max_n) return pts;
  std::vector<Vector> out;
  const double stride = static_cast<double>(pts.size()) / static_cast<double>(max_n);
  for (std::size_t i = 0; i < max_n; ++i) out.push_back(pts[static_cast<std::size_t>(i * stride)]);
  out.push_back(pts.back());
  return out;
}

/// sup_{a in A} dist(a, B).
inline double directed_hausdorff(const std::vector<Vector>& A, const std::vector<Vector>& B) {
  double worst = 0.0;
  for (const auto& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : B) {
      best = std::min(best, linalg::distance(a, b));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff(const std::vector<Vector>& A, const std::vector<Vector>& B) {
  return std::max(directed_hausdorff(A, B), directed_hausdorff(B, A));
}

}  // namespace detail

/// Clouds S_n = values with t + j >= n at increasing thresholds; the last
/// one is the estimate and the trace shows how consecutive clouds settle.
inline OmegaEstimate omega_estimate(const std::vector<GraphPoint>& samples, const OmegaOptions& opt = {}) {
  if (samples.empty()) throw std::invalid_argument("omega estimate of an empty curve");
  OmegaEstimate est;
  est.eps = opt.eps;
  for (const auto& s : samples) {
    est.length = std::max(est.length, s.t + s.j);
    if (!linalg::all_finite(s.x) || linalg::norm(s.x) > opt.bound)
      throw BoundednessError("curve is unbounded (|x| exceeds " + std::to_string(opt.bound) + " at t + j = " +
                             std::to_string(s.t + s.j) + ")");
  }
  std::vector<double> th = opt.thresholds;
  if (th.empty())
    for (double f : opt.fractions) th.push_back(f * est.length);
  std::sort(th.begin(), th.end());
  if (th.empty()) throw std::invalid_argument("omega estimate needs at least one threshold");
  if (!(est.length > th.back()))
    throw HorizonError("domain length " + std::to_string(est.length) + " does not exceed the last threshold " +
                       std::to_string(th.back()));
  std::vector<Vector> prev;
  for (std::size_t i = 0; i < th.size(); ++i) {
    std::vector<Vector> cloud;
    for (const auto& s : samples)
      if (s.t + s.j >= th[i]) cloud.push_back(s.x);
    std::sort(cloud.begin(), cloud.end());
    cloud.erase(std::unique(cloud.begin(), cloud.end()), cloud.end());
    cloud = detail::thin(cloud, opt.max_cloud);
    if (i > 0) est.hausdorff_trace.push_back({th[i], detail::hausdorff(prev, cloud)});
    prev = std::move(cloud);
  }
  est.points = std::move(prev);
  est.tail_threshold = th.back();
  est.converged = est.hausdorff_trace.empty() || est.hausdorff_trace.back().second <= opt.eps;
  return est;
}

inline OmegaEstimate omega_estimate(const HybridArc& arc, const OmegaOptions& opt = {}) {
  return omega_estimate(arc.samples(), opt);
}

inline OmegaEstimate omega_estimate(const HybridMapping& m, const OmegaOptions& opt = {}) {
  return omega_estimate(m.points(), opt);
}

/// Uses the compressed times (tau_k, j) of a simulated sequence.
template <class S>
OmegaEstimate omega_estimate(const SimulationResult<S>& r, const OmegaOptions& opt = {}) {
  return omega_estimate(compress(r).points(), opt);
}

/// max over cloud points of |x_c|, for one coordinate c.
inline double coordinate_extent(const OmegaEstimate& est, std::size_t c) {
  double m = 0.0;
  for (const auto& p : est.points) m = std::max(m, std::abs(p.at(c)));
  return m;
}

// ---------------------------------------------------------------------------
// Chains

/// A candidate chain from `origin` to `target`: link k is an arc starting at
/// waypoints[k] and cut at links[k].end, whose value there lies within eps of
/// waypoints[k + 1]. In generalized mode waypoints[0] only needs to be within
/// eps of the origin.
struct Chain {
  Vector origin;
  Vector target;
  std::vector<Vector> waypoints;
  std::vector<ArcLink> links;
  double tau = 1.0;
  double eps = 0.1;
  bool generalized = false;
  std::optional<SetRegion> region;  // K for internal chains
};

struct ChainWitness {
  long link = -1;  // -1 for chain-level failures
  std::string what;
  double value = 0.0;
};

struct ChainVerdict {
  bool valid = true;
  std::vector<ChainWitness> witnesses;
};

inline ChainVerdict verify_chain(const Chain& chain, const HybridSystem& system, bool internal, double sol_tol) {
  ChainVerdict v;
  auto fail = [&](long link, std::string what, double value) {
    v.valid = false;
    v.witnesses.push_back({link, std::move(what), value});
  };
  const auto& W = chain.waypoints;
  if (chain.links.empty() || W.size() != chain.links.size() + 1) {
    fail(-1, "structure: need k >= 1 links and k + 1 waypoints", static_cast<double>(W.size()));
    return v;
  }
  auto same = [](const Vector& a, const Vector& b) {
    return a.size() == b.size() && linalg::distance(a, b) <= 1e-12 * (1.0 + linalg::norm(a));
  };
  if (chain.generalized) {
    const double d = linalg::distance(W.front(), chain.origin);
    if (d > chain.eps) fail(-1, "first waypoint farther than eps from the origin", d);
  } else if (!same(W.front(), chain.origin)) {
    fail(-1, "first waypoint differs from the origin", linalg::distance(W.front(), chain.origin));
  }
  if (!same(W.back(), chain.target)) fail(-1, "last waypoint differs from the target", linalg::distance(W.back(), chain.target));
  if (internal && !chain.region) fail(-1, "internal mode without a region", 0.0);
  for (std::size_t k = 0; k < chain.links.size(); ++k) {
    const auto& link = chain.links[k];
    const long kk = static_cast<long>(k);
    if (link.arc.empty()) {
      fail(kk, "empty arc", 0.0);
      continue;
    }
    const Vector start = link.arc.value({0.0, 0});
    if (!same(start, W[k])) fail(kk, "arc does not start at its waypoint", linalg::distance(start, W[k]));
    if (!link.arc.contains(link.end)) {
      fail(kk, "end time " + to_string(link.end) + " not in the arc's domain", link.end.length());
      continue;
    }
    if (link.end.length() < chain.tau) fail(kk, "link shorter than tau", link.end.length());
    const Vector endv = link.arc.value(link.end);
    const double gap = linalg::distance(endv, W[k + 1]);
    if (gap > chain.eps) fail(kk, "next waypoint farther than eps from the link end", gap);
    const HybridArc used = truncate_at(link.arc, link.end);
    const auto rep = verify_solution(used, system, sol_tol);
    if (!rep.pass) fail(kk, "not a solution: " + rep.message, rep.worst);
    if (internal && chain.region) {
      for (const auto& s : used.samples())
        if (!chain.region->contains(s.x)) {
          fail(kk, "leaves K at t + j = " + std::to_string(s.t + s.j), s.t + s.j);
          break;
        }
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Reachability graphs

struct ReachOptions {
  double net_radius = 0.1;
  double tau = 1.0;
  double eps = 0.2;
  bool internal = false;
  std::size_t variants = 4;   // policy x selection combinations per node
  double extra_length = 0.0;  // simulate up to tau + extra_length (default: tau + 1)
  double dt = 1e-2;
  std::size_t budget = 1'000'000;  // total simulations
  unsigned jobs = 0;
};

struct ReachEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t variant = 0;
  HybridTime end;  // first time with t + j >= tau within eps of the target node
};

struct ReachGraph {
  std::vector<Vector> nodes;
  std::vector<std::vector<std::size_t>> adjacency;  // sorted successor lists
  std::vector<ReachEdge> edges;                     // one witness per (from, to)
  ReachOptions options;
  HybridSystem system;
  std::optional<SetRegion> region;
  bool partial = false;
};

namespace detail {

/// Spatial hash of points with cell size h for radius queries.
class PointIndex {
 public:
  PointIndex(const std::vector<Vector>& pts, double h) : pts_(pts), h_(h > 0.0 ? h : 1.0) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
  }

  template <class Fn>
  void within(const Vector& x, double r, Fn fn) const {
    if (pts_.empty()) return;
    const std::size_t d = x.size();
    const int reach = static_cast<int>(std::ceil(r / h_));
    std::vector<long> base = key(x);
    std::vector<int> off(d, -reach);
    while (true) {
      std::vector<long> k = base;
      for (std::size_t c = 0; c < d; ++c) k[c] += off[c];
      if (auto it = cells_.find(k); it != cells_.end())
        for (std::size_t i : it->second)
          if (linalg::distance(pts_[i], x) <= r) fn(i);
      std::size_t c = 0;
      while (c < d && ++off[c] > reach) off[c++] = -reach;
      if (c == d) break;
    }
  }

 private:
  std::vector<long> key(const Vector& x) const {
    std::vector<long> k(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) k[c] = static_cast<long>(std::floor(x[c] / h_));
    return k;
  }

  const std::vector<Vector>& pts_;
  double h_;
  std::map<std::vector<long>, std::vector<std::size_t>> cells_;
};

inline SolveOptions variant_options(const ReachOptions& o, std::size_t variant) {
  SolveOptions s;
  s.dt = o.dt;
  s.max_length = o.tau + (o.extra_length > 0.0 ? o.extra_length : 1.0);
  s.policy = variant % 2 == 0 ? JumpPolicy::prefer_jump() : JumpPolicy::prefer_flow();
  s.selection_index = variant / 2;
  return s;
}

/// Visits samples of `arc` with t + j >= tau; stops early once fn returns false
/// or (internal mode) the arc leaves K.
template <class Fn>
void scan_arc(const HybridArc& arc, double tau, const std::optional<SetRegion>& K, Fn fn) {
  for (const auto& s : arc.samples()) {
    if (K && !K->contains(s.x)) return;
    if (s.t + s.j >= tau && !fn(s)) return;
  }
}

}  // namespace detail

/// Replays the solution behind an edge.
inline HybridArc witness_arc(const ReachGraph& g, const ReachEdge& e) {
  return truncate_at(solve(g.system, g.nodes[e.from], detail::variant_options(g.options, e.variant)), e.end);
}

/// Nodes: grid points of K with spacing net_radius. Edge u -> v when a
/// simulated solution from u passes within eps of v at hybrid length >= tau
/// (staying in K up to there in internal mode).
inline ReachGraph build_reach_graph(const HybridSystem& system, const SetRegion& K, const ReachOptions& opt) {
  ReachGraph g;
  g.options = opt;
  g.system = system;
  g.region = K;
  if (!K.bounding_box() || !K.bounding_box()->finite()) throw std::invalid_argument("reach graph needs a bounded K");
  g.nodes = K.grid(opt.net_radius);
  const std::size_t n = g.nodes.size();
  g.adjacency.assign(n, {});
  if (n == 0) return g;
  const std::size_t sims = n * std::max<std::size_t>(1, opt.variants);
  std::size_t nodes_done = n;
  if (sims > opt.budget) {
    g.partial = true;
    nodes_done = opt.budget / std::max<std::size_t>(1, opt.variants);
  }
  const detail::PointIndex index(g.nodes, opt.eps);
  const std::optional<SetRegion> inside = opt.internal ? std::optional<SetRegion>(K) : std::nullopt;
  auto work = [&](std::size_t u) {
    std::map<std::size_t, ReachEdge> found;
    for (std::size_t v = 0; v < std::max<std::size_t>(1, opt.variants); ++v) {
      const HybridArc arc = solve(system, g.nodes[u], detail::variant_options(opt, v));
      if (!K.contains(g.nodes[u])) continue;
      detail::scan_arc(arc, opt.tau, inside, [&](const GraphPoint& s) {
        index.within(s.x, opt.eps, [&](std::size_t w) {
          if (!found.count(w)) found[w] = ReachEdge{u, w, v, {s.t, s.j}};
        });
        return true;
      });
    }
    return found;
  };
  unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::map<std::size_t, ReachEdge>> results(nodes_done);
  std::size_t next = 0;
  while (next < nodes_done) {
    std::vector<std::future<void>> batch;
    for (unsigned t = 0; t < jobs && next < nodes_done; ++t, ++next) {
      const std::size_t u = next;
      batch.push_back(std::async(std::launch::async, [&, u] { results[u] = work(u); }));
    }
    for (auto& f : batch) f.get();
  }
  for (std::size_t u = 0; u < nodes_done; ++u)
    for (auto& [w, e] : results[u]) {
      g.adjacency[u].push_back(w);
      g.edges.push_back(e);
    }
  return g;
}

inline const ReachEdge* find_edge(const ReachGraph& g, std::size_t u, std::size_t w) {
  for (const auto& e : g.edges)
    if (e.from == u && e.to == w) return &e;
  return nullptr;
}

struct RecurrenceEstimate {
  std::vector<std::size_t> nodes;                 // nodes on some directed cycle
  std::vector<std::vector<std::size_t>> classes;  // the recurrent strongly connected components
};

/// Tarjan's algorithm; a component counts when it has two or more nodes or a self-loop.
inline RecurrenceEstimate chain_recurrent_estimate(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<long> index(n, -1);
  std::vector<long> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  long counter = 0;
  RecurrenceEstimate est;
  // Iterative DFS: frames hold (node, next successor position).
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [u, pos] = frames.back();
      if (pos < adj[u].size()) {
        const std::size_t w = adj[u][pos++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[u] = std::min(low[u], index[w]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != u);
        const bool self_loop = std::find(adj[u].begin(), adj[u].end(), u) != adj[u].end();
        if (comp.size() > 1 || self_loop) {
          std::sort(comp.begin(), comp.end());
          est.classes.push_back(std::move(comp));
        }
      }
      const std::size_t done = u;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
    }
  }
  for (const auto& c : est.classes) est.nodes.insert(est.nodes.end(), c.begin(), c.end());
  std::sort(est.nodes.begin(), est.nodes.end());
  std::sort(est.classes.begin(), est.classes.end());
  return est;
}

inline RecurrenceEstimate chain_recurrent_estimate(const ReachGraph& g) { return chain_recurrent_estimate(g.adjacency); }

struct RefinementReport {
  RecurrenceEstimate coarse;
  RecurrenceEstimate fine;
  std::size_t coarse_nodes = 0;
  std::size_t fine_nodes = 0;
  double stability = 0.0;  // fraction of fine recurrent nodes within eps of a coarse recurrent node
};

/// Rebuilds the graph with eps and net_radius halved and compares the estimates.
inline RefinementReport refinement_sweep(const HybridSystem& sys, const SetRegion& K, ReachOptions opt) {
  RefinementReport rep;
  const ReachGraph a = build_reach_graph(sys, K, opt);
  rep.coarse = chain_recurrent_estimate(a);
  rep.coarse_nodes = a.nodes.size();
  opt.eps /= 2.0;
  opt.net_radius /= 2.0;
  const ReachGraph b = build_reach_graph(sys, K, opt);
  rep.fine = chain_recurrent_estimate(b);
  rep.fine_nodes = b.nodes.size();
  std::size_t near = 0;
  for (std::size_t i : rep.fine.nodes) {
    for (std::size_t c : rep.coarse.nodes)
      if (linalg::distance(b.nodes[i], a.nodes[c]) <= 2.0 * opt.eps) {
        ++near;
        break;
      }
  }
  rep.stability = rep.fine.nodes.empty() ? 1.0 : static_cast<double>(near) / static_cast<double>(rep.fine.nodes.size());
  return rep;
}

struct ChainSearch {
  std::optional<Chain> chain;
  std::size_t reachable = 0;  // nodes reached from the start set
  std::size_t start_nodes = 0;
  std::string message;
};

/// Shortest-hop path from a node within eps of x to a node whose solution
/// passes within eps of y, returned as a generalized chain with replayed witness arcs.
inline ChainSearch find_chain(const ReachGraph& g, const Vector& x, const Vector& y) {
  ChainSearch out;
  const auto& opt = g.options;
  const std::size_t n = g.nodes.size();
  std::vector<long> parent(n, -2);
  std::deque<std::size_t> queue;
  for (std::size_t u = 0; u < n; ++u)
    if (linalg::distance(g.nodes[u], x) <= opt.eps) {
      parent[u] = -1;
      queue.push_back(u);
      ++out.start_nodes;
    }
  if (queue.empty()) {
    out.message = "no node within eps of the start point";
    return out;
  }
  const std::optional<SetRegion> inside = opt.internal ? g.region : std::nullopt;
  auto final_link = [&](std::size_t u) -> std::optional<ArcLink> {
    for (std::size_t v = 0; v < std::max<std::size_t>(1, opt.variants); ++v) {
      const HybridArc arc = solve(g.system, g.nodes[u], detail::variant_options(opt, v));
      std::optional<HybridTime> hit;
      detail::scan_arc(arc, opt.tau, inside, [&](const GraphPoint& s) {
        if (linalg::distance(s.x, y) <= opt.eps) {
          hit = HybridTime{s.t, s.j};
          return false;
        }
        return true;
      });
      if (hit) return ArcLink{truncate_at(arc, *hit), *hit};
    }
    return std::nullopt;
  };
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    ++out.reachable;
    if (auto last = final_link(u)) {
      std::vector<std::size_t> path{u};
      while (parent[path.back()] >= 0) path.push_back(static_cast<std::size_t>(parent[path.back()]));
      std::reverse(path.begin(), path.end());
      Chain c;
      c.origin = x;
      c.target = y;
      c.tau = opt.tau;
      c.eps = opt.eps;
      c.generalized = true;
      if (opt.internal) c.region = g.region;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const ReachEdge* e = find_edge(g, path[i], path[i + 1]);
        c.waypoints.push_back(g.nodes[path[i]]);
        c.links.push_back({witness_arc(g, *e), e->end});
      }
      c.waypoints.push_back(g.nodes[path.back()]);
      c.links.push_back(std::move(*last));
      c.waypoints.push_back(y);
      out.chain = std::move(c);
      out.message = "chain with " + std::to_string(out.chain->links.size()) + " links";
      return out;
    }
    for (std::size_t w : g.adjacency[u])
      if (parent[w] == -2) {
        parent[w] = static_cast<long>(u);
        queue.push_back(w);
      }
  }
  out.message = "no chain: " + std::to_string(out.reachable) + " nodes reachable from " +
                std::to_string(out.start_nodes) + " start nodes, none reaches the target";
  return out;
}

// ---------------------------------------------------------------------------
// Weak invariance

struct InvarianceProbe {
  Vector x;
  bool success = false;
  std::size_t tried = 0;
  double worst_exit = 0.0;  // largest distance to K along the best attempt
};

struct InvarianceReport {
  bool all = true;
  std::vector<InvarianceProbe> probes;
};

/// For each sample, looks for a solution that stays in K + tol for hybrid length T.
inline InvarianceReport weak_invariance_probe(const HybridSystem& sys, const SetRegion& K,
                                              const std::vector<Vector>& samples, double T, double tol,
                                              std::size_t variants = 4, double dt = 1e-2) {
  InvarianceReport rep;
  for (const auto& x : samples) {
    InvarianceProbe p;
    p.x = x;
    p.worst_exit = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < variants && !p.success; ++v) {
      ReachOptions ro;
      ro.dt = dt;
      ro.tau = T;
      ro.extra_length = 1e-300;
      SolveOptions so = detail::variant_options(ro, v);
      so.max_length = T;
      const HybridArc arc = solve(sys, x, so);
      ++p.tried;
      double worst = 0.0;
      for (const auto& s : arc.samples()) worst = std::max(worst, K.contains(s.x) ? 0.0 : K.distance(s.x));
      p.worst_exit = std::min(p.worst_exit, worst);
      if (worst <= tol && arc.length() >= T - 1e-9) p.success = true;
    }
    rep.all = rep.all && p.success;
    rep.probes.push_back(std::move(p));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Tail closeness

struct TailFit {
  HybridTime start;
  double eps = std::numeric_limits<double>::infinity();
  bool inconclusive = false;
  std::size_t candidates = 0;
};

/// For each start (s, i), the smallest eps over candidate solutions psi with
/// psi and the tail of the curve (T, eps)-close and psi(0, 0) within eps of
/// a value of the curve at (s, i).
inline std::vector<TailFit> tail_closeness_diagnostic(const HybridMapping& curve, const SolutionFamily& family,
                                                      double T, const std::vector<HybridTime>& starts,
                                                      double search_radius = 0.5, std::size_t budget = 10'000) {
  std::vector<TailFit> out;
  for (const auto& st : starts) {
    TailFit fit;
    fit.start = st;
    // Points up to length T are checked; their matches may lie a little beyond.
    const HybridMapping tl = curve.tail(st).truncate(T + 1.0);
    const detail::GraphIndex tl_index(tl);
    std::size_t used = 0;
    for (const auto& x0 : curve.values_at(st)) {
      for (const auto& psi : family.candidates(x0, search_radius, T + 1.0)) {
        if (used++ >= budget) break;
        ++fit.candidates;
        const Vector p0 = psi.value({0.0, 0});
        double d0 = std::numeric_limits<double>::infinity();
        for (const auto& v : curve.values_at(st)) d0 = std::min(d0, linalg::distance(p0, v));
        if (d0 >= fit.eps) continue;
        const HybridMapping pg = psi.graph();
        const double d1 = detail::directed_distance_bounded(pg, tl_index, T, fit.eps);
        if (d1 >= fit.eps) continue;
        const double d2 = detail::directed_distance_bounded(tl, detail::GraphIndex(pg), T, fit.eps);
        fit.eps = std::min(fit.eps, std::max({d0, d1, d2}));
      }
    }
    fit.inconclusive = fit.candidates == 0;
    out.push_back(fit);
  }
  return out;
}

}  // namespace hybridsa
