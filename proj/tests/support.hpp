#pragma once

// Shared test helpers: random arcs and graphs, and oracles written
// independently of the library code they check.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hybridsa/hybridsa.hpp"

namespace testing_support {

using namespace hybridsa;

/// Arc with 1..5 intervals; about a third are degenerate (pure jumps).
inline HybridArc random_arc(std::mt19937_64& g, std::size_t dim = 2) {
  std::uniform_int_distribution<int> nint(1, 5);
  std::uniform_real_distribution<double> len(0.2, 3.0);
  std::uniform_real_distribution<double> step(0.05, 0.6);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> walk(0.0, 0.3);
  const int n = nint(g);
  std::vector<HybridArc::Piece> pieces;
  double t0 = 0.0;
  Vector x(dim);
  for (auto& c : x) c = walk(g) * 3.0;
  for (int j = 0; j < n; ++j) {
    HybridArc::Piece p;
    const double L = (j > 0 && coin(g) < 0.33) ? 0.0 : len(g);
    const double dt = step(g);
    const double t1 = t0 + L;
    for (double t = t0; t < t1 - 1e-6; t += dt) {
      p.t.push_back(t);
      for (auto& c : x) c += walk(g);
      p.x.push_back(x);
    }
    p.t.push_back(t1);
    for (auto& c : x) c += walk(g);
    p.x.push_back(x);
    pieces.push_back(std::move(p));
    for (auto& c : x) c += 5.0 * walk(g);  // jump
    t0 = t1;
  }
  return HybridArc::from_pieces(std::move(pieces));
}

/// A domain point: a sample time half of the time, otherwise uniform in an interval.
inline HybridTime random_point(std::mt19937_64& g, const HybridArc& arc) {
  const auto dom = arc.domain();
  std::uniform_int_distribution<int> pick_j(0, dom.last_j());
  const int j = pick_j(g);
  const auto& iv = dom.intervals()[static_cast<std::size_t>(j)];
  if (std::uniform_real_distribution<double>(0.0, 1.0)(g) < 0.5) {
    std::vector<double> ts;
    for (const auto& s : arc.samples())
      if (s.j == j) ts.push_back(s.t);
    return {ts[std::uniform_int_distribution<std::size_t>(0, ts.size() - 1)(g)], j};
  }
  return {std::uniform_real_distribution<double>(iv.t_start, iv.t_end)(g), j};
}

inline bool near(const Vector& a, const Vector& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol * (1.0 + std::abs(a[i]))) return false;
  return true;
}

inline bool same_samples(const std::vector<GraphPoint>& a, const std::vector<GraphPoint>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].j != b[i].j || std::abs(a[i].t - b[i].t) > tol * (1.0 + std::abs(a[i].t))) return false;
    if (!near(a[i].x, b[i].x, tol)) return false;
  }
  return true;
}

/// Runs `cases` randomized domain-algebra checks; returns a description of each failure.
inline std::vector<std::string> domain_algebra_failures(std::uint64_t seed, int cases) {
  std::mt19937_64 g(seed);
  std::vector<std::string> fails;
  auto fail = [&](int c, const std::string& what) { fails.push_back("case " + std::to_string(c) + ": " + what); };
  for (int c = 0; c < cases; ++c) {
    try {
      const HybridArc arc = random_arc(g, 1 + static_cast<std::size_t>(c % 3));
      const auto rows = arc.samples();
      // Tail identity.
      if (tail(arc, {0.0, 0}).samples() != rows) fail(c, "tail at (0,0) is not the identity");
      // Tail composition.
      const HybridTime a = random_point(g, arc);
      const HybridArc ta = tail(arc, a);
      const HybridTime b = random_point(g, ta);
      const HybridArc lhs = tail(ta, b);
      const HybridArc rhs = tail(arc, {a.t + b.t, a.j + b.j});
      if (!same_samples(lhs.samples(), rhs.samples(), 1e-12) || lhs.domain().last_j() != rhs.domain().last_j())
        fail(c, "tail composition");
      // Truncation is a no-op at the full length.
      if (truncate(arc, arc.length()).samples() != rows) fail(c, "truncate at the length changed the arc");
      // Truncate / concatenate round trip, with length additivity.
      const HybridTime p = random_point(g, arc);
      const HybridArc head = truncate_at(arc, p);
      const HybridArc rest = tail(arc, p);
      const HybridArc joined = concatenate(head, rest, p);
      // The cut point becomes a node of the joined arc; everything else is untouched.
      std::vector<GraphPoint> expected = rows;
      const bool on_node = std::any_of(rows.begin(), rows.end(), [&](const GraphPoint& q) { return q.t == p.t && q.j == p.j; });
      if (!on_node) {
        const auto at = std::find_if(rows.begin(), rows.end(), [&](const GraphPoint& q) {
          return q.j > p.j || (q.j == p.j && q.t > p.t);
        });
        expected.insert(expected.begin() + (at - rows.begin()), GraphPoint{p.t, p.j, arc.value(p)});
      }
      if (joined.samples() != expected) fail(c, "truncate/concat round trip");
      if (std::abs(joined.length() - (p.t + p.j + rest.length())) > 1e-9) fail(c, "concatenation length additivity");
      // Staircase invariant of the domain intervals.
      const auto dom = arc.domain();
      for (std::size_t k = 0; k + 1 < dom.intervals().size(); ++k)
        if (dom.intervals()[k].t_end != dom.intervals()[k + 1].t_start || dom.intervals()[k + 1].j != dom.intervals()[k].j + 1)
          fail(c, "domain intervals do not chain");
      // split_long: segment lengths and exact reconstruction.
      const double L = arc.length();
      const double tau = std::uniform_real_distribution<double>(0.05, 0.95)(g) * L;
      const auto segs = split_long(arc, tau);
      for (std::size_t k = 0; k < segs.size(); ++k) {
        const double sl = segs[k].length();
        if (sl < tau - 1e-9 || sl >= 2.0 * tau + 1.0) fail(c, "segment length " + std::to_string(sl) + " outside [tau, 2tau+1)");
      }
      if (join_segments(segs).samples() != rows) fail(c, "split_long segments do not rebuild the arc exactly");
      // Random staircase sequence domains are accepted; a diagonal step is rejected.
      std::vector<HybridSequenceDomain::Step> steps{{0, 0}};
      for (int s = 0; s < 20; ++s) {
        auto st = steps.back();
        if (g() % 2) ++st.k; else ++st.j;
        steps.push_back(st);
      }
      HybridSequenceDomain ok(steps);
      auto bad = steps;
      bad.push_back({bad.back().k + 1, bad.back().j + 1});
      bool threw = false;
      try {
        HybridSequenceDomain broken(bad);
      } catch (const DomainError&) {
        threw = true;
      }
      if (!threw) fail(c, "diagonal step accepted in a sequence domain");
    } catch (const std::exception& e) {
      fail(c, std::string("exception: ") + e.what());
    }
  }
  return fails;
}

// ---------------------------------------------------------------------------
// Graph oracles

inline std::vector<std::vector<std::size_t>> random_graph(std::mt19937_64& g, std::size_t n, double p) {
  std::vector<std::vector<std::size_t>> adj(n);
  std::bernoulli_distribution edge(p);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (edge(g)) adj[u].push_back(v);
  return adj;
}

/// Node u lies on a directed cycle iff u is reachable from one of its successors.
inline std::vector<std::size_t> brute_force_cyclic(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack(adj[u].begin(), adj[u].end());
    bool cyc = false;
    while (!stack.empty() && !cyc) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == u) cyc = true;
      if (seen[v]) continue;
      seen[v] = true;
      for (std::size_t w : adj[v]) stack.push_back(w);
    }
    if (cyc) out.push_back(u);
  }
  return out;
}

/// Brute-force classes: u ~ v iff each reaches the other; keep classes on cycles.
inline std::vector<std::vector<std::size_t>> brute_force_classes(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v : adj[u]) reach[u][v] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<std::vector<std::size_t>> classes;
  std::vector<bool> used(n, false);
  for (std::size_t u = 0; u < n; ++u) {
    if (used[u] || !reach[u][u]) continue;
    std::vector<std::size_t> c;
    for (std::size_t v = 0; v < n; ++v)
      if (reach[u][v] && reach[v][u]) {
        c.push_back(v);
        used[v] = true;
      }
    classes.push_back(c);
  }
  std::sort(classes.begin(), classes.end());
  return classes;
}

// ---------------------------------------------------------------------------
// Numeric oracles

/// z_{k+1} = z_k - k^{-0.75}-indexed Euler recursion for z' = -z^3, written out directly.
template <class S>
std::vector<S> cubic_recursion(S z0, int n) {
  std::vector<S> z{z0};
  for (int k = 1; k <= n; ++k) {
    const S h = pow(S(k), S(-0.75));
    const S cube = z.back() * z.back() * z.back();
    z.push_back(z.back() - h * cube);
  }
  return z;
}

/// Integral of U = f_k - fhat_{k+1} over [s, t] with Gauss-Kronrod on each
/// step interval; U is looked up by time.
inline Vector chi_quadrature(const SimulationResult<double>& r, double s, double t) {
  const std::size_t d = r.dim();
  Vector out(d, 0.0);
  auto U = [&](double x, std::size_t c) {
    const auto k = static_cast<std::size_t>(std::upper_bound(r.tau.begin(), r.tau.end(), x) - r.tau.begin()) - 1;
    return r.fsel[k][c] - r.fhat[k][c];
  };
  for (std::size_t k = 0; k + 1 < r.tau.size(); ++k) {
    const double a = std::max(s, r.tau[k]);
    const double b = std::min(t, r.tau[k + 1]);
    if (!(b > a)) continue;
    for (std::size_t c = 0; c < d; ++c) {
      // Integrate strictly inside the step so the lookup stays on step k.
      const double mid = 0.5 * (a + b);
      const double half = 0.5 * (b - a);
      out[c] += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [&](double u) { return U(mid + half * u * (1.0 - 1e-12), c); }, -1.0, 1.0, 0, 0) * half;
    }
  }
  return out;
}

/// All ordered pairs (s, i) <= (t, j) of a compressed domain satisfy j - i <= delta (t - s) + N (+ tol).
inline double dwell_worst_excess(const std::vector<std::pair<double, int>>& pts, double N, double delta) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a; b < pts.size(); ++b) {
      const auto [s, i] = pts[a];
      const auto [t, j] = pts[b];
      if (t < s || j < i) continue;
      worst = std::max(worst, (j - i) - (delta * (t - s) + N));
    }
  return worst;
}

}  // namespace testing_support
