#pragma once

// Hybrid time domains, hybrid sequence domains, sampled hybrid arcs and
// set-valued hybrid mappings, together with their algebra: tails,
// truncations, concatenations, splitting into bounded-length segments and
// (T, eps)-closeness of graphs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsa/linalg.hpp"

namespace hybridsa {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConcatenationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point (t, j) of a hybrid time domain.
struct HybridTime {
  double t = 0.0;
  int j = 0;

  double length() const { return t + j; }
  friend bool operator==(const HybridTime&, const HybridTime&) = default;
};

/// Total order used for all length comparisons: by t + j, ties broken by j.
inline bool precedes(const HybridTime& a, const HybridTime& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  return a.j < b.j;
}

inline std::string to_string(const HybridTime& h) {
  return "(" + std::to_string(h.t) + ", " + std::to_string(h.j) + ")";
}

struct TimeInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  int j = 0;
  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Union of intervals ([t_j, t_{j+1}], j), j = 0, 1, ..., starting at t = 0.
/// The last interval may end at +inf; `unbounded` also marks domains with
/// infinitely many intervals of which only a prefix is listed.
class HybridTimeDomain {
 public:
  HybridTimeDomain() : intervals_{{0.0, 0.0, 0}} {}

  explicit HybridTimeDomain(std::vector<TimeInterval> intervals, bool unbounded = false)
      : intervals_(std::move(intervals)), unbounded_(unbounded) {
    validate();
    if (std::isinf(intervals_.back().t_end)) unbounded_ = true;
  }

  const std::vector<TimeInterval>& intervals() const { return intervals_; }
  bool unbounded() const { return unbounded_; }
  int last_j() const { return intervals_.back().j; }

  /// sup{t + j}; +inf for unbounded domains.
  double length() const {
    if (unbounded_) return kInf;
    return intervals_.back().t_end + intervals_.back().j;
  }

  HybridTime end() const {
    if (unbounded_) throw DomainError("unbounded domain has no end point");
    return {intervals_.back().t_end, intervals_.back().j};
  }

  bool contains(const HybridTime& p, double tol = 0.0) const {
    if (p.j < 0 || p.j > last_j()) return false;
    const auto& iv = intervals_[static_cast<std::size_t>(p.j)];
    return p.t >= iv.t_start - tol && p.t <= iv.t_end + tol;
  }

  friend bool operator==(const HybridTimeDomain&, const HybridTimeDomain&) = default;

 private:
  void validate() const {
    if (intervals_.empty()) throw DomainError("hybrid time domain needs at least one interval");
    if (intervals_.front().t_start != 0.0) throw DomainError("hybrid time domain must start at t = 0");
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const auto& iv = intervals_[i];
      if (iv.j != static_cast<int>(i)) throw DomainError("jump indices must be consecutive from 0");
      if (!(iv.t_start <= iv.t_end)) throw DomainError("interval with t_start > t_end");
      if (i + 1 < intervals_.size() && iv.t_end != intervals_[i + 1].t_start)
        throw DomainError("interval " + std::to_string(i) + " does not end where the next begins");
      if (i + 1 < intervals_.size() && std::isinf(iv.t_end))
        throw DomainError("only the last interval may be unbounded");
    }
  }

  std::vector<TimeInterval> intervals_;
  bool unbounded_ = false;
};

inline double length(const HybridTimeDomain& d) { return d.length(); }

/// Staircase of integer pairs (k, j) starting at (0, 0); each step increments
/// exactly one coordinate by one.
class HybridSequenceDomain {
 public:
  struct Step {
    long k = 0;
    int j = 0;
    friend bool operator==(const Step&, const Step&) = default;
  };

  HybridSequenceDomain() : steps_{{0, 0}} {}
  explicit HybridSequenceDomain(std::vector<Step> steps) : steps_(std::move(steps)) {
    if (steps_.empty() || steps_.front() != Step{0, 0})
      throw DomainError("hybrid sequence domain must start at (0, 0)");
    for (std::size_t i = 1; i < steps_.size(); ++i) {
      const long dk = steps_[i].k - steps_[i - 1].k;
      const int dj = steps_[i].j - steps_[i - 1].j;
      if (!((dk == 1 && dj == 0) || (dk == 0 && dj == 1)))
        throw DomainError("staircase violated at position " + std::to_string(i));
    }
  }

  const std::vector<Step>& steps() const { return steps_; }
  long max_k() const { return steps_.back().k; }
  int max_j() const { return steps_.back().j; }

  bool contains(long k, int j) const {
    return std::binary_search(steps_.begin(), steps_.end(), Step{k, j}, [](const Step& a, const Step& b) {
      return a.k + a.j != b.k + b.j ? a.k + a.j < b.k + b.j : a.j < b.j;
    });
  }

 private:
  std::vector<Step> steps_;
};

/// One graph point (t, j, x).
struct GraphPoint {
  double t = 0.0;
  int j = 0;
  Vector x;
  friend bool operator==(const GraphPoint&, const GraphPoint&) = default;
};

/// A set-valued hybrid mapping given by finitely many graph points. Several
/// points may share the same (t, j); the mapping then takes several values there.
class HybridMapping {
 public:
  HybridMapping() = default;
  explicit HybridMapping(std::vector<GraphPoint> points) : points_(std::move(points)) {
    std::stable_sort(points_.begin(), points_.end(), [](const GraphPoint& a, const GraphPoint& b) {
      return a.j != b.j ? a.j < b.j : a.t < b.t;
    });
    for (const auto& p : points_) {
      if (p.t < 0.0 || p.j < 0) throw DomainError("graph point outside [0,inf) x Z>=0");
      if (!points_.empty() && p.x.size() != points_.front().x.size())
        throw std::invalid_argument("graph points of mixed dimension");
    }
  }

  const std::vector<GraphPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().x.size(); }

  double length() const {
    double m = -kInf;
    for (const auto& p : points_) m = std::max(m, p.t + p.j);
    return m;
  }

  /// Distinct domain times in (j, t) order.
  std::vector<HybridTime> times() const {
    std::vector<HybridTime> out;
    for (const auto& p : points_)
      if (out.empty() || out.back().t != p.t || out.back().j != p.j) out.push_back({p.t, p.j});
    return out;
  }

  std::vector<Vector> values_at(const HybridTime& at) const {
    std::vector<Vector> out;
    for (const auto& p : points_)
      if (p.j == at.j && p.t == at.t) out.push_back(p.x);
    return out;
  }

  /// Number of domain times carrying two or more distinct values.
  std::size_t multivalued_count() const {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < points_.size()) {
      std::size_t k = i + 1;
      bool distinct = false;
      while (k < points_.size() && points_[k].j == points_[i].j && points_[k].t == points_[i].t) {
        if (points_[k].x != points_[i].x) distinct = true;
        ++k;
      }
      if (distinct) ++count;
      i = k;
    }
    return count;
  }

  /// Tail at a domain time: {(t, j) : (s + t, i + j) in dom}.
  HybridMapping tail(const HybridTime& at) const {
    bool found = false;
    for (const auto& p : points_)
      if (p.j == at.j && p.t == at.t) found = true;
    if (!found) throw DomainError("tail point " + to_string(at) + " is not in the mapping's domain");
    std::vector<GraphPoint> out;
    for (const auto& p : points_)
      if (p.j >= at.j && p.t >= at.t) out.push_back({p.t - at.t, p.j - at.j, p.x});
    return HybridMapping(std::move(out));
  }

  HybridMapping truncate(double T) const {
    if (T < 0.0) throw DomainError("truncation bound must be nonnegative");
    std::vector<GraphPoint> out;
    for (const auto& p : points_)
      if (p.t + p.j <= T) out.push_back(p);
    return HybridMapping(std::move(out));
  }

 private:
  std::vector<GraphPoint> points_;
};

namespace detail {

inline double snap_tol(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

}  // namespace detail

/// A hybrid arc sampled on per-interval time grids that include the exact
/// interval endpoints. Values between samples are linear interpolations.
///
/// Samples are stored in a fixed "frame" time axis together with a shift;
/// the arc's own time is frame time minus shift. Tails only move the shift
/// and concatenations of tails taken from one arc reuse the frame times, so
/// splitting and re-joining an arc reproduces its samples bit for bit.
class HybridArc {
 public:
  struct Piece {
    int j = 0;  // frame jump index
    std::vector<double> t;
    std::vector<Vector> x;
  };

  HybridArc() = default;

  /// Builds an arc from its own-time pieces. Piece p carries jump index p.
  static HybridArc from_pieces(std::vector<Piece> pieces) {
    HybridArc arc;
    for (std::size_t p = 0; p < pieces.size(); ++p) pieces[p].j = static_cast<int>(p);
    arc.pieces_ = std::move(pieces);
    arc.validate();
    return arc;
  }

  /// Builds an arc from graph rows sorted by (j, t).
  static HybridArc from_samples(const std::vector<GraphPoint>& rows) {
    std::vector<Piece> pieces;
    for (const auto& r : rows) {
      if (r.j < 0) throw DomainError("negative jump index");
      while (static_cast<int>(pieces.size()) <= r.j) pieces.push_back(Piece{static_cast<int>(pieces.size()), {}, {}});
      pieces[static_cast<std::size_t>(r.j)].t.push_back(r.t);
      pieces[static_cast<std::size_t>(r.j)].x.push_back(r.x);
    }
    return from_pieces(std::move(pieces));
  }

  /// Flow-only arc t -> f(t) on [0, t_end] sampled every dt (plus t_end).
  static HybridArc sample_flow(const std::function<Vector(double)>& f, double t_end, double dt) {
    if (!(dt > 0.0) || t_end < 0.0) throw std::invalid_argument("sample_flow needs dt > 0 and t_end >= 0");
    Piece piece;
    const auto n = static_cast<long>(std::floor(t_end / dt));
    for (long i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) * dt;
      if (t >= t_end) break;
      piece.t.push_back(t);
      piece.x.push_back(f(t));
    }
    piece.t.push_back(t_end);
    piece.x.push_back(f(t_end));
    return from_pieces({std::move(piece)});
  }

  static HybridArc constant(const Vector& x, double t_end, double dt) {
    return sample_flow([&](double) { return x; }, t_end, dt);
  }

  /// The trivial arc with domain {(0, 0)}.
  static HybridArc trivial(const Vector& x) { return from_pieces({Piece{0, {0.0}, {x}}}); }

  bool empty() const { return pieces_.empty(); }
  std::size_t dim() const { return pieces_.empty() ? 0 : pieces_.front().x.front().size(); }
  int last_j() const { return static_cast<int>(pieces_.size()) - 1; }
  const std::vector<Piece>& frame_pieces() const { return pieces_; }
  HybridTime shift() const { return {shift_t_, shift_j_}; }

  HybridTimeDomain domain() const {
    std::vector<TimeInterval> iv;
    for (std::size_t p = 0; p < pieces_.size(); ++p)
      iv.push_back({pieces_[p].t.front() - shift_t_, pieces_[p].t.back() - shift_t_, static_cast<int>(p)});
    return HybridTimeDomain(std::move(iv));
  }

  double length() const { return pieces_.back().t.back() - shift_t_ + last_j(); }

  HybridTime end() const { return {pieces_.back().t.back() - shift_t_, last_j()}; }

  bool contains(const HybridTime& at) const { return locate(at).has_value(); }

  /// Value at a domain time (linear interpolation between samples).
  Vector value(const HybridTime& at) const {
    auto loc = locate(at);
    if (!loc) throw DomainError("time " + to_string(at) + " is not in the arc's domain");
    return value_at(*loc);
  }

  /// Own-time samples in (j, t) order.
  std::vector<GraphPoint> samples() const {
    std::vector<GraphPoint> out;
    for (std::size_t p = 0; p < pieces_.size(); ++p)
      for (std::size_t i = 0; i < pieces_[p].t.size(); ++i)
        out.push_back({pieces_[p].t[i] - shift_t_, static_cast<int>(p), pieces_[p].x[i]});
    return out;
  }

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const auto& p : pieces_) n += p.t.size();
    return n;
  }

  HybridMapping graph() const { return HybridMapping(samples()); }

  /// Largest |x| over all samples.
  double sup_norm() const {
    double m = 0.0;
    for (const auto& p : pieces_)
      for (const auto& x : p.x) m = std::max(m, linalg::norm(x));
    return m;
  }

  friend HybridArc tail(const HybridArc& arc, const HybridTime& at);
  friend HybridArc truncate_at(const HybridArc& arc, const HybridTime& at);
  friend HybridArc concatenate(const HybridArc& first, const HybridArc& second, const HybridTime& at,
                               double tolerance);

 private:
  struct Location {
    std::size_t piece = 0;
    double frame = 0.0;
    std::optional<std::size_t> sample;  // exact (or snapped) sample index
    std::size_t upper = 0;              // first sample with time > frame
  };

  std::optional<Location> locate(const HybridTime& at) const {
    if (at.j < 0 || at.j > last_j()) return std::nullopt;
    const auto& piece = pieces_[static_cast<std::size_t>(at.j)];
    const double frame = at.t + shift_t_;
    const double tol = detail::snap_tol(frame);
    if (frame < piece.t.front() - tol || frame > piece.t.back() + tol) return std::nullopt;
    Location loc;
    loc.piece = static_cast<std::size_t>(at.j);
    const auto it = std::lower_bound(piece.t.begin(), piece.t.end(), frame - tol);
    if (it != piece.t.end() && std::abs(*it - frame) <= tol) {
      loc.sample = static_cast<std::size_t>(it - piece.t.begin());
      loc.frame = *it;
      loc.upper = *loc.sample + 1;
    } else {
      loc.frame = frame;
      loc.upper = static_cast<std::size_t>(std::upper_bound(piece.t.begin(), piece.t.end(), frame) - piece.t.begin());
    }
    return loc;
  }

  Vector value_at(const Location& loc) const {
    const auto& piece = pieces_[loc.piece];
    if (loc.sample) return piece.x[*loc.sample];
    const std::size_t b = loc.upper;
    const std::size_t a = b - 1;
    const double w = (loc.frame - piece.t[a]) / (piece.t[b] - piece.t[a]);
    Vector out(piece.x[a].size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = piece.x[a][i] + w * (piece.x[b][i] - piece.x[a][i]);
    return out;
  }

  void validate() const {
    if (pieces_.empty()) throw DomainError("arc needs at least one piece");
    const std::size_t d = pieces_.front().x.empty() ? 0 : pieces_.front().x.front().size();
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      const auto& piece = pieces_[p];
      if (piece.t.empty() || piece.t.size() != piece.x.size())
        throw DomainError("piece " + std::to_string(p) + " has no samples or mismatched sizes");
      for (std::size_t i = 0; i < piece.t.size(); ++i) {
        if (piece.x[i].size() != d) throw DomainError("mixed state dimension in arc");
        if (i > 0 && !(piece.t[i] > piece.t[i - 1]))
          throw DomainError("sample times must increase strictly within piece " + std::to_string(p));
      }
      if (p + 1 < pieces_.size() && piece.t.back() != pieces_[p + 1].t.front())
        throw DomainError("piece " + std::to_string(p) + " does not end where the next begins");
    }
    if (pieces_.front().t.front() != shift_t_) throw DomainError("arc domain must start at t = 0");
  }

  std::vector<Piece> pieces_;
  double shift_t_ = 0.0;
  int shift_j_ = 0;
};

/// phi^{(s,i)}(t, j) := phi(s + t, i + j).
inline HybridArc tail(const HybridArc& arc, const HybridTime& at) {
  const auto loc = arc.locate(at);
  if (!loc) throw DomainError("tail point " + to_string(at) + " is not in the arc's domain");
  HybridArc out;
  const auto& first = arc.pieces_[loc->piece];
  HybridArc::Piece head{first.j, {}, {}};
  if (!loc->sample) {
    head.t.push_back(loc->frame);
    head.x.push_back(arc.value_at(*loc));
  }
  const std::size_t from = loc->sample ? *loc->sample : loc->upper;
  head.t.insert(head.t.end(), first.t.begin() + static_cast<long>(from), first.t.end());
  head.x.insert(head.x.end(), first.x.begin() + static_cast<long>(from), first.x.end());
  out.pieces_.push_back(std::move(head));
  for (std::size_t p = loc->piece + 1; p < arc.pieces_.size(); ++p) out.pieces_.push_back(arc.pieces_[p]);
  out.shift_t_ = loc->frame;
  out.shift_j_ = first.j;
  return out;
}

/// Restriction to the domain points that precede or equal `at`.
inline HybridArc truncate_at(const HybridArc& arc, const HybridTime& at) {
  const auto loc = arc.locate(at);
  if (!loc) throw DomainError("truncation point " + to_string(at) + " is not in the arc's domain");
  HybridArc out;
  out.shift_t_ = arc.shift_t_;
  out.shift_j_ = arc.shift_j_;
  for (std::size_t p = 0; p < loc->piece; ++p) out.pieces_.push_back(arc.pieces_[p]);
  const auto& last = arc.pieces_[loc->piece];
  HybridArc::Piece cut{last.j, {}, {}};
  const std::size_t keep = loc->sample ? *loc->sample + 1 : loc->upper;
  cut.t.assign(last.t.begin(), last.t.begin() + static_cast<long>(keep));
  cut.x.assign(last.x.begin(), last.x.begin() + static_cast<long>(keep));
  if (!loc->sample) {
    cut.t.push_back(loc->frame);
    cut.x.push_back(arc.value_at(*loc));
  }
  out.pieces_.push_back(std::move(cut));
  return out;
}

/// phi restricted to t + j <= T.
inline HybridArc truncate(const HybridArc& arc, double T) {
  if (T < 0.0) throw DomainError("truncation bound must be nonnegative");
  if (T >= arc.length()) return arc;
  const auto dom = arc.domain();
  // Last interval reaching t + j <= T.
  int j = 0;
  while (j + 1 <= dom.last_j() && dom.intervals()[static_cast<std::size_t>(j + 1)].t_start + (j + 1) <= T) ++j;
  const auto& iv = dom.intervals()[static_cast<std::size_t>(j)];
  const double t = std::min(iv.t_end, T - j);
  return truncate_at(arc, {t, j});
}

/// Concatenation of `first` and `second` at `at` in dom first. The endpoint
/// values must agree within `tolerance` (exact agreement when it is 0).
inline HybridArc concatenate(const HybridArc& first, const HybridArc& second, const HybridTime& at,
                             double tolerance = 0.0) {
  const auto loc = first.locate(at);
  if (!loc) throw DomainError("concatenation point " + to_string(at) + " is not in the first arc's domain");
  const Vector a = first.value_at(*loc);
  const Vector b = second.value({0.0, 0});
  if (a.size() != b.size()) throw ConcatenationError("concatenated arcs differ in dimension");
  const double gap = linalg::distance(a, b);
  if (gap > tolerance)
    throw ConcatenationError("endpoint mismatch " + std::to_string(gap) + " exceeds tolerance " +
                             std::to_string(tolerance));
  HybridArc out = truncate_at(first, at);
  const double cut = out.pieces_.back().t.back();
  const double delta = cut - second.shift_t_;
  for (std::size_t q = 0; q < second.pieces_.size(); ++q) {
    const auto& src = second.pieces_[q];
    if (q == 0) {
      auto& dst = out.pieces_.back();
      for (std::size_t i = 1; i < src.t.size(); ++i) {
        dst.t.push_back(src.t[i] + delta);
        dst.x.push_back(src.x[i]);
      }
    } else {
      HybridArc::Piece piece{out.pieces_.back().j + 1, {}, {}};
      piece.t.reserve(src.t.size());
      for (double t : src.t) piece.t.push_back(t + delta);
      piece.x = src.x;
      out.pieces_.push_back(std::move(piece));
    }
  }
  return out;
}

/// A link of a chain or of a generalized concatenation: an arc and the
/// domain time at which it is cut.
struct ArcLink {
  HybridArc arc;
  HybridTime end;
};

/// Result of a generalized concatenation: a mapping that may take two values
/// at each concatenation time.
struct GeneralizedConcatenation {
  HybridMapping mapping;
  std::vector<HybridTime> concatenation_times;
  std::vector<double> segment_lengths;
};

inline GeneralizedConcatenation generalized_concatenate(const std::vector<ArcLink>& links) {
  if (links.empty()) throw std::invalid_argument("generalized concatenation of no links");
  GeneralizedConcatenation out;
  std::vector<GraphPoint> points;
  double t0 = 0.0;
  int j0 = 0;
  for (std::size_t k = 0; k < links.size(); ++k) {
    const auto& link = links[k];
    const HybridArc piece = truncate_at(link.arc, link.end);
    auto rows = piece.samples();
    // The link's first point coincides with the previous concatenation time;
    // keep it only when it carries a value different from the previous link's end.
    std::size_t from = 0;
    if (k > 0 && !points.empty() && points.back().x == rows.front().x) from = 1;
    for (std::size_t i = from; i < rows.size(); ++i) {
      const double t = (k == 0) ? rows[i].t : rows[i].t + t0;
      points.push_back({t, rows[i].j + j0, rows[i].x});
    }
    const HybridTime end = piece.end();
    out.segment_lengths.push_back(end.length());
    t0 = (k == 0) ? end.t : end.t + t0;
    j0 += end.j;
    if (k + 1 < links.size()) out.concatenation_times.push_back({t0, j0});
  }
  out.mapping = HybridMapping(std::move(points));
  return out;
}

class NothingToSplit : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Splits an arc of length > tau into tails, each of length in [tau, 2 tau + 1),
/// cutting at points (s, i) with tau <= s + i - (previous cut) < tau + 1.
/// Concatenating segment k + 1 to the running result at its end point
/// reproduces the arc.
inline std::vector<HybridArc> split_long(const HybridArc& arc, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("split_long needs tau > 0");
  const double total = arc.length();
  if (!(total > tau)) throw NothingToSplit("arc length " + std::to_string(total) + " does not exceed tau");
  const auto rows = arc.samples();
  std::vector<HybridArc> segments;
  HybridTime cur{0.0, 0};
  while (total - cur.length() >= 2.0 * tau + 1.0) {
    const double target = cur.length() + tau;
    auto it = std::find_if(rows.begin(), rows.end(), [&](const GraphPoint& r) { return r.t + r.j >= target; });
    HybridTime cut;
    if (it != rows.end() && it->t + it->j < target + 1.0) {
      cut = {it->t, it->j};
    } else {
      // No sample in the window: cut at the first domain point with t + j >= target.
      const auto dom = arc.domain();
      cut = dom.end();
      for (const auto& iv : dom.intervals()) {
        if (iv.t_end + iv.j >= target) {
          cut = {std::max(iv.t_start, target - iv.j), iv.j};
          break;
        }
      }
    }
    segments.push_back(tail(truncate_at(arc, cut), cur));
    cur = cut;
  }
  segments.push_back(tail(arc, cur));
  return segments;
}

/// Folds segments back together with `concatenate` at each running end point.
inline HybridArc join_segments(const std::vector<HybridArc>& segments) {
  if (segments.empty()) throw std::invalid_argument("no segments to join");
  HybridArc acc = segments.front();
  for (std::size_t k = 1; k < segments.size(); ++k) acc = concatenate(acc, segments[k], acc.end());
  return acc;
}

/// An arc given in closed form on a possibly unbounded hybrid time domain.
/// `interval_end(j)` is the flow time at which interval j ends (+inf if it never does).
class ClosedFormArc {
 public:
  using ValueFn = std::function<Vector(double t, int j)>;
  using IntervalEndFn = std::function<double(int j)>;

  ClosedFormArc(ValueFn value, IntervalEndFn interval_end, double dt)
      : value_(std::move(value)), interval_end_(std::move(interval_end)), dt_(dt) {
    if (!(dt_ > 0.0)) throw std::invalid_argument("closed-form arc needs a positive sample spacing");
  }

  double interval_start(int j) const { return j == 0 ? 0.0 : interval_end_(j - 1); }
  double interval_end(int j) const { return interval_end_(j); }
  Vector value(double t, int j) const { return value_(t, j); }

  /// First domain point with t + j >= target, searching from interval j0.
  HybridTime first_point_at_or_after(double target, int j0 = 0) const {
    for (int j = j0;; ++j) {
      const double a = interval_start(j);
      const double b = interval_end(j);
      if (b + j >= target) return {std::max(a, target - j), j};
    }
  }

  /// Samples the piece of the arc between two domain points as an arc whose
  /// own time starts at `from`.
  HybridArc materialize(const HybridTime& from, const HybridTime& to) const {
    std::vector<HybridArc::Piece> pieces;
    for (int j = from.j; j <= to.j; ++j) {
      const double a = (j == from.j) ? from.t : interval_start(j);
      const double b = (j == to.j) ? to.t : interval_end(j);
      HybridArc::Piece piece;
      for (long i = 0;; ++i) {
        const double t = a + static_cast<double>(i) * dt_;
        if (t >= b) break;
        piece.t.push_back(t - from.t);
        piece.x.push_back(value_(t, j));
      }
      piece.t.push_back(b - from.t);
      piece.x.push_back(value_(b, j));
      pieces.push_back(std::move(piece));
    }
    return HybridArc::from_pieces(std::move(pieces));
  }

 private:
  ValueFn value_;
  IntervalEndFn interval_end_;
  double dt_;
};

/// Lazily generated segments of an unbounded arc; each has length in [tau, tau + 1).
class SegmentStream {
 public:
  SegmentStream(ClosedFormArc arc, double tau) : arc_(std::move(arc)), tau_(tau) {
    if (!(tau_ > 0.0)) throw std::invalid_argument("split_long needs tau > 0");
  }

  HybridArc next() {
    const HybridTime cut = arc_.first_point_at_or_after(cur_.length() + tau_, cur_.j);
    HybridArc seg = arc_.materialize(cur_, cut);
    cur_ = cut;
    return seg;
  }

  HybridTime position() const { return cur_; }

 private:
  ClosedFormArc arc_;
  double tau_;
  HybridTime cur_{0.0, 0};
};

inline SegmentStream split_long(const ClosedFormArc& arc, double tau) { return SegmentStream(arc, tau); }

// ---------------------------------------------------------------------------
// Graph closeness

struct GraphWitness {
  GraphPoint point;
  bool from_first = true;  // point belongs to the first argument's graph
  double distance = 0.0;   // its distance to the other graph
};

struct ClosenessResult {
  bool close = false;
  double distance = 0.0;  // smallest eps for which the two inclusions hold
  std::optional<GraphWitness> witness;
};

namespace detail {

/// Per-j, time-sorted index over graph points for nearest-neighbour queries
/// in the max-norm on (t, j, x).
class GraphIndex {
 public:
  explicit GraphIndex(const HybridMapping& g) : g_(g) {
    for (std::size_t i = 0; i < g.points().size(); ++i) by_j_[g.points()[i].j].push_back(i);
    // points() is already sorted by (j, t)
  }

  double nearest(const GraphPoint& p) const {
    double best = kInf;
    if (by_j_.empty()) return best;
    const int jmin = by_j_.begin()->first;
    const int jmax = by_j_.rbegin()->first;
    for (int dj = 0; dj < best; ++dj) {
      if (p.j - dj < jmin && p.j + dj > jmax) break;
      scan(p, p.j - dj, dj, best);
      if (dj > 0) scan(p, p.j + dj, dj, best);
    }
    return best;
  }

 private:
  void scan(const GraphPoint& p, int j, int dj, double& best) const {
    const auto it = by_j_.find(j);
    if (it == by_j_.end()) return;
    const auto& idx = it->second;
    const auto& pts = g_.points();
    auto pos = std::lower_bound(idx.begin(), idx.end(), p.t,
                                [&](std::size_t a, double t) { return pts[a].t < t; });
    for (auto r = pos; r != idx.end(); ++r) {
      const double dt = pts[*r].t - p.t;
      if (dt >= best) break;
      best = std::min(best, point_distance(p, pts[*r], dt, dj, best));
    }
    for (auto r = pos; r != idx.begin();) {
      --r;
      const double dt = p.t - pts[*r].t;
      if (dt >= best) break;
      best = std::min(best, point_distance(p, pts[*r], dt, dj, best));
    }
  }

  static double point_distance(const GraphPoint& a, const GraphPoint& b, double dt, int dj, double cap) {
    double d = std::max(std::abs(dt), static_cast<double>(dj));
    for (std::size_t i = 0; i < a.x.size() && d < cap; ++i) d = std::max(d, std::abs(a.x[i] - b.x[i]));
    return d;
  }

  const HybridMapping& g_;
  std::map<int, std::vector<std::size_t>> by_j_;
};

inline std::pair<double, std::optional<GraphPoint>> directed_distance(const HybridMapping& from,
                                                                      const HybridMapping& to, double T) {
  GraphIndex index(to);
  double worst = 0.0;
  std::optional<GraphPoint> arg;
  for (const auto& p : from.points()) {
    if (p.t + p.j > T) continue;
    const double d = index.nearest(p);
    if (d > worst || !arg) {
      worst = std::max(worst, d);
      if (d >= worst) arg = p;
    }
  }
  return {worst, arg};
}

/// Largest distance from the points of `from` with t + j <= T to the indexed
/// graph; stops early once it reaches `cutoff`.
inline double directed_distance_bounded(const HybridMapping& from, const GraphIndex& to, double T, double cutoff) {
  double worst = 0.0;
  for (const auto& p : from.points()) {
    if (p.t + p.j > T) continue;
    worst = std::max(worst, to.nearest(p));
    if (worst >= cutoff) break;
  }
  return worst;
}

}  // namespace detail

/// Checks gph_{t+j<=T} a within gph b + eps B and gph_{t+j<=T} b within
/// gph a + eps B over sampled graphs, using the max-norm on (t, j, x).
inline ClosenessResult graph_closeness(const HybridMapping& a, const HybridMapping& b, double T, double eps) {
  if (T < 0.0 || eps < 0.0) throw std::invalid_argument("graph_closeness needs T >= 0 and eps >= 0");
  const auto [dab, pa] = detail::directed_distance(a, b, T);
  const auto [dba, pb] = detail::directed_distance(b, a, T);
  ClosenessResult r;
  r.distance = std::max(dab, dba);
  r.close = r.distance <= eps;
  if (!r.close) {
    if (dab >= dba)
      r.witness = GraphWitness{*pa, true, dab};
    else
      r.witness = GraphWitness{*pb, false, dba};
  }
  return r;
}

inline ClosenessResult graph_closeness(const HybridArc& a, const HybridArc& b, double T, double eps) {
  return graph_closeness(a.graph(), b.graph(), T, eps);
}

}  // namespace hybridsa
