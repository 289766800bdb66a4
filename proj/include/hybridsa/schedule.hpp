#pragma once

// Step-size schedules h_1, h_2, ... with partial sums tau_k and the inverse m(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridsa {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StepSchedule {
 public:
  enum class Kind { Power, Constant, List, Function };

  /// h_k = scale * k^{-a}.
  static StepSchedule power(double a, double scale = 1.0) {
    if (!(scale > 0.0)) throw ScheduleError("power schedule scale must be positive");
    StepSchedule s(Kind::Power);
    s.a_ = a;
    s.scale_ = scale;
    return s;
  }
  static StepSchedule constant(double h) {
    if (!(h > 0.0)) throw ScheduleError("constant step must be positive");
    StepSchedule s(Kind::Constant);
    s.scale_ = h;
    return s;
  }
  /// Explicit h_1..h_n; k beyond the list is an error.
  static StepSchedule list(std::vector<double> h) {
    for (double v : h)
      if (!(v > 0.0)) throw ScheduleError("listed steps must be positive");
    StepSchedule s(Kind::List);
    s.list_ = std::make_shared<const std::vector<double>>(std::move(h));
    return s;
  }
  static StepSchedule function(std::function<double(long)> h, std::string label = "custom") {
    StepSchedule s(Kind::Function);
    s.fn_ = std::move(h);
    s.label_ = std::move(label);
    return s;
  }

  Kind kind() const { return kind_; }
  double exponent() const { return a_; }
  double scale() const { return scale_; }
  std::string label() const {
    switch (kind_) {
      case Kind::Power: return "power";
      case Kind::Constant: return "constant";
      case Kind::List: return "list";
      case Kind::Function: return label_;
    }
    return "";
  }

  /// h_k for k >= 1, in scalar type S.
  template <class S = double>
  S h(long k) const {
    if (k < 1) throw ScheduleError("step index starts at 1");
    switch (kind_) {
      case Kind::Power: {
        using std::pow;
        const S v = pow(S(k), -S(a_));
        return scale_ == 1.0 ? v : v * S(scale_);
      }
      case Kind::Constant: return S(scale_);
      case Kind::List:
        if (static_cast<std::size_t>(k) > list_->size())
          throw ScheduleError("step " + std::to_string(k) + " beyond listed schedule");
        return S((*list_)[static_cast<std::size_t>(k - 1)]);
      case Kind::Function: {
        const double v = fn_(k);
        if (!(v > 0.0)) throw ScheduleError("schedule produced a nonpositive step at k = " + std::to_string(k));
        return S(v);
      }
    }
    return S(0);
  }

  std::size_t list_size() const { return list_ ? list_->size() : 0; }

 private:
  explicit StepSchedule(Kind k) : kind_(k) {}

  Kind kind_;
  double a_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const std::vector<double>> list_;
  std::function<double(long)> fn_;
  std::string label_;
};

/// tau_k = sum_{i=0}^{k-1} h_{i+1}, summed in index order.
template <class S = double>
S tau_of(const StepSchedule& s, long k) {
  if (k < 0) throw ScheduleError("tau_k needs k >= 0");
  S acc = S(0);
  for (long i = 1; i <= k; ++i) acc += s.h<S>(i);
  return acc;
}

/// Precomputed h_k and tau_k for k up to a bound; tau_k are summed in index
/// order so that they agree bit for bit with tau_of.
class StepTable {
 public:
  StepTable() = default;
  StepTable(const StepSchedule& s, long max_k) : schedule_(s) { extend(max_k); }

  const StepSchedule& schedule() const { return schedule_; }
  long size() const { return static_cast<long>(h_.size()); }

  /// Extends the table so that h_1..h_{max_k} and tau_0..tau_{max_k} are known.
  void extend(long max_k) {
    if (tau_.empty()) tau_.push_back(0.0);
    for (long k = size() + 1; k <= max_k; ++k) {
      const double hk = schedule_.h<double>(k);
      h_.push_back(hk);
      tau_.push_back(tau_.back() + hk);
    }
  }

  double h(long k) const { return h_.at(static_cast<std::size_t>(k - 1)); }
  double tau(long k) const { return tau_.at(static_cast<std::size_t>(k)); }

  /// m(t) = max{k : tau_k <= t}, extending the table as needed.
  long m(double t) {
    if (t < 0.0) throw ScheduleError("m(t) needs t >= 0");
    while (tau_.back() <= t) {
      const long before = size();
      extend(before + std::max<long>(64, before));
      if (size() > 100'000'000) throw ScheduleError("m(t) search exceeded 1e8 steps (summable schedule?)");
    }
    const auto it = std::upper_bound(tau_.begin(), tau_.end(), t);
    return static_cast<long>(it - tau_.begin()) - 1;
  }

  /// m(t) using only the current table; returns -1 if the table does not reach past t.
  long m_known(double t) const {
    if (tau_.back() <= t) return -1;
    const auto it = std::upper_bound(tau_.begin(), tau_.end(), t);
    return static_cast<long>(it - tau_.begin()) - 1;
  }

 private:
  StepSchedule schedule_ = StepSchedule::constant(1.0);
  std::vector<double> h_;
  std::vector<double> tau_;
};

inline long m_of(const StepSchedule& s, double t) {
  StepTable table(s, 16);
  return table.m(t);
}

struct AdmissibilityVerdict {
  bool admissible = false;
  bool analytic = false;  // decided in closed form rather than by the trend heuristic
  std::string reason;
};

/// Positive, vanishing and non-summable steps. Power schedules are decided
/// exactly (0 < a <= 1); others by a trend test on the first `probe` steps.
inline AdmissibilityVerdict check_admissible(const StepSchedule& s, long probe = 100000,
                                             double divergence_threshold = 10.0) {
  AdmissibilityVerdict v;
  switch (s.kind()) {
    case StepSchedule::Kind::Power:
      v.analytic = true;
      v.admissible = s.exponent() > 0.0 && s.exponent() <= 1.0;
      v.reason = v.admissible ? "power schedule with 0 < a <= 1"
                              : "power schedule k^-a is admissible only for 0 < a <= 1 (got a = " +
                                    std::to_string(s.exponent()) + ")";
      return v;
    case StepSchedule::Kind::Constant:
      v.analytic = true;
      v.reason = "constant steps do not vanish";
      return v;
    default: break;
  }
  long n = probe;
  if (s.kind() == StepSchedule::Kind::List) n = static_cast<long>(s.list_size());
  if (n < 4) {
    v.reason = "too few steps to judge admissibility";
    return v;
  }
  double sum = 0.0;
  double early = 0.0;
  try {
    for (long k = 1; k <= n; ++k) {
      const double h = s.h<double>(k);
      sum += h;
      if (k <= n / 10) early = std::max(early, h);
    }
  } catch (const ScheduleError& e) {
    v.reason = e.what();
    return v;
  }
  const double late = s.h<double>(n);
  const bool vanishing = late < 0.5 * early;
  const bool diverging = sum > divergence_threshold;
  v.admissible = vanishing && diverging;
  v.reason = std::string(vanishing ? "" : "steps do not decrease; ") + (diverging ? "" : "partial sums stay below threshold; ");
  if (v.admissible) v.reason = "trend test passed";
  return v;
}

}  // namespace hybridsa
