// Copyright 2026 The RCAS Authors
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

// Ground-truth instruments: exhaustive optimization over every feasible
// assignment, empirical checks of monotonicity and diminishing returns, and
// the upper convex hull of (cost, value) pairs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/objective.hpp"
#include "rcas/random.hpp"
#include "rcas/search.hpp"

namespace rcas {

struct BruteForceOptions {
  Fidelity fidelity;
  std::uint64_t max_assignments = std::uint64_t{1} << 20;
  unsigned threads = 1;  // > 1 only takes effect for concurrency-safe objectives
};

struct BruteForceResult {
  Assignment assignment;
  double value = 0.0;
  Cost cost;
  std::uint64_t enumerated = 0;
  std::uint64_t feasible = 0;
};

namespace detail {

// Mixed-radix view of the assignment space: digit n picks "empty" (0) or the
// k-th allowed type at position n. Position 0 is the most significant digit,
// so enumeration is position-major with empty first.
class AssignmentSpace {
 public:
  explicit AssignmentSpace(const Problem& p) {
    choices_.resize(static_cast<std::size_t>(p.costs.positions()));
    for (const Element& e : p.ground) choices_[static_cast<std::size_t>(e.position)].push_back(e.type);
    total_ = 1;
    for (const auto& c : choices_) {
      if (__builtin_mul_overflow(total_, c.size() + 1, &total_)) total_ = std::numeric_limits<std::uint64_t>::max();
    }
  }

  std::uint64_t size() const { return total_; }

  Assignment at(std::uint64_t index) const {
    std::vector<Element> elems;
    for (std::size_t n = choices_.size(); n-- > 0;) {
      const std::uint64_t radix = choices_[n].size() + 1;
      const std::uint64_t digit = index % radix;
      index /= radix;
      if (digit != 0) elems.push_back({static_cast<int>(n), choices_[n][digit - 1]});
    }
    return Assignment::from_elements(elems);
  }

 private:
  std::vector<std::vector<int>> choices_;
  std::uint64_t total_ = 1;
};

}  // namespace detail

inline BruteForceResult brute_force_opt(CachedObjective& f, const Problem& p, const BruteForceOptions& opts = {}) {
  const detail::AssignmentSpace space(p);
  if (space.size() > opts.max_assignments) {
    throw InstanceTooLarge("assignment space has " +
                           (space.size() == std::numeric_limits<std::uint64_t>::max() ? std::string("> 2^64")
                                                                                       : std::to_string(space.size())) +
                           " members, cap is " + std::to_string(opts.max_assignments));
  }

  struct Best {
    std::optional<std::uint64_t> index;
    double value = 0.0;
    std::uint64_t feasible = 0;
  };
  const auto scan = [&](std::uint64_t lo, std::uint64_t hi) {
    Best b;
    for (std::uint64_t i = lo; i < hi; ++i) {
      const Assignment a = space.at(i);
      if (!p.budget.admits(p.costs.assignment_cost(a))) continue;
      ++b.feasible;
      const double v = f.evaluate(a, opts.fidelity);
      if (!b.index || v > b.value) {
        b.index = i;
        b.value = v;
      }
    }
    return b;
  };

  const unsigned threads =
      (f.concurrency_safe() && opts.threads > 1) ? static_cast<unsigned>(std::min<std::uint64_t>(opts.threads, space.size())) : 1;
  std::vector<Best> parts(threads);
  if (threads == 1) {
    parts[0] = scan(0, space.size());
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      const std::uint64_t chunk = (space.size() + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            parts[t] = scan(std::min(space.size(), t * chunk), std::min(space.size(), (t + 1) * chunk));
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Chunks are in index order, so a strict ">" keeps the earliest maximum.
  BruteForceResult out;
  out.enumerated = space.size();
  std::optional<std::uint64_t> best_index;
  for (const Best& b : parts) {
    out.feasible += b.feasible;
    if (b.index && (!best_index || b.value > out.value)) {
      best_index = b.index;
      out.value = b.value;
    }
  }
  // The empty assignment is always feasible (Problem checks the base cost).
  out.assignment = space.at(*best_index);
  out.cost = p.costs.assignment_cost(out.assignment);
  return out;
}

struct MonotonicityWitness {
  Assignment set;
  Element element;
  double magnitude = 0.0;  // F(A) - F(A + v)
};

struct DiminishingReturnsWitness {
  Assignment smaller;  // A
  Assignment larger;   // B
  Element element;
  double magnitude = 0.0;  // gain at B minus gain at A
};

struct ViolationReport {
  bool exhaustive = false;
  std::uint64_t monotonicity_checks = 0;
  std::uint64_t monotonicity_violations = 0;
  std::uint64_t dr_checks = 0;
  std::uint64_t dr_violations = 0;
  std::optional<MonotonicityWitness> worst_monotonicity;
  std::optional<DiminishingReturnsWitness> worst_dr;
  std::vector<DiminishingReturnsWitness> dr_witnesses;  // first few, in discovery order
  std::vector<MonotonicityWitness> monotonicity_witnesses;

  double monotonicity_rate() const {
    return monotonicity_checks == 0 ? 0.0 : static_cast<double>(monotonicity_violations) / monotonicity_checks;
  }
  double dr_rate() const { return dr_checks == 0 ? 0.0 : static_cast<double>(dr_violations) / dr_checks; }
};

struct SubmodularityOptions {
  Fidelity fidelity;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  // Exhaustive when |V| <= this; the triple count grows as 3^|V|.
  std::size_t exhaustive_limit = 8;
  // Violations no larger than this are ignored; 0 reports every one.
  double tolerance = 0.0;
  std::size_t max_witnesses = 64;
};

namespace detail {

class ViolationTally {
 public:
  ViolationTally(ViolationReport& r, const SubmodularityOptions& o) : r_(r), o_(o) {}

  void monotonicity(const Assignment& a, const Element& v, double gain) {
    ++r_.monotonicity_checks;
    const double magnitude = -gain;
    if (!(magnitude > o_.tolerance)) return;
    ++r_.monotonicity_violations;
    MonotonicityWitness w{a, v, magnitude};
    if (r_.monotonicity_witnesses.size() < o_.max_witnesses) r_.monotonicity_witnesses.push_back(w);
    if (!r_.worst_monotonicity || magnitude > r_.worst_monotonicity->magnitude) r_.worst_monotonicity = w;
  }

  void diminishing(const Assignment& a, const Assignment& b, const Element& v, double gain_a, double gain_b) {
    ++r_.dr_checks;
    const double magnitude = gain_b - gain_a;
    if (!(magnitude > o_.tolerance)) return;
    ++r_.dr_violations;
    DiminishingReturnsWitness w{a, b, v, magnitude};
    if (r_.dr_witnesses.size() < o_.max_witnesses) r_.dr_witnesses.push_back(w);
    if (!r_.worst_dr || magnitude > r_.worst_dr->magnitude) r_.worst_dr = w;
  }

 private:
  ViolationReport& r_;
  const SubmodularityOptions& o_;
};

inline bool partition_valid(std::span<const Element> v, std::uint32_t mask) {
  std::vector<int> used;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(mask >> i & 1U)) continue;
    if (std::find(used.begin(), used.end(), v[i].position) != used.end()) return false;
    used.push_back(v[i].position);
  }
  return true;
}

inline Assignment from_mask(std::span<const Element> v, std::uint32_t mask) {
  std::vector<Element> elems;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask >> i & 1U) elems.push_back(v[i]);
  }
  return Assignment::from_elements(elems);
}

}  // namespace detail

// Checks F(A + v) >= F(A) and F(A + v) - F(A) >= F(B + v) - F(B) for A within
// B and v addable to B. Small ground sets are checked over every such triple;
// larger ones over random triples plus random growth chains.
inline ViolationReport check_submodularity(CachedObjective& f, std::span<const Element> ground,
                                           const SubmodularityOptions& opts = {}) {
  std::vector<Element> v(ground.begin(), ground.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());

  ViolationReport report;
  detail::ViolationTally tally(report, opts);
  const auto gain = [&](const Assignment& s, const Element& e) {
    return f.evaluate(s.add(e), opts.fidelity) - f.evaluate(s, opts.fidelity);
  };

  if (v.size() <= opts.exhaustive_limit && v.size() < 31) {
    report.exhaustive = true;
    const std::uint32_t full = (std::uint32_t{1} << v.size()) - 1;
    for (std::uint32_t b = 0; b <= full; ++b) {
      if (!detail::partition_valid(v, b)) continue;
      const Assignment set_b = detail::from_mask(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (set_b.occupied(v[i].position)) continue;
        const double gain_b = gain(set_b, v[i]);
        tally.monotonicity(set_b, v[i], gain_b);
        // Every submask of b, including b itself.
        for (std::uint32_t a = b;; a = (a - 1) & b) {
          const Assignment set_a = detail::from_mask(v, a);
          tally.diminishing(set_a, set_b, v[i], gain(set_a, v[i]), gain_b);
          if (a == 0) break;
        }
      }
    }
    return report;
  }

  Rng rng(opts.seed);
  for (std::uint64_t s = 0; s < opts.samples; ++s) {
    std::vector<Element> order = v;
    rng.shuffle(order);
    Assignment set_b, set_a;
    for (const Element& e : order) {
      if (set_b.occupied(e.position) || !rng.bernoulli(0.5)) continue;
      set_b = set_b.add(e);
      if (rng.bernoulli(0.5)) set_a = set_a.add(e);
    }
    std::vector<Element> addable;
    for (const Element& e : v) {
      if (!set_b.occupied(e.position)) addable.push_back(e);
    }
    if (addable.empty()) continue;
    const Element pick = addable[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(addable.size()) - 1))];
    const double gain_a = gain(set_a, pick);
    const double gain_b = gain(set_b, pick);
    tally.monotonicity(set_a, pick, gain_a);
    tally.monotonicity(set_b, pick, gain_b);
    tally.diminishing(set_a, set_b, pick, gain_a, gain_b);
  }

  const std::uint64_t chains = std::max<std::uint64_t>(1, opts.samples / 10);
  for (std::uint64_t c = 0; c < chains; ++c) {
    std::vector<Element> order = v;
    rng.shuffle(order);
    const Element probe = order.front();
    Assignment prev;
    double prev_gain = gain(prev, probe);
    for (std::size_t i = 1; i < order.size(); ++i) {
      const Element& e = order[i];
      if (e.position == probe.position || prev.occupied(e.position)) continue;
      const Assignment next = prev.add(e);
      tally.monotonicity(prev, e, gain(prev, e));
      const double next_gain = gain(next, probe);
      tally.diminishing(prev, next, probe, prev_gain, next_gain);
      prev = next;
      prev_gain = next_gain;
    }
  }
  return report;
}

// Diagnostics for one recorded growth chain F(S_0), F(S_1), ... with
// S_k within S_{k+1}.
struct ChainReport {
  std::vector<double> gains;
  std::size_t monotonicity_violations = 0;
  std::size_t dr_violations = 0;

  bool monotone() const { return monotonicity_violations == 0; }
  bool strictly_decreasing_gains() const {
    for (std::size_t i = 1; i < gains.size(); ++i) {
      if (!(gains[i] < gains[i - 1])) return false;
    }
    return true;
  }
};

inline ChainReport check_chain(std::span<const double> values) {
  ChainReport r;
  for (std::size_t i = 1; i < values.size(); ++i) {
    r.gains.push_back(values[i] - values[i - 1]);
    if (r.gains.back() < 0.0) ++r.monotonicity_violations;
    if (r.gains.size() > 1 && r.gains.back() > r.gains[r.gains.size() - 2]) ++r.dr_violations;
  }
  return r;
}

struct HullPoint {
  double cost = 0.0;
  double value = 0.0;

  friend bool operator==(const HullPoint&, const HullPoint&) = default;
};

struct HullPointStatus {
  HullPoint point;
  double hull_value = 0.0;
  double gap = 0.0;  // hull_value - value, >= 0
  bool on_hull = false;
};

struct HullReport {
  std::vector<HullPoint> virtual_points;
  std::vector<HullPoint> hull;  // upper hull vertices, ascending cost
  std::vector<HullPointStatus> points;

  // Piecewise-linear upper hull evaluated at `cost` (clamped to its domain).
  double hull_value(double cost) const {
    if (cost <= hull.front().cost) return hull.front().value;
    if (cost >= hull.back().cost) return hull.back().value;
    const auto it = std::upper_bound(hull.begin(), hull.end(), cost,
                                     [](double c, const HullPoint& h) { return c < h.cost; });
    const HullPoint& r = *it;
    const HullPoint& l = *(it - 1);
    const double t = (cost - l.cost) / (r.cost - l.cost);
    return l.value + t * (r.value - l.value);
  }
};

// Upper convex hull of the points augmented with (0, 0), (c_max, 0) and
// (c_max, f_max), with each input point's vertical distance below it.
inline HullReport convex_hull_report(std::span<const HullPoint> points) {
  if (points.empty()) throw DegenerateInput("convex hull needs at least one point");
  double c_max = 0.0, f_max = -std::numeric_limits<double>::infinity();
  for (const HullPoint& p : points) {
    if (!std::isfinite(p.cost) || !std::isfinite(p.value)) throw DegenerateInput("hull points must be finite");
    if (p.cost < 0.0) throw DegenerateInput("hull costs must be nonnegative");
    c_max = std::max(c_max, p.cost);
    f_max = std::max(f_max, p.value);
  }
  if (c_max == 0.0) throw DegenerateInput("all costs equal; the hull over cost is degenerate");

  HullReport r;
  r.virtual_points = {{0.0, 0.0}, {c_max, 0.0}, {c_max, f_max}};
  std::vector<HullPoint> all(points.begin(), points.end());
  all.insert(all.end(), r.virtual_points.begin(), r.virtual_points.end());
  std::sort(all.begin(), all.end(), [](const HullPoint& a, const HullPoint& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.value > b.value;
  });
  // Highest value per cost only.
  all.erase(std::unique(all.begin(), all.end(), [](const HullPoint& a, const HullPoint& b) { return a.cost == b.cost; }),
            all.end());

  const auto cross = [](const HullPoint& o, const HullPoint& a, const HullPoint& b) {
    return (a.cost - o.cost) * (b.value - o.value) - (a.value - o.value) * (b.cost - o.cost);
  };
  for (const HullPoint& p : all) {
    while (r.hull.size() >= 2 && cross(r.hull[r.hull.size() - 2], r.hull.back(), p) >= 0.0) r.hull.pop_back();
    r.hull.push_back(p);
  }

  for (const HullPoint& p : points) {
    HullPointStatus s{p, r.hull_value(p.cost), 0.0, false};
    const double gap = s.hull_value - p.value;
    if (gap <= 1e-12 * std::max(1.0, std::abs(s.hull_value))) {
      s.on_hull = true;
    } else {
      s.gap = gap;
    }
    r.points.push_back(s);
  }
  return r;
}

inline json to_json(const MonotonicityWitness& w) {
  return {{"set", assignment_list_json(w.set)},
          {"element", {{"position", w.element.position}, {"type", w.element.type}}},
          {"magnitude", w.magnitude}};
}

inline json to_json(const DiminishingReturnsWitness& w) {
  return {{"smaller", assignment_list_json(w.smaller)},
          {"larger", assignment_list_json(w.larger)},
          {"element", {{"position", w.element.position}, {"type", w.element.type}}},
          {"magnitude", w.magnitude}};
}

inline json to_json(const ViolationReport& r) {
  json mono_w = json::array(), dr_w = json::array();
  for (const auto& w : r.monotonicity_witnesses) mono_w.push_back(to_json(w));
  for (const auto& w : r.dr_witnesses) dr_w.push_back(to_json(w));
  return {{"mode", r.exhaustive ? "exhaustive" : "sampled"},
          {"monotonicity",
           {{"checks", r.monotonicity_checks},
            {"violations", r.monotonicity_violations},
            {"rate", r.monotonicity_rate()},
            {"worst", r.worst_monotonicity ? to_json(*r.worst_monotonicity) : json(nullptr)},
            {"witnesses", mono_w}}},
          {"diminishing_returns",
           {{"checks", r.dr_checks},
            {"violations", r.dr_violations},
            {"rate", r.dr_rate()},
            {"worst", r.worst_dr ? to_json(*r.worst_dr) : json(nullptr)},
            {"witnesses", dr_w}}}};
}

inline json to_json(const ChainReport& r) {
  return {{"gains", r.gains},
          {"monotone", r.monotone()},
          {"monotonicity_violations", r.monotonicity_violations},
          {"dr_violations", r.dr_violations},
          {"strictly_decreasing_gains", r.strictly_decreasing_gains()}};
}

inline json to_json(const HullReport& r) {
  const auto pt = [](const HullPoint& p) { return json{{"cost", p.cost}, {"value", p.value}}; };
  json hull = json::array(), virt = json::array(), pts = json::array();
  for (const auto& p : r.hull) hull.push_back(pt(p));
  for (const auto& p : r.virtual_points) virt.push_back(pt(p));
  for (const auto& s : r.points) {
    pts.push_back({{"cost", s.point.cost},
                   {"value", s.point.value},
                   {"hull_value", s.hull_value},
                   {"gap", s.gap},
                   {"on_hull", s.on_hull}});
  }
  return {{"virtual_points", virt}, {"hull", hull}, {"points", pts}};
}

}  // namespace rcas
