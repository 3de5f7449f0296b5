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

// Budgeted greedy maximization over block assignments.
//
//   run_greedy    eager: every step scores all feasible elements by marginal
//                 gain per unit cost and adds the best one.
//   run_lazy_ceg  the same selection rule with lazily refreshed priority-queue
//                 keys (CELF); identical output when F is submodular.
//   run_rcas      lazy search under uniform, per-parameter and per-MAdd cost,
//                 keeping the best of the three.
//
// Feasibility is checked before an element is added, so every intermediate
// set respects both budgets. Ties are broken by (position, type) ascending.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rcas/costmodel.hpp"
#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/objective.hpp"

namespace rcas {

enum class CostMode { uniform, param_ratio, madds_ratio };

inline constexpr std::array<CostMode, 3> kAllCostModes = {CostMode::uniform, CostMode::param_ratio,
                                                          CostMode::madds_ratio};

inline const char* to_string(CostMode m) {
  switch (m) {
    case CostMode::uniform: return "uc";
    case CostMode::param_ratio: return "apr";
    case CostMode::madds_ratio: return "amr";
  }
  return "?";
}

inline CostMode parse_cost_mode(const std::string& s) {
  if (s == "uc") return CostMode::uniform;
  if (s == "apr") return CostMode::param_ratio;
  if (s == "amr") return CostMode::madds_ratio;
  throw ConfigError("unknown cost mode '" + s + "' (expected uc, apr or amr)");
}

inline std::uint64_t mode_cost(const Cost& c, CostMode m) {
  switch (m) {
    case CostMode::uniform: return 1;
    case CostMode::param_ratio: return c.params;
    case CostMode::madds_ratio: return c.madds;
  }
  return 1;
}

// Gain per unit cost. Zero-cost elements are `free`: they rank above every
// finite ratio and among themselves by raw gain.
struct RatioKey {
  bool free = false;
  double value = 0.0;

  static RatioKey of(double gain, std::uint64_t cost) {
    if (cost == 0) return {true, gain};
    return {false, gain / static_cast<double>(cost)};
  }

  double as_double() const {
    if (!free) return value;
    return value >= 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }

  friend bool operator==(const RatioKey&, const RatioKey&) = default;
};

// Strictly greater key.
inline bool ranks_above(const RatioKey& a, const RatioKey& b) {
  if (a.free != b.free) return a.free;
  return a.value > b.value;
}

struct QueueEntry {
  Element element;
  RatioKey key;
  std::size_t freshness = 0;  // |S| when the key was computed
  double gain = 0.0;
};

// Strict total order: larger key first, then smaller (position, type).
inline bool comes_before(const Element& a, const RatioKey& ka, const Element& b, const RatioKey& kb) {
  if (ranks_above(ka, kb)) return true;
  if (ranks_above(kb, ka)) return false;
  return a < b;
}

inline bool comes_before(const QueueEntry& a, const QueueEntry& b) {
  return comes_before(a.element, a.key, b.element, b.key);
}

struct SearchOptions {
  Fidelity fidelity;
  bool stop_on_nonpositive_gain = false;
  // Lazy acceptance against a freshly recomputed gain of the queue top instead
  // of its stored key.
  bool paper_literal_lazy = false;
  bool parallel_first_pass = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

// The instance a search runs on: element costs, budgets and the ground set.
struct Problem {
  CostTable costs;
  Budget budget;
  std::vector<Element> ground;

  Problem(CostTable table, Budget b) : Problem(table, b, table.ground_set()) {}
  Problem(CostTable table, Budget b, std::vector<Element> v)
      : costs(std::move(table)), budget(b), ground(std::move(v)) {
    std::sort(ground.begin(), ground.end());
    ground.erase(std::unique(ground.begin(), ground.end()), ground.end());
    for (const Element& e : ground) {
      if (!costs.valid(e)) throw ConfigError("ground set element " + to_string(e) + " outside the cost table");
    }
    if (!budget.admits(costs.base())) {
      throw ConfigError("fixed overhead (" + std::to_string(costs.base().params) + " params, " +
                        std::to_string(costs.base().madds) + " madds) exceeds the budget");
    }
  }
};

// Largest number of copies of any single feasible element that fits either
// budget; bounds the number of greedy steps. Infinite if such an element is
// free in some resource.
inline double compute_phi(const Problem& p) {
  double phi = 0.0;
  for (const Element& e : p.ground) {
    const Cost& c = p.costs.element_cost(e);
    if (!p.budget.admits(p.costs.base() + c)) continue;
    const auto ratio = [](std::uint64_t budget, std::uint64_t cost) {
      return cost == 0 ? std::numeric_limits<double>::infinity()
                       : static_cast<double>(budget) / static_cast<double>(cost);
    };
    phi = std::max({phi, ratio(p.budget.max_params, c.params), ratio(p.budget.max_madds, c.madds)});
  }
  return phi;
}

struct SearchStats {
  std::uint64_t evaluations = 0;  // objective cache misses during the run
  std::uint64_t lookups = 0;      // all objective calls, cached or not
  std::uint64_t queue_pops = 0;
  std::uint64_t reinserts = 0;
  double phi = 0.0;
  std::chrono::nanoseconds wall_time{0};
};

enum class TraceAction { evaluate, accept, reinsert, skip_infeasible };

inline const char* to_string(TraceAction a) {
  switch (a) {
    case TraceAction::evaluate: return "evaluate";
    case TraceAction::accept: return "accept";
    case TraceAction::reinsert: return "reinsert";
    case TraceAction::skip_infeasible: return "skip_infeasible";
  }
  return "?";
}

// One step of a search. For `evaluate` the F/params/madds columns describe the
// candidate set S + element; for `accept` the new S; otherwise the current S.
struct TraceEvent {
  std::size_t step = 0;
  TraceAction action = TraceAction::evaluate;
  Element element;
  std::optional<RatioKey> key_before;
  std::optional<RatioKey> key_after;
  double f_after = 0.0;
  std::uint64_t params_after = 0;
  std::uint64_t madds_after = 0;
  std::uint64_t evaluations = 0;
};

struct SearchResult {
  Assignment assignment;
  double value = 0.0;         // F at full fidelity
  double search_value = 0.0;  // F at the search fidelity
  Cost cost;
  CostMode mode = CostMode::uniform;
  SearchStats stats;
  std::vector<TraceEvent> trace;
};

// Block types of the filled positions, in position order.
inline std::vector<int> block_sequence(const Assignment& a) {
  std::vector<int> seq;
  for (const auto& [n, l] : a.filled()) seq.push_back(l);
  return seq;
}

namespace detail {

class Run {
 public:
  Run(CachedObjective& f, const Problem& p, CostMode mode, const SearchOptions& opts)
      : f_(f), p_(p), mode_(mode), opts_(opts), start_(std::chrono::steady_clock::now()),
        misses0_(f.misses()), calls0_(f.calls()), cost_(p.costs.base()) {
    f_s_ = f_.evaluate(s_, opts_.fidelity);
  }

  const Assignment& current() const { return s_; }
  double current_value() const { return f_s_; }

  bool fits(const Element& e) const {
    return !s_.occupied(e.position) && p_.budget.admits(cost_ + p_.costs.element_cost(e));
  }

  std::uint64_t unit_cost(const Element& e) const { return mode_cost(p_.costs.element_cost(e), mode_); }

  // Scores `e` against the current set and logs the evaluation.
  QueueEntry score(const Element& e, std::optional<RatioKey> stale = std::nullopt) {
    const double f_new = f_.evaluate(s_.add(e), opts_.fidelity);
    return record_score(e, f_new, stale);
  }

  QueueEntry record_score(const Element& e, double f_new, std::optional<RatioKey> stale) {
    const double gain = f_new - f_s_;
    QueueEntry q{e, RatioKey::of(gain, unit_cost(e)), s_.size(), gain};
    const Cost c = cost_ + p_.costs.element_cost(e);
    push({0, TraceAction::evaluate, e, stale, q.key, f_new, c.params, c.madds, 0});
    return q;
  }

  // Returns false when the stop-on-nonpositive-gain rule ends the search.
  bool accept(const QueueEntry& q) {
    if (opts_.stop_on_nonpositive_gain && q.gain <= 0.0) return false;
    s_ = s_.add(q.element);
    cost_ += p_.costs.element_cost(q.element);
    f_s_ = f_.evaluate(s_, opts_.fidelity);
    push({0, TraceAction::accept, q.element, q.key, q.key, f_s_, cost_.params, cost_.madds, 0});
    return true;
  }

  void note(TraceAction action, const Element& e, std::optional<RatioKey> before, std::optional<RatioKey> after) {
    push({0, action, e, before, after, f_s_, cost_.params, cost_.madds, 0});
  }

  SearchResult finish(std::uint64_t pops, std::uint64_t reinserts) {
    SearchResult r;
    r.stats.evaluations = f_.misses() - misses0_;
    r.stats.lookups = f_.calls() - calls0_;
    r.stats.queue_pops = pops;
    r.stats.reinserts = reinserts;
    r.stats.phi = compute_phi(p_);
    r.assignment = s_;
    r.search_value = f_s_;
    r.value = opts_.fidelity.level == 1.0 ? f_s_ : f_.evaluate(s_, Fidelity{1.0});
    r.cost = cost_;
    r.mode = mode_;
    r.trace = std::move(trace_);
    r.stats.wall_time = std::chrono::steady_clock::now() - start_;
    return r;
  }

 private:
  void push(TraceEvent ev) {
    ev.step = trace_.size();
    ev.evaluations = f_.misses() - misses0_;
    trace_.push_back(ev);
  }

  CachedObjective& f_;
  const Problem& p_;
  CostMode mode_;
  const SearchOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t misses0_;
  std::uint64_t calls0_;
  Assignment s_;
  double f_s_ = 0.0;
  Cost cost_;
  std::vector<TraceEvent> trace_;
};

// F({v}) for every candidate, optionally spread over threads.
inline std::vector<double> singleton_values(CachedObjective& f, std::span<const Element> candidates,
                                            const SearchOptions& opts) {
  std::vector<double> out(candidates.size());
  unsigned threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  if (!opts.parallel_first_pass || !f.concurrency_safe() || threads < 2 || candidates.size() < 2) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      out[i] = f.evaluate(Assignment{}.add(candidates[i]), opts.fidelity);
    }
    return out;
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(candidates.size()));
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < candidates.size(); i += threads) {
            out[i] = f.evaluate(Assignment{}.add(candidates[i]), opts.fidelity);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace detail

inline SearchResult run_greedy(CachedObjective& f, const Problem& p, CostMode mode, const SearchOptions& opts = {}) {
  detail::Run run(f, p, mode, opts);
  std::uint64_t rounds = 0;
  while (true) {
    std::optional<QueueEntry> best;
    for (const Element& e : p.ground) {
      if (!run.fits(e)) continue;
      const QueueEntry q = run.score(e);
      if (!best || comes_before(q, *best)) best = q;
    }
    if (!best) break;
    ++rounds;
    if (!run.accept(*best)) break;
  }
  return run.finish(rounds, 0);
}

inline SearchResult run_lazy_ceg(CachedObjective& f, const Problem& p, CostMode mode,
                                 const SearchOptions& opts = {}) {
  detail::Run run(f, p, mode, opts);
  const auto later = [](const QueueEntry& a, const QueueEntry& b) { return comes_before(b, a); };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, decltype(later)> queue(later);

  std::vector<Element> candidates;
  for (const Element& e : p.ground) {
    if (run.fits(e)) candidates.push_back(e);
  }
  const std::vector<double> first = detail::singleton_values(f, candidates, opts);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    queue.push(run.record_score(candidates[i], first[i], std::nullopt));
  }

  std::uint64_t pops = 0, reinserts = 0;
  while (!queue.empty()) {
    QueueEntry top = queue.top();
    queue.pop();
    ++pops;
    // Cost only grows, so an element that no longer fits never will again.
    if (!run.fits(top.element)) {
      run.note(TraceAction::skip_infeasible, top.element, top.key, std::nullopt);
      continue;
    }
    if (top.freshness == run.current().size()) {
      if (!run.accept(top)) break;
      continue;
    }

    const RatioKey stale = top.key;
    top = run.score(top.element, stale);

    bool take = queue.empty();
    if (!take) {
      const QueueEntry& next = queue.top();
      if (!opts.paper_literal_lazy) {
        take = comes_before(top, next);
      } else if (!run.fits(next.element)) {
        take = true;
      } else {
        const double next_gain = f.marginal_gain(run.current(), next.element, opts.fidelity);
        const RatioKey next_key = RatioKey::of(next_gain, run.unit_cost(next.element));
        take = !ranks_above(next_key, top.key);
      }
    }
    if (take) {
      if (!run.accept(top)) break;
    } else {
      queue.push(top);
      ++reinserts;
      run.note(TraceAction::reinsert, top.element, stale, top.key);
    }
  }
  return run.finish(pops, reinserts);
}

struct RcasResult {
  SearchResult best;
  CostMode winner = CostMode::uniform;
  std::array<std::optional<SearchResult>, 3> modes;  // indexed as kAllCostModes
  std::array<double, 3> refined_values{};            // F at the refine fidelity; NaN for failed modes
  std::array<std::string, 3> failures;
  bool warning = false;
  std::uint64_t evaluations = 0;
};

inline std::size_t mode_slot(CostMode m) { return static_cast<std::size_t>(m); }

// Lazy search under each cost mode; the winner is the highest F at
// `refine_fidelity`, ties resolved in the order uc, apr, amr. A failing mode
// is recorded and skipped; if every mode fails the last failure propagates.
inline RcasResult run_rcas(CachedObjective& f, const Problem& p, const SearchOptions& opts = {},
                           Fidelity refine_fidelity = {}) {
  RcasResult out;
  out.refined_values.fill(std::numeric_limits<double>::quiet_NaN());
  const std::uint64_t misses0 = f.misses();
  std::exception_ptr last_failure;
  std::optional<std::size_t> best;
  for (CostMode mode : kAllCostModes) {
    const std::size_t i = mode_slot(mode);
    try {
      SearchResult r = run_lazy_ceg(f, p, mode, opts);
      const double refined =
          refine_fidelity.level == 1.0 ? r.value : f.evaluate(r.assignment, refine_fidelity);
      out.refined_values[i] = refined;
      out.modes[i] = std::move(r);
      if (!best || refined > out.refined_values[*best]) best = i;
    } catch (const EvaluatorFailure& e) {
      out.failures[i] = e.what();
      out.warning = true;
      last_failure = std::current_exception();
    }
  }
  if (!best) std::rethrow_exception(last_failure);
  out.winner = kAllCostModes[*best];
  out.best = *out.modes[*best];
  out.evaluations = f.misses() - misses0;
  return out;
}

// Rebuilds the selected set from the accept events of a trace.
inline Assignment replay_trace(std::span<const TraceEvent> trace) {
  Assignment a;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& ev = trace[i];
    if (i > 0 && ev.step <= trace[i - 1].step) {
      throw TraceCorrupt("trace steps not increasing at event " + std::to_string(i));
    }
    if (ev.action != TraceAction::accept) continue;
    if (ev.element.position < 0 || ev.element.type < 1) {
      throw TraceCorrupt("invalid element in accept event " + std::to_string(ev.step));
    }
    if (a.occupied(ev.element.position)) {
      throw TraceCorrupt("accept event " + std::to_string(ev.step) + " fills occupied position " +
                         std::to_string(ev.element.position));
    }
    a = a.add(ev.element);
  }
  return a;
}

}  // namespace rcas
