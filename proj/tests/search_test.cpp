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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "rcas/search.hpp"
#include "rcas/synthetic.hpp"
#include "test_util.hpp"

namespace rcas {
namespace {

using testing::OracleKind;

const Element kCheap{0, 1}, kBig{1, 1};

TEST(CounterexampleTest, RatioGreedyIsFooledUniformIsNot) {
  const auto inst = testing::counterexample();
  const Problem p = inst.problem();
  CachedObjective f(inst.objective);
  for (auto run : {run_greedy, run_lazy_ceg}) {
    const auto apr = run(f, p, CostMode::param_ratio, {});
    EXPECT_EQ(apr.value, 3.0);
    EXPECT_EQ(apr.assignment, Assignment{}.add(kCheap));
    const auto uc = run(f, p, CostMode::uniform, {});
    EXPECT_EQ(uc.value, 200.0);
    EXPECT_EQ(uc.assignment, Assignment{}.add(kBig));
    EXPECT_EQ(run(f, p, CostMode::madds_ratio, {}).value, 3.0);
  }
  const RcasResult r = run_rcas(f, p);
  EXPECT_EQ(r.best.value, 200.0);
  EXPECT_EQ(r.winner, CostMode::uniform);
  EXPECT_FALSE(r.warning);
}

TEST(PhiTest, CounterexampleAndFreeElements) {
  const auto inst = testing::counterexample();
  EXPECT_EQ(compute_phi(inst.problem()), 1'000'000.0);
  const Problem free_p(CostTable(1, 2, {Cost{0, 5}, Cost{3, 3}}), Budget{9, 10});
  EXPECT_TRUE(std::isinf(compute_phi(free_p)));
  const Problem nothing_fits(CostTable(1, 1, {Cost{10, 10}}), Budget{9, 9});
  EXPECT_EQ(compute_phi(nothing_fits), 0.0);
}

TEST(SearchTest, ZeroBudgetGivesEmptyAssignment) {
  auto inst = testing::random_instance(3, 4, 3, OracleKind::coverage);
  inst.budget = {0, 0};
  CachedObjective f(inst.objective);
  for (CostMode m : kAllCostModes) {
    const auto r = run_lazy_ceg(f, inst.problem(), m);
    EXPECT_TRUE(r.assignment.empty());
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.cost, Cost{});
    EXPECT_TRUE(run_greedy(f, inst.problem(), m).assignment.empty());
  }
}

TEST(SearchTest, OverheadAboveBudgetIsRejected) {
  EXPECT_THROW(Problem(CostTable(1, 1, {Cost{1, 1}}, Cost{50, 0}), Budget{49, 100}), ConfigError);
  EXPECT_NO_THROW(Problem(CostTable(1, 1, {Cost{1, 1}}, Cost{50, 0}), Budget{50, 100}));
}

TEST(SearchTest, SingleElementGroundSet) {
  const ElementIndex idx(1, 1);
  auto f_ptr = std::make_shared<ModularOracle>(idx, std::vector<double>{0.5});
  CachedObjective f(f_ptr);
  const CostTable t(1, 1, {Cost{10, 20}});
  EXPECT_EQ(run_lazy_ceg(f, Problem(t, Budget{10, 20}), CostMode::param_ratio).assignment,
            Assignment{}.add({0, 1}));
  EXPECT_TRUE(run_lazy_ceg(f, Problem(t, Budget{10, 19}), CostMode::param_ratio).assignment.empty());
  EXPECT_TRUE(run_greedy(f, Problem(t, Budget{9, 20}), CostMode::uniform).assignment.empty());
}

TEST(SearchTest, FreeElementsRankFirst) {
  // Type 1 costs nothing but gains little; type 2 has a far better ratio.
  const ElementIndex idx(2, 2);
  CachedObjective f(std::make_shared<ModularOracle>(idx, std::vector<double>{0.01, 0.9, 0.02, 0.03}));
  const Problem p(CostTable(2, 2, {Cost{0, 0}, Cost{1, 1}, Cost{0, 0}, Cost{5, 5}}), Budget{1, 1});
  const auto r = run_lazy_ceg(f, p, CostMode::param_ratio);
  // Both positions get their free type before anything paid is considered.
  EXPECT_EQ(r.assignment, Assignment{}.add({0, 1}).add({1, 1}));
  EXPECT_EQ(r.trace.front().action, TraceAction::evaluate);
  std::vector<Element> accepted;
  for (const auto& ev : r.trace) {
    if (ev.action == TraceAction::accept) accepted.push_back(ev.element);
  }
  ASSERT_EQ(accepted.size(), 2u);
  EXPECT_EQ(accepted[0], (Element{1, 1}));  // larger free gain first
  EXPECT_EQ(run_greedy(f, p, CostMode::param_ratio).assignment, r.assignment);
}

TEST(SearchTest, RestrictedGroundSetIsRespected) {
  const auto inst = testing::random_instance(8, 4, 3, OracleKind::coverage);
  const std::vector<Element> ground{{0, 2}, {2, 1}, {3, 3}};
  const Problem p(inst.costs, Budget{1000, 1000}, ground);
  CachedObjective f(inst.objective);
  for (const Element& e : run_lazy_ceg(f, p, CostMode::uniform).assignment.elements()) {
    EXPECT_NE(std::find(ground.begin(), ground.end(), e), ground.end()) << to_string(e);
  }
}

TEST(SearchTest, NegativeGainsAreEligibleUnlessStopped) {
  std::map<Assignment, double> table{{Assignment{}, 0.5}, {Assignment{}.add({0, 1}), 0.25}};
  auto backend = std::make_shared<TableOracle>(table);
  const Problem p(CostTable(1, 1, {Cost{1, 1}}), Budget{1, 1});
  CachedObjective f(backend);
  EXPECT_EQ(run_lazy_ceg(f, p, CostMode::uniform).assignment.size(), 1u);
  EXPECT_EQ(run_greedy(f, p, CostMode::uniform).assignment.size(), 1u);
  SearchOptions stop;
  stop.stop_on_nonpositive_gain = true;
  EXPECT_TRUE(run_lazy_ceg(f, p, CostMode::uniform, stop).assignment.empty());
  EXPECT_TRUE(run_greedy(f, p, CostMode::uniform, stop).assignment.empty());
}

TEST(SearchTest, EagerMatchesIndependentReplay) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto kind = static_cast<OracleKind>(seed % 3);
    const auto inst = testing::random_instance(seed, 5, 3, kind, kind == OracleKind::surrogate ? 0.1 : 0.0);
    const Problem p = inst.problem();
    for (CostMode m : kAllCostModes) {
      SearchOptions opts;
      opts.fidelity = Fidelity{kind == OracleKind::surrogate ? 0.5 : 1.0};
      CachedObjective f(inst.objective);
      const auto got = run_greedy(f, p, m, opts);
      const auto want = testing::reference_greedy(testing::raw(inst.objective, opts.fidelity), p.costs, p.budget, m,
                                                  p.ground);
      ASSERT_EQ(got.assignment, want) << "seed " << seed << " mode " << to_string(m);
      EXPECT_EQ(got.value, inst.objective->compute(got.assignment, Fidelity{1.0}));
    }
  }
}

TEST(SearchTest, LazyEqualsEagerOnSubmodularInstances) {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const auto kind = seed % 2 ? OracleKind::coverage : OracleKind::concave_modular;
    const auto inst = testing::random_instance(1000 + seed, 6, 3, kind);
    for (CostMode m : kAllCostModes) {
      CachedObjective fe(inst.objective), fl(inst.objective);
      const auto eager = run_greedy(fe, inst.problem(), m);
      const auto lazy = run_lazy_ceg(fl, inst.problem(), m);
      ASSERT_EQ(lazy.assignment, eager.assignment) << "seed " << seed << " mode " << to_string(m);
      EXPECT_EQ(lazy.value, eager.value);
      EXPECT_LE(lazy.stats.evaluations, eager.stats.evaluations);
    }
  }
}

TEST(SearchTest, EagerEvaluationBound) {
  const auto inst = testing::random_instance(77, 6, 3, OracleKind::coverage);
  CachedObjective f(inst.objective);
  const auto r = run_greedy(f, inst.problem(), CostMode::uniform);
  const std::uint64_t v = 18;
  EXPECT_LE(r.stats.evaluations, 1 + v + r.assignment.size() * v);
}

void expect_well_formed(const SearchResult& r, const Problem& p) {
  ASSERT_LE(r.cost.params, p.budget.max_params);
  ASSERT_LE(r.cost.madds, p.budget.max_madds);
  ASSERT_EQ(r.cost, p.costs.assignment_cost(r.assignment));
  ASSERT_EQ(replay_trace(r.trace), r.assignment);
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    ASSERT_EQ(r.trace[i].step, i);
    ASSERT_LE(r.trace[i].params_after, p.budget.max_params);
    ASSERT_LE(r.trace[i].madds_after, p.budget.max_madds);
    if (i > 0) {
      ASSERT_GE(r.trace[i].evaluations, r.trace[i - 1].evaluations);
    }
  }
}

TEST(SearchTest, SupermodularInstanceStaysFeasible) {
  auto backend = testing::supermodular_pair();
  const Problem p(CostTable(2, 1, {Cost{1, 1}, Cost{1, 1}}), Budget{2, 2});
  for (bool literal : {false, true}) {
    SearchOptions opts;
    opts.paper_literal_lazy = literal;
    for (CostMode m : kAllCostModes) {
      CachedObjective f(backend);
      const auto r = run_lazy_ceg(f, p, m, opts);
      expect_well_formed(r, p);
      EXPECT_EQ(r.value, 0.875);
    }
  }
}

TEST(SearchTest, BudgetAndTraceProperties) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto kind = static_cast<OracleKind>(seed % 3);
    const auto inst = testing::random_instance(5000 + seed, 2 + static_cast<int>(seed % 6), 1 + static_cast<int>(seed % 4),
                                               kind, 0.3);
    const Problem p = inst.problem();
    SearchOptions opts;
    opts.fidelity = Fidelity{seed % 2 ? 0.3 : 1.0};
    opts.paper_literal_lazy = seed % 5 == 0;
    CachedObjective f(inst.objective);
    for (CostMode m : kAllCostModes) {
      expect_well_formed(run_lazy_ceg(f, p, m, opts), p);
      expect_well_formed(run_greedy(f, p, m, opts), p);
    }
    const auto r = run_rcas(f, p, opts);
    expect_well_formed(r.best, p);
  }
}

TEST(SearchTest, DeterministicAcrossFreshCaches) {
  const auto inst = testing::random_instance(42, 8, 4, OracleKind::surrogate, 0.2);
  SearchOptions opts;
  opts.fidelity = Fidelity{0.4};
  CachedObjective a(inst.objective), b(inst.objective);
  const auto ra = run_lazy_ceg(a, inst.problem(), CostMode::madds_ratio, opts);
  const auto rb = run_lazy_ceg(b, inst.problem(), CostMode::madds_ratio, opts);
  EXPECT_EQ(ra.assignment, rb.assignment);
  ASSERT_EQ(ra.trace.size(), rb.trace.size());
  for (std::size_t i = 0; i < ra.trace.size(); ++i) {
    EXPECT_EQ(ra.trace[i].element, rb.trace[i].element);
    EXPECT_EQ(ra.trace[i].action, rb.trace[i].action);
    EXPECT_EQ(ra.trace[i].f_after, rb.trace[i].f_after);
  }
}

TEST(SearchTest, ParallelFirstPassChangesNothing) {
  const auto inst = testing::random_instance(11, 10, 4, OracleKind::concave_modular);
  SearchOptions par;
  par.parallel_first_pass = true;
  par.threads = 4;
  CachedObjective a(inst.objective), b(inst.objective);
  const auto serial = run_lazy_ceg(a, inst.problem(), CostMode::param_ratio);
  const auto parallel = run_lazy_ceg(b, inst.problem(), CostMode::param_ratio, par);
  EXPECT_EQ(serial.assignment, parallel.assignment);
  EXPECT_EQ(serial.stats.evaluations, parallel.stats.evaluations);
  EXPECT_EQ(serial.trace.size(), parallel.trace.size());
}

TEST(ReplayTraceTest, DetectsCorruption) {
  std::vector<TraceEvent> t(2);
  t[0] = {0, TraceAction::accept, {1, 2}};
  t[1] = {1, TraceAction::accept, {1, 3}};
  EXPECT_THROW(replay_trace(t), TraceCorrupt);
  t[1] = {0, TraceAction::accept, {2, 3}};
  EXPECT_THROW(replay_trace(t), TraceCorrupt);
  t[1] = {1, TraceAction::reinsert, {1, 3}};
  EXPECT_EQ(replay_trace(t), Assignment{}.add({1, 2}));
}

// Fails the first `n` backend calls, then defers to `inner`.
class FlakyObjective final : public Objective {
 public:
  FlakyObjective(std::shared_ptr<Objective> inner, int n) : inner_(std::move(inner)), left_(n) {}
  std::string name() const override { return "flaky"; }
  double compute(const Assignment& a, Fidelity fid) override {
    if (left_-- > 0) throw EvaluatorFailure("transient failure");
    return inner_->compute(a, fid);
  }
  ScoreRange score_range() const override { return inner_->score_range(); }

 private:
  std::shared_ptr<Objective> inner_;
  std::atomic<int> left_;
};

TEST(RcasTest, FailedModeIsRecordedAndSkipped) {
  const auto inst = testing::counterexample();
  CachedObjective f(std::make_shared<FlakyObjective>(inst.objective, 1));
  const RcasResult r = run_rcas(f, inst.problem());
  EXPECT_TRUE(r.warning);
  EXPECT_FALSE(r.modes[mode_slot(CostMode::uniform)].has_value());
  EXPECT_NE(r.failures[0].find("transient"), std::string::npos);
  EXPECT_TRUE(std::isnan(r.refined_values[0]));
  EXPECT_EQ(r.winner, CostMode::param_ratio);
  EXPECT_EQ(r.best.value, 3.0);
}

TEST(RcasTest, AllModesFailingPropagates) {
  const auto inst = testing::counterexample();
  CachedObjective f(std::make_shared<FlakyObjective>(inst.objective, 1'000'000));
  EXPECT_THROW(run_rcas(f, inst.problem()), EvaluatorFailure);
}

TEST(RcasTest, WinnerIsBestRefinedValueWithModeOrderTies) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = testing::random_instance(300 + seed, 5, 3, OracleKind::coverage);
    CachedObjective f(inst.objective);
    const RcasResult r = run_rcas(f, inst.problem());
    double best = -1.0;
    std::size_t slot = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      ASSERT_TRUE(r.modes[i].has_value());
      if (r.refined_values[i] > best) {
        best = r.refined_values[i];
        slot = i;
      }
    }
    EXPECT_EQ(r.winner, kAllCostModes[slot]);
    EXPECT_EQ(r.best.value, best);
    EXPECT_EQ(r.evaluations, f.misses());
  }
}

TEST(RcasTest, RefineFidelityScoresTheWinners) {
  const auto inst = testing::random_instance(9, 6, 3, OracleKind::surrogate, 0.5);
  SearchOptions opts;
  opts.fidelity = Fidelity{0.2};
  CachedObjective f(inst.objective);
  const RcasResult r = run_rcas(f, inst.problem(), opts, Fidelity{0.6});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.refined_values[i], inst.objective->compute(r.modes[i]->assignment, Fidelity{0.6}));
  }
}

}  // namespace
}  // namespace rcas
