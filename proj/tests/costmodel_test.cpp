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

#include "rcas/costmodel.hpp"
#include "rcas/random.hpp"
#include "test_util.hpp"

namespace rcas {
namespace {

using testing::enumerate_block;

const BlockType kT6{1, Rational{6, 1}, 1, 1, 3, "t6"};
const Position kP16{0, 16, 16, 32, 32, 1};

TEST(BlockCostTest, WorkedExampleMatchesEnumeration) {
  const auto oracle = enumerate_block(kT6, kP16);
  ASSERT_EQ(oracle.params, 3936u);
  ASSERT_EQ(oracle.madds, 4030464u);

  const BlockLayers layers = block_layers(kT6, kP16);
  EXPECT_EQ(layers[0], (LayerCost{LayerKind::expansion, 1536, 1572864}));
  EXPECT_EQ(layers[1], (LayerCost{LayerKind::depthwise, 864, 884736}));
  EXPECT_EQ(layers[2], (LayerCost{LayerKind::projection, 1536, 1572864}));
  EXPECT_EQ(block_cost(kT6, kP16), (Cost{3936, 4030464}));
}

TEST(BlockCostTest, TwoGroupsHalveThePointwiseLayers) {
  BlockType grouped = kT6;
  grouped.expansion_groups = grouped.projection_groups = 2;
  const auto oracle = enumerate_block(grouped, kP16);
  ASSERT_EQ(oracle.params, 2400u);
  EXPECT_EQ(block_cost(grouped, kP16).params, 2400u);
  EXPECT_EQ(block_cost(grouped, kP16).madds, oracle.madds);
}

TEST(BlockCostTest, FullyGroupedExpansionIsPerChannel) {
  const BlockType t{1, Rational{1, 1}, 16, 1, 3, ""};
  EXPECT_EQ(block_layers(t, kP16)[0].params, 16u);
}

TEST(BlockCostTest, RationalExpansion) {
  const BlockType t{1, Rational::make(3, 2), 1, 1, 3, ""};
  const auto oracle = enumerate_block(t, kP16);
  EXPECT_EQ(block_cost(t, kP16), (Cost{oracle.params, oracle.madds}));
}

TEST(BlockCostTest, SweepMatchesEnumeration) {
  for (const BlockType& t : testing::sweep_block_types()) {
    for (const Position& p : testing::sweep_positions()) {
      const auto oracle = enumerate_block(t, p);
      EXPECT_EQ(block_cost(t, p), (Cost{oracle.params, oracle.madds})) << "type " << t.id << " position " << p.index;
    }
  }
}

TEST(BlockCostTest, DivisibilityErrorsNameThePosition) {
  BlockType t = kT6;
  t.expansion_groups = 3;  // does not divide 16
  try {
    block_cost(t, Position{7, 16, 16, 8, 8, 1});
    FAIL() << "expected GroupMismatch";
  } catch (const GroupMismatch& e) {
    EXPECT_EQ(e.position(), 7);
    EXPECT_NE(std::string(e.what()).find("position 7"), std::string::npos);
  }

  BlockType proj = kT6;
  proj.projection_groups = 5;
  EXPECT_THROW(block_cost(proj, kP16), GroupMismatch);

  EXPECT_THROW(block_cost(kT6, Position{0, 16, 16, 9, 9, 2}), GroupMismatch);

  const BlockType half{1, Rational::make(1, 2), 1, 1, 3, ""};
  EXPECT_THROW(block_cost(half, Position{0, 15, 15, 8, 8, 1}), NonIntegerChannels);
}

class AssignmentCostTest : public ::testing::Test {
 protected:
  BlockCatalog cat_{{kT6, BlockType{2, Rational{3, 1}, 2, 2, 3, "t3g2"}}};
  Skeleton sk_{{Position{0, 16, 16, 32, 32, 1}, Position{1, 32, 32, 16, 16, 1}, Position{2, 64, 64, 8, 8, 1}}, 0, 0};
};

TEST_F(AssignmentCostTest, EmptyIsOverhead) {
  EXPECT_EQ(assignment_cost(Assignment{}, sk_, cat_), (Cost{0, 0}));
  const Skeleton with_overhead(sk_.positions(), 1000, 50000);
  EXPECT_EQ(assignment_cost(Assignment{}, with_overhead, cat_), (Cost{1000, 50000}));
}

TEST_F(AssignmentCostTest, SingleAndPairSums) {
  const Assignment one = Assignment{}.add({1, 2});
  EXPECT_EQ(assignment_cost(one, sk_, cat_), block_cost(cat_.at(2), sk_.at(1)));

  const Assignment two = one.add({0, 1});
  const auto o1 = enumerate_block(cat_.at(2), sk_.at(1));
  const auto o0 = enumerate_block(cat_.at(1), sk_.at(0));
  EXPECT_EQ(assignment_cost(two, sk_, cat_), (Cost{o0.params + o1.params, o0.madds + o1.madds}));
}

TEST_F(AssignmentCostTest, ElementCostIsTheIncrement) {
  const Skeleton with_overhead(sk_.positions(), 123, 456);
  const CostTable table = CostTable::from_model(with_overhead, cat_);
  for (const Element& e : table.ground_set()) {
    const Cost one = assignment_cost(Assignment{}.add(e), with_overhead, cat_);
    const Cost none = assignment_cost(Assignment{}, with_overhead, cat_);
    EXPECT_EQ(element_cost(e, with_overhead, cat_), (Cost{one.params - none.params, one.madds - none.madds}));
    EXPECT_EQ(table.element_cost(e), element_cost(e, with_overhead, cat_));
  }
}

TEST_F(AssignmentCostTest, ModularAndMonotone) {
  const CostTable table = CostTable::from_model(sk_, cat_);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Assignment a, b;
    for (int n = 0; n < sk_.size(); ++n) {
      const int l = static_cast<int>(rng.uniform_int(1, 2));
      switch (rng.uniform_int(0, 2)) {
        case 0: a = a.add({n, l}); break;
        case 1: b = b.add({n, l}); break;
        default: break;
      }
    }
    Assignment u = a;
    for (const Element& e : b.elements()) u = u.add(e);
    const Cost lhs = assignment_cost(u, sk_, cat_) + assignment_cost(Assignment{}, sk_, cat_);
    const Cost rhs = assignment_cost(a, sk_, cat_) + assignment_cost(b, sk_, cat_);
    EXPECT_EQ(lhs, rhs);
    const Cost ca = assignment_cost(a, sk_, cat_);
    EXPECT_LE(ca.params, lhs.params);
    EXPECT_LE(ca.madds, lhs.madds);
    EXPECT_EQ(table.assignment_cost(u), assignment_cost(u, sk_, cat_));
  }
}

TEST(CostTableTest, SyntheticCounterexampleCosts) {
  const auto inst = testing::counterexample();
  EXPECT_EQ(inst.costs.element_cost({0, 1}).params, 1u);
  EXPECT_EQ(inst.costs.element_cost({1, 1}).params, 100u);
  EXPECT_THROW(CostTable(2, 2, {Cost{}, Cost{}}), ConfigError);
  EXPECT_THROW(inst.costs.element_cost({2, 1}), Error);
}

TEST(CostTableTest, ModelPropagatesBlockErrors) {
  const BlockCatalog cat({BlockType{1, Rational{1, 1}, 3, 1, 3, ""}});
  const Skeleton sk({Position{0, 6, 6, 4, 4, 1}, Position{1, 8, 8, 4, 4, 1}}, 0, 0);
  try {
    CostTable::from_model(sk, cat);
    FAIL() << "expected GroupMismatch";
  } catch (const GroupMismatch& e) {
    EXPECT_EQ(e.position(), 1);
  }
}

}  // namespace
}  // namespace rcas
