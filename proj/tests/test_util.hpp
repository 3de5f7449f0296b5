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

// Independent reference implementations and instance generators shared by the
// test suites. Nothing here goes through the engine code paths it checks.

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "rcas/rcas.hpp"

namespace rcas::testing {

// Counts convolution weights and multiply-adds by materializing every weight
// index and visiting every output pixel.
struct EnumeratedCost {
  std::uint64_t params = 0;
  std::uint64_t madds = 0;
};

inline EnumeratedCost enumerate_grouped_1x1(std::int64_t in_ch, std::int64_t out_ch, std::int64_t groups,
                                            std::int64_t h, std::int64_t w, std::int64_t stride) {
  std::vector<std::pair<std::int64_t, std::int64_t>> weights;  // (out, in)
  const std::int64_t out_per_group = out_ch / groups, in_per_group = in_ch / groups;
  for (std::int64_t o = 0; o < out_ch; ++o) {
    const std::int64_t g = o / out_per_group;
    for (std::int64_t i = g * in_per_group; i < (g + 1) * in_per_group; ++i) weights.emplace_back(o, i);
  }
  EnumeratedCost c;
  c.params = weights.size();
  for (std::int64_t y = 0; y < h; y += stride) {
    for (std::int64_t x = 0; x < w; x += stride) {
      for (std::size_t k = 0; k < weights.size(); ++k) ++c.madds;
    }
  }
  return c;
}

inline EnumeratedCost enumerate_depthwise(std::int64_t channels, std::int64_t kernel, std::int64_t h, std::int64_t w,
                                          std::int64_t stride) {
  std::vector<std::array<std::int64_t, 3>> weights;  // (channel, ky, kx)
  for (std::int64_t c = 0; c < channels; ++c) {
    for (std::int64_t ky = 0; ky < kernel; ++ky) {
      for (std::int64_t kx = 0; kx < kernel; ++kx) weights.push_back({c, ky, kx});
    }
  }
  EnumeratedCost out;
  out.params = weights.size();
  for (std::int64_t y = 0; y < h; y += stride) {
    for (std::int64_t x = 0; x < w; x += stride) {
      for (std::size_t k = 0; k < weights.size(); ++k) ++out.madds;
    }
  }
  return out;
}

// Whole block: expansion at full resolution, then the strided depthwise, then
// the projection on the strided map.
inline EnumeratedCost enumerate_block(const BlockType& t, const Position& p) {
  const std::int64_t expanded = p.in_channels * t.expansion.num / t.expansion.den;
  const auto e = enumerate_grouped_1x1(p.in_channels, expanded, t.expansion_groups, p.height, p.width, 1);
  const auto d = enumerate_depthwise(expanded, t.kernel, p.height, p.width, p.stride);
  const std::int64_t oh = (p.height + p.stride - 1) / p.stride, ow = (p.width + p.stride - 1) / p.stride;
  const auto pr = enumerate_grouped_1x1(expanded, p.out_channels, t.projection_groups, oh, ow, 1);
  return {e.params + d.params + pr.params, e.madds + d.madds + pr.madds};
}

// Catalog and positions spanning t in {1, 3, 6}, groups 1..4 and strides 1..2.
inline std::vector<BlockType> sweep_block_types() {
  std::vector<BlockType> out;
  int id = 1;
  for (std::int64_t t : {1, 3, 6}) {
    for (int g : {1, 2, 4}) out.push_back({id++, Rational{t, 1}, g, g, 3, ""});
  }
  out.push_back({id++, Rational{6, 1}, 1, 2, 3, ""});
  out.push_back({id++, Rational{3, 1}, 4, 1, 5, ""});
  out.push_back({id++, Rational{3, 2}, 4, 2, 3, ""});
  return out;
}

inline std::vector<Position> sweep_positions() {
  return {Position{0, 16, 16, 8, 8, 1}, Position{1, 16, 24, 8, 8, 2}, Position{2, 8, 8, 16, 16, 1},
          Position{3, 32, 16, 4, 4, 2}, Position{4, 24, 48, 6, 6, 2}};
}

using RawF = std::function<double(const Assignment&)>;

inline RawF raw(std::shared_ptr<Objective> f, Fidelity fid = {}) {
  return [f, fid](const Assignment& a) { return f->compute(a, fid); };
}

// Eager greedy replay written from scratch: recomputes F without caching and
// picks the best ratio with explicit tie handling.
inline Assignment reference_greedy(const RawF& f, const CostTable& costs, const Budget& budget, CostMode mode,
                                   const std::vector<Element>& ground) {
  Assignment s;
  Cost spent = costs.base();
  while (true) {
    std::optional<Element> best;
    bool best_free = false;
    double best_val = 0.0;
    const double fs = f(s);
    for (const Element& e : ground) {
      if (s.occupied(e.position)) continue;
      const Cost c = costs.element_cost(e);
      if (spent.params + c.params > budget.max_params || spent.madds + c.madds > budget.max_madds) continue;
      const double gain = f(s.add(e)) - fs;
      const std::uint64_t unit = mode == CostMode::uniform ? 1 : mode == CostMode::param_ratio ? c.params : c.madds;
      const bool is_free = unit == 0;
      const double val = is_free ? gain : gain / static_cast<double>(unit);
      bool better = false;
      if (!best) {
        better = true;
      } else if (is_free != best_free) {
        better = is_free;
      } else if (val != best_val) {
        better = val > best_val;
      } else {
        better = e < *best;
      }
      if (better) {
        best = e;
        best_free = is_free;
        best_val = val;
      }
    }
    if (!best) return s;
    s = s.add(*best);
    spent = spent + costs.element_cost(*best);
  }
}

// Recursive exhaustive search; first maximum in position-major, empty-first
// order wins.
inline std::pair<Assignment, double> reference_opt(const RawF& f, const CostTable& costs, const Budget& budget) {
  std::optional<std::pair<Assignment, double>> best;
  std::function<void(int, const Assignment&)> walk = [&](int n, const Assignment& a) {
    if (n == costs.positions()) {
      if (!budget.admits(costs.assignment_cost(a))) return;
      const double v = f(a);
      if (!best || v > best->second) best = {a, v};
      return;
    }
    walk(n + 1, a);
    for (int l = 1; l <= costs.types(); ++l) walk(n + 1, a.add({n, l}));
  };
  walk(0, Assignment{});
  return *best;
}

// Upper concave envelope by brute force over all point pairs.
inline double reference_envelope(const std::vector<HullPoint>& pts, double c) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : pts) {
    if (a.cost == c) best = std::max(best, a.value);
    for (const auto& b : pts) {
      if (a.cost < c && c < b.cost) {
        const double t = (c - a.cost) / (b.cost - a.cost);
        best = std::max(best, a.value + t * (b.value - a.value));
      }
    }
  }
  return best;
}

struct Instance {
  CostTable costs;
  Budget budget;
  std::shared_ptr<Objective> objective;

  Problem problem() const { return Problem(costs, budget); }
};

enum class OracleKind { coverage, concave_modular, surrogate };

// Random N x L instance: integer element costs in [1, 100] for both
// resources and budgets drawn between the cheapest element and the total.
inline Instance random_instance(std::uint64_t seed, int n, int l, OracleKind kind, double sigma = 0.0) {
  Rng rng(seed);
  const ElementIndex index(n, l);
  std::vector<Cost> costs(index.size());
  std::uint64_t sum_p = 0, sum_m = 0, min_p = UINT64_MAX, min_m = UINT64_MAX;
  for (Cost& c : costs) {
    c.params = static_cast<std::uint64_t>(rng.uniform_int(1, 100));
    c.madds = static_cast<std::uint64_t>(rng.uniform_int(1, 100));
    sum_p += c.params;
    sum_m += c.madds;
    min_p = std::min(min_p, c.params);
    min_m = std::min(min_m, c.madds);
  }
  Budget b{static_cast<std::uint64_t>(rng.uniform_int(static_cast<std::int64_t>(min_p), static_cast<std::int64_t>(sum_p / 2 + min_p))),
           static_cast<std::uint64_t>(rng.uniform_int(static_cast<std::int64_t>(min_m), static_cast<std::int64_t>(sum_m / 2 + min_m)))};
  std::shared_ptr<Objective> f;
  switch (kind) {
    case OracleKind::coverage:
      f = random_coverage(index, static_cast<int>(rng.uniform_int(4, 24)), rng.uniform(0.05, 0.4), rng);
      break;
    case OracleKind::concave_modular:
      f = random_concave_modular(index, static_cast<int>(rng.uniform_int(2, 10)), rng.uniform(0.2, 0.8),
                                 rng.uniform(0.2, 0.8), rng);
      break;
    case OracleKind::surrogate:
      f = std::make_shared<SurrogateAccuracyOracle>(index, random_qualities(index, 0.0, 1.0, rng),
                                                    rng.uniform(0.5, 5.0), sigma, seed);
      break;
  }
  return {CostTable(n, l, std::move(costs)), b, f};
}

// The two-block instance where ratio greedy is arbitrarily bad: costs 1 and
// 100, values 3 and 200, modular, parameter budget 100.
inline Instance counterexample() {
  const ElementIndex index(2, 1);
  CostTable costs(2, 1, {Cost{1, 1}, Cost{100, 100}});
  return {costs, Budget{100, 1'000'000}, std::make_shared<ModularOracle>(index, std::vector<double>{3.0, 200.0})};
}

// Two elements whose joint gain exceeds the sum of their solo gains.
inline std::shared_ptr<TableOracle> supermodular_pair() {
  const Element a{0, 1}, b{1, 1};
  std::map<Assignment, double> t;
  t[Assignment{}] = 0.0;
  t[Assignment{}.add(a)] = 0.125;
  t[Assignment{}.add(b)] = 0.25;
  t[Assignment{}.add(a).add(b)] = 0.875;
  return std::make_shared<TableOracle>(std::move(t));
}

}  // namespace rcas::testing
