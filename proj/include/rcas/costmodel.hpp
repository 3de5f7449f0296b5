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

// Parameter and multiply-add counts for the three-layer depthwise block
// (grouped 1x1 expansion, kxk depthwise, grouped 1x1 linear projection).
//
// Conventions: only convolution weights are counted (no bias, no batch-norm),
// and one multiply-accumulate counts as one MAdd. All arithmetic is exact
// unsigned 64-bit; overflow throws.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"

namespace rcas {

enum class LayerKind { expansion, depthwise, projection };

inline const char* to_string(LayerKind k) {
  switch (k) {
    case LayerKind::expansion: return "expansion";
    case LayerKind::depthwise: return "depthwise";
    case LayerKind::projection: return "projection";
  }
  return "?";
}

struct LayerCost {
  LayerKind kind = LayerKind::expansion;
  std::uint64_t params = 0;
  std::uint64_t madds = 0;

  friend bool operator==(const LayerCost&, const LayerCost&) = default;
};

using BlockLayers = std::array<LayerCost, 3>;

namespace detail {

inline std::uint64_t mul(std::uint64_t a, std::uint64_t b, int position) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw CostModelError("cost overflow at position " + std::to_string(position), position);
  }
  return out;
}

inline std::uint64_t mul(std::initializer_list<std::uint64_t> factors, int position) {
  std::uint64_t out = 1;
  for (std::uint64_t f : factors) out = mul(out, f, position);
  return out;
}

}  // namespace detail

inline BlockLayers block_layers(const BlockType& t, const Position& p) {
  const int n = p.index;
  const std::string where = "block type " + std::to_string(t.id) + " at position " + std::to_string(n);

  const auto expanded = t.expansion.times(p.in_channels);
  if (!expanded || *expanded < 1) {
    throw NonIntegerChannels(where + ": in_channels " + std::to_string(p.in_channels) + " x t=" +
                                 t.expansion.to_string() + " is not a positive integer",
                             n);
  }
  const std::int64_t c1 = p.in_channels, c2 = p.out_channels, e = *expanded;
  const auto require = [&](bool ok, const std::string& msg) {
    if (!ok) throw GroupMismatch(where + ": " + msg, n);
  };
  require(c1 % t.expansion_groups == 0, "expansion groups " + std::to_string(t.expansion_groups) +
                                            " do not divide in_channels " + std::to_string(c1));
  require(e % t.expansion_groups == 0, "expansion groups " + std::to_string(t.expansion_groups) +
                                           " do not divide expanded channels " + std::to_string(e));
  require(e % t.projection_groups == 0, "projection groups " + std::to_string(t.projection_groups) +
                                            " do not divide expanded channels " + std::to_string(e));
  require(c2 % t.projection_groups == 0, "projection groups " + std::to_string(t.projection_groups) +
                                             " do not divide out_channels " + std::to_string(c2));
  require(p.height % p.stride == 0 && p.width % p.stride == 0,
          "stride " + std::to_string(p.stride) + " does not divide the spatial size");

  using U = std::uint64_t;
  const U in_area = detail::mul(U(p.height), U(p.width), n);
  const U out_area = detail::mul(U(p.height / p.stride), U(p.width / p.stride), n);
  const U k = U(t.kernel);

  BlockLayers layers{};
  layers[0].kind = LayerKind::expansion;
  layers[0].params = detail::mul(U(c1 / t.expansion_groups), U(e), n);
  layers[0].madds = detail::mul(layers[0].params, in_area, n);

  layers[1].kind = LayerKind::depthwise;
  layers[1].params = detail::mul({k, k, U(e)}, n);
  layers[1].madds = detail::mul(layers[1].params, out_area, n);

  layers[2].kind = LayerKind::projection;
  layers[2].params = detail::mul(U(e / t.projection_groups), U(c2), n);
  layers[2].madds = detail::mul(layers[2].params, out_area, n);
  return layers;
}

inline Cost block_cost(const BlockType& t, const Position& p) {
  Cost total;
  for (const LayerCost& l : block_layers(t, p)) total += Cost{l.params, l.madds};
  return total;
}

inline Cost assignment_cost(const Assignment& a, const Skeleton& sk, const BlockCatalog& cat) {
  Cost total{sk.fixed_param_overhead(), sk.fixed_madds_overhead()};
  for (const auto& [n, l] : a.filled()) {
    if (n < 0 || n >= sk.size()) {
      throw CostModelError("position " + std::to_string(n) + " outside the skeleton", n);
    }
    total += block_cost(cat.at(l), sk.at(n));
  }
  return total;
}

inline Cost element_cost(const Element& e, const Skeleton& sk, const BlockCatalog& cat) {
  return block_cost(cat.at(e.type), sk.at(e.position));
}

// Per-element cost lookup for an N x L instance plus a fixed base cost. Built
// either from the convolutional model or from explicit numbers (synthetic
// instances). Costs are modular: cost(S) = base + sum of element costs.
class CostTable {
 public:
  CostTable() = default;

  CostTable(int positions, int types, std::vector<Cost> element_costs, Cost base = {})
      : positions_(positions), types_(types), costs_(std::move(element_costs)), base_(base) {
    if (positions_ < 1 || types_ < 1) throw ConfigError("cost table needs N >= 1 and L >= 1");
    if (costs_.size() != static_cast<std::size_t>(positions_) * static_cast<std::size_t>(types_)) {
      throw ConfigError("cost table must hold N*L entries");
    }
  }

  static CostTable from_model(const Skeleton& sk, const BlockCatalog& cat) {
    std::vector<Cost> costs;
    costs.reserve(static_cast<std::size_t>(sk.size()) * static_cast<std::size_t>(cat.size()));
    for (const Position& p : sk.positions()) {
      for (const BlockType& t : cat.types()) costs.push_back(block_cost(t, p));
    }
    return CostTable(sk.size(), cat.size(), std::move(costs),
                     Cost{sk.fixed_param_overhead(), sk.fixed_madds_overhead()});
  }

  int positions() const { return positions_; }
  int types() const { return types_; }
  const Cost& base() const { return base_; }

  bool valid(const Element& e) const {
    return e.position >= 0 && e.position < positions_ && e.type >= 1 && e.type <= types_;
  }

  const Cost& element_cost(const Element& e) const {
    if (!valid(e)) throw Error("element " + to_string(e) + " outside the cost table");
    return costs_[static_cast<std::size_t>(e.position) * static_cast<std::size_t>(types_) +
                  static_cast<std::size_t>(e.type - 1)];
  }

  Cost assignment_cost(const Assignment& a) const {
    Cost total = base_;
    for (const auto& [n, l] : a.filled()) total += element_cost({n, l});
    return total;
  }

  std::vector<Element> ground_set() const { return full_ground_set(positions_, types_); }

  friend bool operator==(const CostTable&, const CostTable&) = default;

 private:
  int positions_ = 0;
  int types_ = 0;
  std::vector<Cost> costs_;
  Cost base_;
};

}  // namespace rcas
