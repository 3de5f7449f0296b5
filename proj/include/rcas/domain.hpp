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

// Core value types: block types, skeleton positions, assignments of block
// types to positions, budgets and costs.
//
// The ground set is every (position, block type) pair. An Assignment is a
// subset of it with at most one type per position; positions it leaves empty
// behave as identity layers, which is why every searchable position has to be
// identity-compatible (same channel count in and out, stride 1).

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcas/error.hpp"

namespace rcas {

using json = nlohmann::json;

// Exact positive rational, always stored reduced with a positive denominator.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    return {num, den};
  }

  bool positive() const { return num > 0 && den > 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Returns value * n when it is an integer.
  std::optional<std::int64_t> times(std::int64_t n) const {
    std::int64_t product = 0;
    if (__builtin_mul_overflow(n, num, &product)) return std::nullopt;
    if (product % den != 0) return std::nullopt;
    return product / den;
  }

  std::string to_string() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  // Accepts "6", "3/2".
  static Rational parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
      std::size_t used = 0;
      if (slash == std::string::npos) {
        const std::int64_t v = std::stoll(text, &used);
        if (used != text.size()) throw Error("");
        return make(v, 1);
      }
      const std::string a = text.substr(0, slash), b = text.substr(slash + 1);
      const std::int64_t n = std::stoll(a, &used);
      if (used != a.size()) throw Error("");
      const std::int64_t d = std::stoll(b, &used);
      if (used != b.size()) throw Error("");
      return make(n, d);
    } catch (const std::exception&) {
      throw ConfigError("malformed rational '" + text + "'");
    }
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

inline void to_json(json& j, const Rational& r) {
  if (r.den == 1) {
    j = r.num;
  } else {
    j = r.to_string();
  }
}

inline void from_json(const json& j, Rational& r) {
  if (j.is_number_integer()) {
    r = Rational::make(j.get<std::int64_t>(), 1);
  } else if (j.is_string()) {
    r = Rational::parse(j.get<std::string>());
  } else {
    throw ConfigError("expansion factor must be an integer or a \"p/q\" string");
  }
}

struct BlockType {
  int id = 1;
  Rational expansion;  // t
  int expansion_groups = 1;
  int projection_groups = 1;
  int kernel = 3;
  std::string label;

  friend bool operator==(const BlockType&, const BlockType&) = default;
};

// The L searchable block types. Ids are 1..L in list order.
class BlockCatalog {
 public:
  BlockCatalog() = default;
  explicit BlockCatalog(std::vector<BlockType> types) : types_(std::move(types)) {
    if (types_.empty()) throw ConfigError("block catalog must contain at least one type");
    for (std::size_t i = 0; i < types_.size(); ++i) {
      const BlockType& t = types_[i];
      if (t.id != static_cast<int>(i) + 1) {
        throw ConfigError("block type ids must be 1..L in order; found id " +
                          std::to_string(t.id) + " at slot " + std::to_string(i + 1));
      }
      if (!t.expansion.positive()) {
        throw ConfigError("block type " + std::to_string(t.id) + ": expansion factor must be positive");
      }
      if (t.expansion_groups < 1 || t.projection_groups < 1) {
        throw ConfigError("block type " + std::to_string(t.id) + ": group counts must be positive");
      }
      if (t.kernel < 1 || t.kernel % 2 == 0) {
        throw ConfigError("block type " + std::to_string(t.id) + ": kernel must be odd and positive");
      }
    }
  }

  int size() const { return static_cast<int>(types_.size()); }
  const BlockType& at(int id) const {
    if (id < 1 || id > size()) throw Error("unknown block type id " + std::to_string(id));
    return types_[static_cast<std::size_t>(id - 1)];
  }
  const std::vector<BlockType>& types() const { return types_; }

  friend bool operator==(const BlockCatalog&, const BlockCatalog&) = default;

 private:
  std::vector<BlockType> types_;
};

struct Position {
  int index = 0;
  std::int64_t in_channels = 1;
  std::int64_t out_channels = 1;
  std::int64_t height = 1;
  std::int64_t width = 1;
  std::int64_t stride = 1;

  bool identity_compatible() const { return in_channels == out_channels && stride == 1; }

  friend bool operator==(const Position&, const Position&) = default;
};

// The N searchable slots plus the cost of everything outside the search
// (stem, transitions, classifier).
class Skeleton {
 public:
  Skeleton() = default;
  Skeleton(std::vector<Position> positions, std::uint64_t fixed_params, std::uint64_t fixed_madds)
      : positions_(std::move(positions)),
        fixed_param_overhead_(fixed_params),
        fixed_madds_overhead_(fixed_madds) {
    if (positions_.empty()) throw ConfigError("skeleton must have at least one position");
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      const Position& p = positions_[i];
      const std::string where = "skeleton position " + std::to_string(i);
      if (p.index != static_cast<int>(i)) throw ConfigError(where + ": index must equal its slot");
      if (p.in_channels < 1 || p.out_channels < 1 || p.height < 1 || p.width < 1 || p.stride < 1) {
        throw ConfigError(where + ": geometry must be positive");
      }
      if (!p.identity_compatible()) {
        throw ConfigError(where + ": must be identity-compatible (in_channels == out_channels, stride 1)");
      }
    }
  }

  int size() const { return static_cast<int>(positions_.size()); }
  const Position& at(int n) const { return positions_.at(static_cast<std::size_t>(n)); }
  const std::vector<Position>& positions() const { return positions_; }
  std::uint64_t fixed_param_overhead() const { return fixed_param_overhead_; }
  std::uint64_t fixed_madds_overhead() const { return fixed_madds_overhead_; }

  friend bool operator==(const Skeleton&, const Skeleton&) = default;

 private:
  std::vector<Position> positions_;
  std::uint64_t fixed_param_overhead_ = 0;
  std::uint64_t fixed_madds_overhead_ = 0;
};

// One member of the ground set: block type `type` placed at `position`.
// Ordering is (position, type), the tie-break order used everywhere.
struct Element {
  int position = 0;
  int type = 1;

  friend auto operator<=>(const Element&, const Element&) = default;
};

inline std::string to_string(const Element& e) {
  return std::to_string(e.type) + "@" + std::to_string(e.position);
}

// All N*L elements, position-major.
inline std::vector<Element> full_ground_set(int positions, int types) {
  std::vector<Element> v;
  v.reserve(static_cast<std::size_t>(positions) * static_cast<std::size_t>(types));
  for (int n = 0; n < positions; ++n) {
    for (int l = 1; l <= types; ++l) v.push_back({n, l});
  }
  return v;
}

// Partial map position -> block type. Immutable in practice: `add` returns a
// new value.
class Assignment {
 public:
  using Map = std::map<int, int>;

  Assignment() = default;

  static Assignment from_elements(std::span<const Element> elements) {
    Assignment a;
    for (const Element& e : elements) a.insert(e);
    return a;
  }

  bool empty() const { return filled_.empty(); }
  std::size_t size() const { return filled_.size(); }
  bool occupied(int position) const { return filled_.count(position) != 0; }
  bool contains(const Element& e) const {
    const auto it = filled_.find(e.position);
    return it != filled_.end() && it->second == e.type;
  }
  std::optional<int> type_at(int position) const {
    const auto it = filled_.find(position);
    if (it == filled_.end()) return std::nullopt;
    return it->second;
  }

  Assignment add(const Element& e) const {
    Assignment out = *this;
    out.insert(e);
    return out;
  }

  Assignment remove(int position) const {
    Assignment out = *this;
    out.filled_.erase(position);
    return out;
  }

  std::vector<Element> elements() const {
    std::vector<Element> out;
    out.reserve(filled_.size());
    for (const auto& [n, l] : filled_) out.push_back({n, l});
    return out;
  }

  const Map& filled() const { return filled_; }

  // Canonical cache key, ascending positions: "0:2,3:1". Empty set is "".
  std::string key() const {
    std::string out;
    for (const auto& [n, l] : filled_) {
      if (!out.empty()) out += ',';
      out += std::to_string(n);
      out += ':';
      out += std::to_string(l);
    }
    return out;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
  friend auto operator<=>(const Assignment& a, const Assignment& b) { return a.filled_ <=> b.filled_; }

 private:
  void insert(const Element& e) {
    if (!filled_.emplace(e.position, e.type).second) {
      throw PositionOccupied("position " + std::to_string(e.position) + " already holds type " +
                             std::to_string(filled_.at(e.position)));
    }
  }

  Map filled_;
};

// List form used by the evaluator protocol: [{"position":0,"type":2},...].
inline json assignment_list_json(const Assignment& a) {
  json list = json::array();
  for (const auto& [n, l] : a.filled()) list.push_back({{"position", n}, {"type", l}});
  return list;
}

inline Assignment assignment_from_list_json(const json& list) {
  if (!list.is_array()) throw Error("assignment must be a JSON array");
  Assignment a;
  for (const json& item : list) {
    a = a.add({item.at("position").get<int>(), item.at("type").get<int>()});
  }
  return a;
}

inline void to_json(json& j, const Assignment& a) { j = json{{"filled", assignment_list_json(a)}}; }
inline void from_json(const json& j, Assignment& a) { a = assignment_from_list_json(j.at("filled")); }

struct Cost {
  std::uint64_t params = 0;
  std::uint64_t madds = 0;

  Cost& operator+=(const Cost& o) {
    if (__builtin_add_overflow(params, o.params, &params) ||
        __builtin_add_overflow(madds, o.madds, &madds)) {
      throw Error("cost overflow");
    }
    return *this;
  }
  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  friend bool operator==(const Cost&, const Cost&) = default;
};

struct Budget {
  std::uint64_t max_params = 0;
  std::uint64_t max_madds = 0;

  bool admits(const Cost& c) const { return c.params <= max_params && c.madds <= max_madds; }

  friend bool operator==(const Budget&, const Budget&) = default;
};

// Elements of `ground` whose position is free in `a` and whose addition keeps
// `cost_of(a + e)` inside the budget, in (position, type) order.
template <typename CostFn>
std::vector<Element> feasible_elements(const Assignment& a, std::span<const Element> ground,
                                       const Budget& budget, CostFn&& cost_of) {
  std::vector<Element> out;
  for (const Element& e : ground) {
    if (a.occupied(e.position)) continue;
    if (budget.admits(cost_of(a.add(e)))) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rcas
