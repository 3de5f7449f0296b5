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

// Synthetic set functions used as stand-ins for trained-network accuracy:
// weighted coverage and concave-of-modular (monotone submodular by
// construction), a saturating surrogate with optional seeded noise, plain
// modular sums and explicit lookup tables. Plus seeded generators for random
// instances of the first three.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/objective.hpp"
#include "rcas/random.hpp"

namespace rcas {

// Dense index of an element in an N x L ground set.
class ElementIndex {
 public:
  ElementIndex() = default;
  ElementIndex(int positions, int types) : positions_(positions), types_(types) {
    if (positions < 1 || types < 1) throw ConfigError("instance needs N >= 1 and L >= 1");
  }

  int positions() const { return positions_; }
  int types() const { return types_; }
  std::size_t size() const { return static_cast<std::size_t>(positions_) * static_cast<std::size_t>(types_); }

  std::size_t operator()(const Element& e) const {
    if (e.position < 0 || e.position >= positions_ || e.type < 1 || e.type > types_) {
      throw Error("element " + to_string(e) + " outside the " + std::to_string(positions_) + "x" +
                  std::to_string(types_) + " ground set");
    }
    return static_cast<std::size_t>(e.position) * static_cast<std::size_t>(types_) +
           static_cast<std::size_t>(e.type - 1);
  }

 private:
  int positions_ = 1;
  int types_ = 1;
};

// F(S) = w(union of cover(e), e in S) / w(universe).
class CoverageOracle final : public Objective {
 public:
  CoverageOracle(ElementIndex index, std::vector<double> weights, std::vector<std::vector<int>> cover)
      : index_(index), weights_(std::move(weights)), cover_(std::move(cover)) {
    if (cover_.size() != index_.size()) throw ConfigError("coverage oracle needs one cover set per element");
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("coverage weights must be finite and >= 0");
      total_ += w;
    }
    for (const auto& items : cover_) {
      for (int j : items) {
        if (j < 0 || j >= static_cast<int>(weights_.size())) throw ConfigError("cover item outside the universe");
      }
    }
  }

  std::string name() const override { return "coverage"; }

  double compute(const Assignment& a, Fidelity) override {
    if (total_ <= 0.0) return 0.0;
    std::vector<char> covered(weights_.size(), 0);
    for (const auto& [n, l] : a.filled()) {
      for (int j : cover_[index_({n, l})]) covered[static_cast<std::size_t>(j)] = 1;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      if (covered[j]) sum += weights_[j];
    }
    return sum / total_;
  }

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::vector<int>>& cover() const { return cover_; }

 private:
  ElementIndex index_;
  std::vector<double> weights_;
  std::vector<std::vector<int>> cover_;
  double total_ = 0.0;
};

// F(S) = sum_j w_j (sum_{e in S} a_{j,e})^rho / normalizer, with the
// normalizer taken at the whole ground set.
class ConcaveModularOracle final : public Objective {
 public:
  ConcaveModularOracle(ElementIndex index, std::vector<std::vector<double>> features,
                       std::vector<double> outer, double rho)
      : index_(index), features_(std::move(features)), outer_(std::move(outer)), rho_(rho) {
    if (!(rho_ > 0.0 && rho_ < 1.0)) throw ConfigError("concave exponent must lie in (0, 1)");
    if (features_.size() != outer_.size()) throw ConfigError("one outer weight per feature required");
    for (std::size_t j = 0; j < features_.size(); ++j) {
      if (features_[j].size() != index_.size()) throw ConfigError("feature rows need one entry per element");
      if (!(outer_[j] >= 0.0)) throw ConfigError("outer weights must be >= 0");
      double row = 0.0;
      for (double x : features_[j]) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("feature weights must be finite and >= 0");
        row += x;
      }
      normalizer_ += outer_[j] * std::pow(row, rho_);
    }
  }

  std::string name() const override { return "concave_modular"; }

  double compute(const Assignment& a, Fidelity) override {
    if (normalizer_ <= 0.0) return 0.0;
    std::vector<std::size_t> members;
    for (const auto& [n, l] : a.filled()) members.push_back(index_({n, l}));
    double total = 0.0;
    for (std::size_t j = 0; j < features_.size(); ++j) {
      double s = 0.0;
      for (std::size_t e : members) s += features_[j][e];
      if (s > 0.0) total += outer_[j] * std::pow(s, rho_);
    }
    return std::min(1.0, total / normalizer_);
  }

 private:
  ElementIndex index_;
  std::vector<std::vector<double>> features_;
  std::vector<double> outer_;
  double rho_;
  double normalizer_ = 0.0;
};

// Saturating accuracy stand-in: F(S) = 1 - exp(-sum q / kappa). Below full
// fidelity a seeded perturbation of amplitude sigma * (1 - level) is added and
// the result is kept inside [0, 1].
class SurrogateAccuracyOracle final : public Objective {
 public:
  SurrogateAccuracyOracle(ElementIndex index, std::vector<double> quality, double kappa, double sigma,
                          std::uint64_t seed)
      : index_(index), quality_(std::move(quality)), kappa_(kappa), sigma_(sigma), seed_(seed) {
    if (quality_.size() != index_.size()) throw ConfigError("surrogate needs one quality per element");
    for (double q : quality_) {
      if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("surrogate qualities must be finite and >= 0");
    }
    if (!(kappa_ > 0.0)) throw ConfigError("surrogate saturation scale must be > 0");
    if (!(sigma_ >= 0.0)) throw ConfigError("surrogate noise amplitude must be >= 0");
  }

  std::string name() const override { return "surrogate"; }

  double compute(const Assignment& a, Fidelity fidelity) override {
    double mass = 0.0;
    for (const auto& [n, l] : a.filled()) mass += quality_[index_({n, l})];
    double value = 1.0 - std::exp(-mass / kappa_);
    const double amplitude = sigma_ * (1.0 - fidelity.level);
    if (amplitude > 0.0) {
      const std::string key = CachedObjective::cache_key(a, fidelity);
      const double u = 2.0 * unit_interval(splitmix64(fnv1a64(key) ^ splitmix64(seed_))) - 1.0;
      value = std::clamp(value + amplitude * u, 0.0, 1.0);
    }
    return value;
  }

 private:
  ElementIndex index_;
  std::vector<double> quality_;
  double kappa_;
  double sigma_;
  std::uint64_t seed_;
};

// F(S) = sum of per-element values. Scores are not confined to [0, 1].
class ModularOracle final : public Objective {
 public:
  ModularOracle(ElementIndex index, std::vector<double> values) : index_(index), values_(std::move(values)) {
    if (values_.size() != index_.size()) throw ConfigError("modular oracle needs one value per element");
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("modular values must be finite and >= 0");
      upper_ += v;
    }
  }

  std::string name() const override { return "modular"; }

  double compute(const Assignment& a, Fidelity) override {
    double sum = 0.0;
    for (const auto& [n, l] : a.filled()) sum += values_[index_({n, l})];
    return sum;
  }

  ScoreRange score_range() const override { return {0.0, upper_ * (1.0 + 1e-12)}; }

 private:
  ElementIndex index_;
  std::vector<double> values_;
  double upper_ = 0.0;
};

// Explicit F over listed assignments; querying anything else is an
// evaluator failure. Used for hand-crafted instances.
class TableOracle final : public Objective {
 public:
  explicit TableOracle(std::map<Assignment, double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("table oracle needs at least one entry");
    range_ = {values_.begin()->second, values_.begin()->second};
    for (const auto& [a, v] : values_) {
      if (!std::isfinite(v)) throw ConfigError("table values must be finite");
      range_.lo = std::min(range_.lo, v);
      range_.hi = std::max(range_.hi, v);
    }
  }

  std::string name() const override { return "table"; }

  double compute(const Assignment& a, Fidelity) override {
    const auto it = values_.find(a);
    if (it == values_.end()) throw EvaluatorFailure("table oracle has no value for {" + a.key() + "}");
    return it->second;
  }

  ScoreRange score_range() const override { return range_; }
  const std::map<Assignment, double>& values() const { return values_; }

 private:
  std::map<Assignment, double> values_;
  ScoreRange range_;
};

// Random coverage instance. Weights are small integers whose total is a power
// of two, so every score and marginal gain is exactly representable.
inline std::shared_ptr<CoverageOracle> random_coverage(ElementIndex index, int universe, double density,
                                                       Rng& rng) {
  if (universe < 1) throw ConfigError("coverage universe must be >= 1");
  std::vector<double> weights(static_cast<std::size_t>(universe));
  std::int64_t total = 0;
  for (double& w : weights) {
    w = static_cast<double>(rng.uniform_int(1, 8));
    total += static_cast<std::int64_t>(w);
  }
  std::int64_t target = 1;
  while (target < total) target *= 2;
  while (total < target) {
    weights[static_cast<std::size_t>(rng.uniform_int(0, universe - 1))] += 1.0;
    ++total;
  }
  std::vector<std::vector<int>> cover(index.size());
  for (auto& items : cover) {
    for (int j = 0; j < universe; ++j) {
      if (rng.bernoulli(density)) items.push_back(j);
    }
    if (items.empty()) items.push_back(static_cast<int>(rng.uniform_int(0, universe - 1)));
  }
  return std::make_shared<CoverageOracle>(index, std::move(weights), std::move(cover));
}

inline std::shared_ptr<ConcaveModularOracle> random_concave_modular(ElementIndex index, int features,
                                                                    double density, double rho, Rng& rng) {
  if (features < 1) throw ConfigError("concave-modular instance needs >= 1 feature");
  std::vector<std::vector<double>> a(static_cast<std::size_t>(features), std::vector<double>(index.size(), 0.0));
  std::vector<double> w(static_cast<std::size_t>(features));
  for (std::size_t j = 0; j < a.size(); ++j) {
    w[j] = rng.uniform(0.5, 1.5);
    for (double& x : a[j]) {
      if (rng.bernoulli(density)) x = rng.uniform(0.0, 1.0);
    }
  }
  return std::make_shared<ConcaveModularOracle>(index, std::move(a), std::move(w), rho);
}

inline std::vector<double> random_qualities(ElementIndex index, double lo, double hi, Rng& rng) {
  std::vector<double> q(index.size());
  for (double& x : q) x = rng.uniform(lo, hi);
  return q;
}

}  // namespace rcas
