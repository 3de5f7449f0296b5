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

// One-file JSON run configuration: the instance (skeleton + catalog, or an
// explicit cost table), budget, objective, fidelity, seed and engine flags.
// `parse_config(to_json(c)) == c` for every valid config.

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rcas/costmodel.hpp"
#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/external.hpp"
#include "rcas/objective.hpp"
#include "rcas/random.hpp"
#include "rcas/search.hpp"
#include "rcas/synthetic.hpp"

namespace rcas {

// Explicit tables, when present, take precedence over the seeded generator
// parameters next to them.
struct CoverageSpec {
  int universe = 32;
  double density = 0.1;
  std::optional<std::vector<double>> weights;
  std::optional<std::vector<std::vector<int>>> cover;  // per element, position-major

  friend bool operator==(const CoverageSpec&, const CoverageSpec&) = default;
};

struct ConcaveModularSpec {
  int features = 8;
  double density = 0.3;
  double rho = 0.5;
  std::optional<std::vector<std::vector<double>>> feature_weights;  // [feature][element]
  std::optional<std::vector<double>> outer_weights;

  friend bool operator==(const ConcaveModularSpec&, const ConcaveModularSpec&) = default;
};

struct SurrogateSpec {
  double kappa = 4.0;
  double sigma = 0.0;
  double quality_min = 0.1;
  double quality_max = 1.0;
  std::optional<std::vector<double>> quality;

  friend bool operator==(const SurrogateSpec&, const SurrogateSpec&) = default;
};

struct ModularSpec {
  std::vector<double> values;

  friend bool operator==(const ModularSpec&, const ModularSpec&) = default;
};

struct TableSpec {
  std::vector<std::pair<Assignment, double>> entries;

  friend bool operator==(const TableSpec&, const TableSpec&) = default;
};

struct ExternalSpec {
  std::vector<std::string> command;
  std::int64_t timeout_ms = 60000;

  friend bool operator==(const ExternalSpec&, const ExternalSpec&) = default;
};

using ObjectiveSpec = std::variant<CoverageSpec, ConcaveModularSpec, SurrogateSpec, ModularSpec, TableSpec, ExternalSpec>;

enum class HullCost { params, madds };

struct EngineFlags {
  bool stop_on_nonpositive_gain = false;
  bool paper_literal_lazy = false;
  bool parallel_first_pass = false;
  double refine_fidelity = 1.0;

  friend bool operator==(const EngineFlags&, const EngineFlags&) = default;
};

struct DiagnoseSettings {
  std::uint64_t samples = 1000;
  std::uint64_t exhaustive_limit = 8;
  double tolerance = 0.0;
  HullCost hull_cost = HullCost::params;

  friend bool operator==(const DiagnoseSettings&, const DiagnoseSettings&) = default;
};

struct RunConfig {
  std::optional<Skeleton> skeleton;
  std::optional<BlockCatalog> catalog;
  std::optional<CostTable> cost_table;
  Budget budget;
  ObjectiveSpec objective;
  Fidelity fidelity;
  std::uint64_t seed = 0;
  EngineFlags engine;
  std::string output_dir = "out";
  std::uint64_t brute_force_cap = std::uint64_t{1} << 20;
  std::uint64_t bench_instances = 20;
  DiagnoseSettings diagnose;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace config_detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

inline std::uint64_t as_u64(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(where + " must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(where + " must be a nonnegative integer");
}

inline std::int64_t as_positive(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError(where + " must be a positive integer");
  return v.get<std::int64_t>();
}

inline double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

inline std::uint64_t u64_or(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  return j.contains(key) ? as_u64(j.at(key), where + "." + key) : fallback;
}

inline double double_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? as_double(j.at(key), where + "." + key) : fallback;
}

inline bool bool_or(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return j.at(key).get<bool>();
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

inline Position parse_position(const json& j, int index) {
  const std::string where = "skeleton.positions[" + std::to_string(index) + "]";
  Position p;
  p.index = index;
  if (j.contains("channels")) {
    p.in_channels = p.out_channels = as_positive(j.at("channels"), where + ".channels");
  } else {
    p.in_channels = as_positive(require(j, "in_channels", where), where + ".in_channels");
    p.out_channels = as_positive(require(j, "out_channels", where), where + ".out_channels");
  }
  p.height = as_positive(require(j, "height", where), where + ".height");
  p.width = as_positive(require(j, "width", where), where + ".width");
  p.stride = j.contains("stride") ? as_positive(j.at("stride"), where + ".stride") : 1;
  return p;
}

// Either "positions": [...] or the "stages" shorthand
// [{"count": 6, "channels": 16, "height": 32, "width": 32}, ...].
inline Skeleton parse_skeleton(const json& j) {
  std::vector<Position> positions;
  if (j.contains("stages")) {
    for (const json& stage : j.at("stages")) {
      const auto count = as_positive(require(stage, "count", "skeleton.stages"), "skeleton.stages.count");
      for (std::int64_t k = 0; k < count; ++k) {
        positions.push_back(parse_position(stage, static_cast<int>(positions.size())));
      }
    }
  } else {
    for (const json& p : require(j, "positions", "skeleton")) {
      positions.push_back(parse_position(p, static_cast<int>(positions.size())));
    }
  }
  return Skeleton(std::move(positions), u64_or(j, "fixed_param_overhead", 0, "skeleton"),
                  u64_or(j, "fixed_madds_overhead", 0, "skeleton"));
}

inline json emit_skeleton(const Skeleton& s) {
  json positions = json::array();
  for (const Position& p : s.positions()) {
    positions.push_back({{"in_channels", p.in_channels},
                         {"out_channels", p.out_channels},
                         {"height", p.height},
                         {"width", p.width},
                         {"stride", p.stride}});
  }
  return {{"positions", positions},
          {"fixed_param_overhead", s.fixed_param_overhead()},
          {"fixed_madds_overhead", s.fixed_madds_overhead()}};
}

inline BlockCatalog parse_catalog(const json& j) {
  if (!j.is_array()) throw ConfigError("catalog must be an array of block types");
  std::vector<BlockType> types;
  for (const json& t : j) {
    const std::string where = "catalog[" + std::to_string(types.size()) + "]";
    BlockType b;
    b.id = static_cast<int>(as_positive(require(t, "id", where), where + ".id"));
    b.expansion = require(t, "expansion", where).get<Rational>();
    b.expansion_groups = t.contains("expansion_groups")
                             ? static_cast<int>(as_positive(t.at("expansion_groups"), where + ".expansion_groups"))
                             : 1;
    b.projection_groups = t.contains("projection_groups")
                              ? static_cast<int>(as_positive(t.at("projection_groups"), where + ".projection_groups"))
                              : 1;
    b.kernel = t.contains("kernel") ? static_cast<int>(as_positive(t.at("kernel"), where + ".kernel")) : 3;
    b.label = t.value("label", std::string{});
    types.push_back(b);
  }
  return BlockCatalog(std::move(types));
}

inline json emit_catalog(const BlockCatalog& c) {
  json out = json::array();
  for (const BlockType& t : c.types()) {
    out.push_back({{"id", t.id},
                   {"label", t.label},
                   {"expansion", t.expansion},
                   {"expansion_groups", t.expansion_groups},
                   {"projection_groups", t.projection_groups},
                   {"kernel", t.kernel}});
  }
  return out;
}

inline json emit_cost(const Cost& c) { return {{"params", c.params}, {"madds", c.madds}}; }

inline Cost parse_cost(const json& j, const std::string& where) {
  return {as_u64(require(j, "params", where), where + ".params"), as_u64(require(j, "madds", where), where + ".madds")};
}

// {"positions": N, "types": L, "base": {...}, "elements": [{"params":..,"madds":..}, ...]}
// with elements position-major.
inline CostTable parse_cost_table(const json& j) {
  const auto n = static_cast<int>(as_positive(require(j, "positions", "cost_table"), "cost_table.positions"));
  const auto l = static_cast<int>(as_positive(require(j, "types", "cost_table"), "cost_table.types"));
  std::vector<Cost> costs;
  for (const json& e : require(j, "elements", "cost_table")) {
    costs.push_back(parse_cost(e, "cost_table.elements[" + std::to_string(costs.size()) + "]"));
  }
  const Cost base = j.contains("base") ? parse_cost(j.at("base"), "cost_table.base") : Cost{};
  return CostTable(n, l, std::move(costs), base);
}

inline json emit_cost_table(const CostTable& t) {
  json elements = json::array();
  for (const Element& e : t.ground_set()) elements.push_back(emit_cost(t.element_cost(e)));
  return {{"positions", t.positions()}, {"types", t.types()}, {"base", emit_cost(t.base())}, {"elements", elements}};
}

inline ObjectiveSpec parse_objective(const json& j) {
  const std::string kind = require(j, "kind", "objective").get<std::string>();
  const std::string where = "objective(" + kind + ")";
  if (kind == "coverage") {
    CoverageSpec s;
    s.universe = static_cast<int>(j.contains("universe") ? as_positive(j.at("universe"), where + ".universe") : s.universe);
    s.density = double_or(j, "density", s.density, where);
    s.weights = optional_field<std::vector<double>>(j, "weights");
    s.cover = optional_field<std::vector<std::vector<int>>>(j, "cover");
    if (s.weights.has_value() != s.cover.has_value()) throw ConfigError(where + ": weights and cover go together");
    return s;
  }
  if (kind == "concave_modular") {
    ConcaveModularSpec s;
    s.features = static_cast<int>(j.contains("features") ? as_positive(j.at("features"), where + ".features") : s.features);
    s.density = double_or(j, "density", s.density, where);
    s.rho = double_or(j, "rho", s.rho, where);
    s.feature_weights = optional_field<std::vector<std::vector<double>>>(j, "feature_weights");
    s.outer_weights = optional_field<std::vector<double>>(j, "outer_weights");
    if (s.feature_weights.has_value() != s.outer_weights.has_value()) {
      throw ConfigError(where + ": feature_weights and outer_weights go together");
    }
    return s;
  }
  if (kind == "surrogate") {
    SurrogateSpec s;
    s.kappa = double_or(j, "kappa", s.kappa, where);
    s.sigma = double_or(j, "sigma", s.sigma, where);
    s.quality_min = double_or(j, "quality_min", s.quality_min, where);
    s.quality_max = double_or(j, "quality_max", s.quality_max, where);
    s.quality = optional_field<std::vector<double>>(j, "quality");
    if (!(s.quality_min >= 0.0 && s.quality_min <= s.quality_max)) {
      throw ConfigError(where + ": need 0 <= quality_min <= quality_max");
    }
    return s;
  }
  if (kind == "modular") {
    return ModularSpec{require(j, "values", where).get<std::vector<double>>()};
  }
  if (kind == "table") {
    TableSpec s;
    for (const json& e : require(j, "entries", where)) {
      s.entries.emplace_back(assignment_from_list_json(require(e, "assignment", where)),
                             as_double(require(e, "value", where), where + ".value"));
    }
    return s;
  }
  if (kind == "external") {
    ExternalSpec s;
    s.command = require(j, "command", where).get<std::vector<std::string>>();
    if (s.command.empty()) throw ConfigError(where + ": command is empty");
    s.timeout_ms = j.contains("timeout_ms") ? as_positive(j.at("timeout_ms"), where + ".timeout_ms") : s.timeout_ms;
    return s;
  }
  throw ConfigError("unknown objective kind '" + kind + "'");
}

inline json emit_objective(const ObjectiveSpec& spec) {
  struct Emit {
    json operator()(const CoverageSpec& s) const {
      json j{{"kind", "coverage"}, {"universe", s.universe}, {"density", s.density}};
      if (s.weights) j["weights"] = *s.weights;
      if (s.cover) j["cover"] = *s.cover;
      return j;
    }
    json operator()(const ConcaveModularSpec& s) const {
      json j{{"kind", "concave_modular"}, {"features", s.features}, {"density", s.density}, {"rho", s.rho}};
      if (s.feature_weights) j["feature_weights"] = *s.feature_weights;
      if (s.outer_weights) j["outer_weights"] = *s.outer_weights;
      return j;
    }
    json operator()(const SurrogateSpec& s) const {
      json j{{"kind", "surrogate"},
             {"kappa", s.kappa},
             {"sigma", s.sigma},
             {"quality_min", s.quality_min},
             {"quality_max", s.quality_max}};
      if (s.quality) j["quality"] = *s.quality;
      return j;
    }
    json operator()(const ModularSpec& s) const { return {{"kind", "modular"}, {"values", s.values}}; }
    json operator()(const TableSpec& s) const {
      json entries = json::array();
      for (const auto& [a, v] : s.entries) entries.push_back({{"assignment", assignment_list_json(a)}, {"value", v}});
      return {{"kind", "table"}, {"entries", entries}};
    }
    json operator()(const ExternalSpec& s) const {
      return {{"kind", "external"}, {"command", s.command}, {"timeout_ms", s.timeout_ms}};
    }
  };
  return std::visit(Emit{}, spec);
}

}  // namespace config_detail

inline RunConfig parse_config(const json& j) {
  using namespace config_detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    RunConfig c;
    if (j.contains("skeleton")) c.skeleton = parse_skeleton(j.at("skeleton"));
    if (j.contains("catalog")) c.catalog = parse_catalog(j.at("catalog"));
    if (j.contains("cost_table")) c.cost_table = parse_cost_table(j.at("cost_table"));
    if (c.skeleton.has_value() != c.catalog.has_value()) {
      throw ConfigError("skeleton and catalog must be given together");
    }
    if (c.skeleton.has_value() == c.cost_table.has_value()) {
      throw ConfigError("give either skeleton + catalog or cost_table");
    }
    const json& b = require(j, "budget", "config");
    c.budget = {as_u64(require(b, "max_params", "budget"), "budget.max_params"),
                as_u64(require(b, "max_madds", "budget"), "budget.max_madds")};
    c.objective = parse_objective(require(j, "objective", "config"));
    c.fidelity = Fidelity::of(double_or(j, "fidelity", 1.0, "config"));
    c.seed = u64_or(j, "seed", 0, "config");
    if (j.contains("engine")) {
      const json& e = j.at("engine");
      c.engine.stop_on_nonpositive_gain = bool_or(e, "stop_on_nonpositive_gain", false, "engine");
      c.engine.paper_literal_lazy = bool_or(e, "paper_literal_lazy", false, "engine");
      c.engine.parallel_first_pass = bool_or(e, "parallel_first_pass", false, "engine");
      c.engine.refine_fidelity = Fidelity::of(double_or(e, "refine_fidelity", 1.0, "engine")).level;
    }
    if (j.contains("output")) c.output_dir = j.at("output").value("dir", c.output_dir);
    c.brute_force_cap = u64_or(j, "brute_force_cap", c.brute_force_cap, "config");
    c.bench_instances = u64_or(j, "bench_instances", c.bench_instances, "config");
    if (j.contains("diagnose")) {
      const json& d = j.at("diagnose");
      c.diagnose.samples = u64_or(d, "samples", c.diagnose.samples, "diagnose");
      c.diagnose.exhaustive_limit = u64_or(d, "exhaustive_limit", c.diagnose.exhaustive_limit, "diagnose");
      c.diagnose.tolerance = double_or(d, "tolerance", c.diagnose.tolerance, "diagnose");
      const std::string hc = d.value("hull_cost", std::string("params"));
      if (hc != "params" && hc != "madds") throw ConfigError("diagnose.hull_cost must be params or madds");
      c.diagnose.hull_cost = hc == "params" ? HullCost::params : HullCost::madds;
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline json to_json(const RunConfig& c) {
  using namespace config_detail;
  json j;
  if (c.skeleton) j["skeleton"] = emit_skeleton(*c.skeleton);
  if (c.catalog) j["catalog"] = emit_catalog(*c.catalog);
  if (c.cost_table) j["cost_table"] = emit_cost_table(*c.cost_table);
  j["budget"] = {{"max_params", c.budget.max_params}, {"max_madds", c.budget.max_madds}};
  j["objective"] = emit_objective(c.objective);
  j["fidelity"] = c.fidelity.level;
  j["seed"] = c.seed;
  j["engine"] = {{"stop_on_nonpositive_gain", c.engine.stop_on_nonpositive_gain},
                 {"paper_literal_lazy", c.engine.paper_literal_lazy},
                 {"parallel_first_pass", c.engine.parallel_first_pass},
                 {"refine_fidelity", c.engine.refine_fidelity}};
  j["output"] = {{"dir", c.output_dir}};
  j["brute_force_cap"] = c.brute_force_cap;
  j["bench_instances"] = c.bench_instances;
  j["diagnose"] = {{"samples", c.diagnose.samples},
                   {"exhaustive_limit", c.diagnose.exhaustive_limit},
                   {"tolerance", c.diagnose.tolerance},
                   {"hull_cost", c.diagnose.hull_cost == HullCost::params ? "params" : "madds"}};
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// Per-element costs of the configured instance; cost-model preconditions are
// checked here for every (position, type) pair.
inline CostTable build_cost_table(const RunConfig& c) {
  if (c.cost_table) return *c.cost_table;
  return CostTable::from_model(*c.skeleton, *c.catalog);
}

inline std::shared_ptr<Objective> build_objective(const RunConfig& c, ElementIndex index, std::uint64_t seed) {
  Rng rng(splitmix64(seed));
  struct Build {
    ElementIndex index;
    Rng& rng;
    std::uint64_t seed;

    std::shared_ptr<Objective> operator()(const CoverageSpec& s) const {
      if (s.weights) return std::make_shared<CoverageOracle>(index, *s.weights, *s.cover);
      return random_coverage(index, s.universe, s.density, rng);
    }
    std::shared_ptr<Objective> operator()(const ConcaveModularSpec& s) const {
      if (s.feature_weights) {
        return std::make_shared<ConcaveModularOracle>(index, *s.feature_weights, *s.outer_weights, s.rho);
      }
      return random_concave_modular(index, s.features, s.density, s.rho, rng);
    }
    std::shared_ptr<Objective> operator()(const SurrogateSpec& s) const {
      std::vector<double> q = s.quality ? *s.quality : random_qualities(index, s.quality_min, s.quality_max, rng);
      return std::make_shared<SurrogateAccuracyOracle>(index, std::move(q), s.kappa, s.sigma, seed);
    }
    std::shared_ptr<Objective> operator()(const ModularSpec& s) const {
      return std::make_shared<ModularOracle>(index, s.values);
    }
    std::shared_ptr<Objective> operator()(const TableSpec& s) const {
      std::map<Assignment, double> values;
      for (const auto& [a, v] : s.entries) values[a] = v;
      return std::make_shared<TableOracle>(std::move(values));
    }
    std::shared_ptr<Objective> operator()(const ExternalSpec& s) const {
      return std::make_shared<ExternalEvaluator>(s.command, std::chrono::milliseconds(s.timeout_ms));
    }
  };
  return std::visit(Build{index, rng, seed}, c.objective);
}

inline SearchOptions search_options(const RunConfig& c) {
  SearchOptions o;
  o.fidelity = c.fidelity;
  o.stop_on_nonpositive_gain = c.engine.stop_on_nonpositive_gain;
  o.paper_literal_lazy = c.engine.paper_literal_lazy;
  o.parallel_first_pass = c.engine.parallel_first_pass;
  return o;
}

}  // namespace rcas
