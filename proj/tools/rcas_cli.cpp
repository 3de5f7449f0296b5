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

// rcas: command-line front end.
//
//   rcas search   --config run.json [--mode rcas|uc|apr|amr] [--out DIR]
//   rcas cost     --config run.json --assignment assignment.json
//   rcas brute    --config run.json
//   rcas diagnose --config run.json
//   rcas bench    --config run.json
//
// Exit codes: 0 ok, 1 configuration or cost-model error, 2 evaluator failure,
// 3 internal invariant breach.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rcas/rcas.hpp"

namespace fs = std::filesystem;

namespace rcas {
namespace {

class InvariantBreach : public Error {
 public:
  using Error::Error;
};

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel g_log_level = LogLevel::info;

void init_logging() {
  const char* env = std::getenv("RCAS_LOG");
  if (!env) return;
  const std::string v = env;
  if (v == "error") {
    g_log_level = LogLevel::error;
  } else if (v == "info") {
    g_log_level = LogLevel::info;
  } else if (v == "debug") {
    g_log_level = LogLevel::debug;
  } else {
    std::cerr << "rcas: warning: ignoring RCAS_LOG=" << v << " (expected error, info or debug)\n";
  }
}

void log(LogLevel level, const std::string& msg) {
  if (level > g_log_level) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "rcas: " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

struct Args {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> fidelity;
  std::optional<std::string> mode;
  std::string assignment;
};

// A configured instance ready to search.
struct Setup {
  RunConfig cfg;
  CostTable costs;
  fs::path out_dir;
};

Setup load(const Args& args) {
  Setup s;
  s.cfg = load_config(args.config);
  if (args.seed) s.cfg.seed = *args.seed;
  if (args.fidelity) s.cfg.fidelity = Fidelity::of(*args.fidelity);
  s.costs = build_cost_table(s.cfg);
  s.out_dir = args.out ? *args.out : s.cfg.output_dir;
  log(LogLevel::debug, "instance: " + std::to_string(s.costs.positions()) + " positions x " +
                           std::to_string(s.costs.types()) + " types, seed " + std::to_string(s.cfg.seed));
  return s;
}

std::shared_ptr<Objective> objective_for(const Setup& s, std::uint64_t seed) {
  return build_objective(s.cfg, ElementIndex(s.costs.positions(), s.costs.types()), seed);
}

std::string fmt(double v, int digits = 6) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void verify(const SearchResult& r, const Problem& p) {
  const std::string mode = to_string(r.mode);
  if (!p.budget.admits(r.cost)) throw InvariantBreach(mode + " result exceeds the budget");
  if (!(p.costs.assignment_cost(r.assignment) == r.cost)) throw InvariantBreach(mode + " result cost is inconsistent");
  if (!(replay_trace(r.trace) == r.assignment)) throw InvariantBreach(mode + " trace does not replay to the result");
}

void print_summary(const std::vector<const SearchResult*>& rows, std::optional<CostMode> winner) {
  std::printf("%-5s %12s %12s %14s %12s %9s %14s\n", "mode", "value", "params", "madds", "evaluations", "lookups",
              "phi");
  for (const SearchResult* r : rows) {
    std::printf("%-5s %12s %12llu %14llu %12llu %9llu %14s%s\n", to_string(r->mode), fmt(r->value).c_str(),
                static_cast<unsigned long long>(r->cost.params), static_cast<unsigned long long>(r->cost.madds),
                static_cast<unsigned long long>(r->stats.evaluations),
                static_cast<unsigned long long>(r->stats.lookups), fmt(r->stats.phi).c_str(),
                winner && *winner == r->mode ? "  *" : "");
  }
}

int cmd_search(const Args& args) {
  Setup s = load(args);
  const Problem p(s.costs, s.cfg.budget);
  CachedObjective f(objective_for(s, s.cfg.seed));
  const SearchOptions opts = search_options(s.cfg);
  const std::string mode = args.mode.value_or("rcas");

  std::vector<std::pair<std::string, std::string>> files;
  if (mode == "rcas") {
    const RcasResult r = run_rcas(f, p, opts, Fidelity::of(s.cfg.engine.refine_fidelity));
    std::vector<const SearchResult*> rows;
    for (CostMode m : kAllCostModes) {
      const auto& sub = r.modes[mode_slot(m)];
      if (!sub) {
        log(LogLevel::error, std::string("mode ") + to_string(m) + " failed: " + r.failures[mode_slot(m)]);
        continue;
      }
      verify(*sub, p);
      rows.push_back(&*sub);
      files.emplace_back(std::string("trace_") + to_string(m) + ".csv", trace_csv(sub->trace));
    }
    json j = to_json(r);
    j["seed"] = s.cfg.seed;
    j["fidelity"] = s.cfg.fidelity.level;
    files.emplace_back("result.json", j.dump(2) + "\n");
    print_summary(rows, r.winner);
    std::printf("winner: %s  value %s  sequence %s  total evaluations %llu\n", to_string(r.winner),
                fmt(r.best.value).c_str(), json(block_sequence(r.best.assignment)).dump().c_str(),
                static_cast<unsigned long long>(r.evaluations));
  } else {
    const CostMode m = parse_cost_mode(mode);
    const SearchResult r = run_lazy_ceg(f, p, m, opts);
    verify(r, p);
    json j = to_json(r);
    j["seed"] = s.cfg.seed;
    j["fidelity"] = s.cfg.fidelity.level;
    files.emplace_back("result.json", j.dump(2) + "\n");
    files.emplace_back("trace_" + mode + ".csv", trace_csv(r.trace));
    print_summary({&r}, std::nullopt);
  }
  for (const auto& [name, content] : files) atomic_write(s.out_dir / name, content);
  log(LogLevel::info, "wrote " + std::to_string(files.size()) + " files to " + s.out_dir.string());
  return 0;
}

Assignment read_assignment(const std::string& path, const CostTable& costs) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open assignment file '" + path + "'");
  Assignment a;
  try {
    const json j = json::parse(in);
    a = j.is_array() ? assignment_from_list_json(j) : j.get<Assignment>();
  } catch (const json::exception& e) {
    throw ConfigError("assignment file '" + path + "': " + e.what());
  } catch (const PositionOccupied& e) {
    throw ConfigError("assignment file '" + path + "': " + e.what());
  }
  for (const Element& e : a.elements()) {
    if (!costs.valid(e)) throw ConfigError("assignment element " + to_string(e) + " is outside the instance");
  }
  return a;
}

int cmd_cost(const Args& args) {
  if (args.assignment.empty()) throw ConfigError("cost needs --assignment PATH");
  Setup s = load(args);
  const Assignment a = read_assignment(args.assignment, s.costs);
  json rows = json::array();
  for (const Element& e : a.elements()) {
    json row{{"position", e.position}, {"type", e.type}};
    if (s.cfg.skeleton) {
      json layers = json::array();
      for (const LayerCost& l : block_layers(s.cfg.catalog->at(e.type), s.cfg.skeleton->at(e.position))) {
        layers.push_back({{"kind", to_string(l.kind)}, {"params", l.params}, {"madds", l.madds}});
      }
      row["layers"] = layers;
    }
    const Cost c = s.costs.element_cost(e);
    row["params"] = c.params;
    row["madds"] = c.madds;
    rows.push_back(row);
  }
  const Cost total = s.costs.assignment_cost(a);
  const json out{{"positions", rows},
                 {"fixed", {{"params", s.costs.base().params}, {"madds", s.costs.base().madds}}},
                 {"total", {{"params", total.params}, {"madds", total.madds}}},
                 {"within_budget", s.cfg.budget.admits(total)}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_brute(const Args& args) {
  Setup s = load(args);
  const Problem p(s.costs, s.cfg.budget);
  CachedObjective f(objective_for(s, s.cfg.seed));
  BruteForceOptions opts;
  opts.fidelity = s.cfg.fidelity;
  opts.max_assignments = s.cfg.brute_force_cap;
  opts.threads = std::max(1u, std::thread::hardware_concurrency());
  const BruteForceResult r = brute_force_opt(f, p, opts);
  if (!p.budget.admits(r.cost)) throw InvariantBreach("brute-force optimum exceeds the budget");
  const json j{{"value", r.value},
               {"params", r.cost.params},
               {"madds", r.cost.madds},
               {"assignment", r.assignment},
               {"sequence", block_sequence(r.assignment)},
               {"enumerated", r.enumerated},
               {"feasible", r.feasible},
               {"seed", s.cfg.seed},
               {"fidelity", s.cfg.fidelity.level}};
  atomic_write(s.out_dir / "brute.json", j.dump(2) + "\n");
  std::printf("optimum %s  params %llu  madds %llu  sequence %s  (%llu feasible of %llu)\n", fmt(r.value).c_str(),
              static_cast<unsigned long long>(r.cost.params), static_cast<unsigned long long>(r.cost.madds),
              json(block_sequence(r.assignment)).dump().c_str(), static_cast<unsigned long long>(r.feasible),
              static_cast<unsigned long long>(r.enumerated));
  return 0;
}

int cmd_diagnose(const Args& args) {
  Setup s = load(args);
  const Problem p(s.costs, s.cfg.budget);
  CachedObjective f(objective_for(s, s.cfg.seed));
  const SearchOptions opts = search_options(s.cfg);

  f.set_logging(true);
  const RcasResult r = run_rcas(f, p, opts, Fidelity::of(s.cfg.engine.refine_fidelity));
  f.set_logging(false);
  const std::vector<EvalRecord> evaluated = f.log();

  // Values along the winner's growth chain, starting from the empty set.
  std::vector<double> chain{f.evaluate(Assignment{}, opts.fidelity)};
  for (const TraceEvent& ev : r.best.trace) {
    if (ev.action == TraceAction::accept) chain.push_back(ev.f_after);
  }

  SubmodularityOptions sopts;
  sopts.fidelity = opts.fidelity;
  sopts.samples = s.cfg.diagnose.samples;
  sopts.seed = s.cfg.seed;
  sopts.exhaustive_limit = s.cfg.diagnose.exhaustive_limit;
  sopts.tolerance = s.cfg.diagnose.tolerance;
  const ViolationReport violations = check_submodularity(f, p.ground, sopts);

  const bool by_params = s.cfg.diagnose.hull_cost == HullCost::params;
  std::vector<HullPoint> points;
  for (const EvalRecord& rec : evaluated) {
    if (!(rec.fidelity == opts.fidelity)) continue;
    // Searchable blocks only; the fixed overhead would just shift every point.
    const Cost c = s.costs.assignment_cost(rec.assignment);
    const std::uint64_t spent = by_params ? c.params - s.costs.base().params : c.madds - s.costs.base().madds;
    points.push_back({static_cast<double>(spent), rec.value});
  }

  json hull_json;
  std::string hull_csv = "cost,value,hull_value,gap,on_hull\n";
  try {
    const HullReport hull = convex_hull_report(points);
    hull_json = to_json(hull);
    for (const HullPointStatus& st : hull.points) {
      hull_csv += format_double(st.point.cost) + "," + format_double(st.point.value) + "," +
                  format_double(st.hull_value) + "," + format_double(st.gap) + "," + (st.on_hull ? "1" : "0") + "\n";
    }
  } catch (const DegenerateInput& e) {
    log(LogLevel::info, std::string("hull skipped: ") + e.what());
    hull_json = {{"error", e.what()}};
  }

  const ChainReport chain_report = check_chain(chain);
  const json j{{"submodularity", to_json(violations)},
               {"chain", to_json(chain_report)},
               {"hull_cost", by_params ? "params" : "madds"},
               {"hull", hull_json},
               {"winner", to_string(r.winner)},
               {"seed", s.cfg.seed}};
  atomic_write(s.out_dir / "hull.csv", hull_csv);
  atomic_write(s.out_dir / "diagnose.json", j.dump(2) + "\n");

  std::printf("%s: %llu monotonicity / %llu diminishing-returns violations in %llu / %llu checks\n",
              violations.exhaustive ? "exhaustive" : "sampled",
              static_cast<unsigned long long>(violations.monotonicity_violations),
              static_cast<unsigned long long>(violations.dr_violations),
              static_cast<unsigned long long>(violations.monotonicity_checks),
              static_cast<unsigned long long>(violations.dr_checks));
  if (violations.worst_dr) std::printf("worst diminishing-returns violation %s\n", fmt(violations.worst_dr->magnitude).c_str());
  std::printf("winner chain: %zu steps, %s, %s gains\n", chain_report.gains.size(),
              chain_report.monotone() ? "monotone" : "not monotone",
              chain_report.strictly_decreasing_gains() ? "strictly decreasing" : "not strictly decreasing");
  std::printf("hull over %s: %zu evaluated points\n", by_params ? "params" : "madds", points.size());
  return 0;
}

int cmd_bench(const Args& args) {
  Setup s = load(args);
  const Problem p(s.costs, s.cfg.budget);
  const SearchOptions opts = search_options(s.cfg);
  std::vector<CostMode> modes(kAllCostModes.begin(), kAllCostModes.end());
  if (args.mode && *args.mode != "rcas") modes = {parse_cost_mode(*args.mode)};

  std::ostringstream csv;
  csv << "instance,seed,mode,engine,evaluations,queue_pops,reinserts,phi,wall_ms,value,same_assignment\n";
  std::uint64_t eager_total = 0, lazy_total = 0, fewer = 0, runs = 0;
  for (std::uint64_t i = 0; i < s.cfg.bench_instances; ++i) {
    const std::uint64_t seed = s.cfg.seed + i;
    const auto backend = objective_for(s, seed);
    for (CostMode m : modes) {
      CachedObjective fe(backend), fl(backend);
      const SearchResult eager = run_greedy(fe, p, m, opts);
      const SearchResult lazy = run_lazy_ceg(fl, p, m, opts);
      verify(eager, p);
      verify(lazy, p);
      const bool same = eager.assignment == lazy.assignment;
      for (const SearchResult* r : {&eager, &lazy}) {
        const double ms = std::chrono::duration<double, std::milli>(r->stats.wall_time).count();
        csv << i << ',' << seed << ',' << to_string(m) << ',' << (r == &eager ? "eager" : "lazy") << ','
            << r->stats.evaluations << ',' << r->stats.queue_pops << ',' << r->stats.reinserts << ','
            << format_double(r->stats.phi) << ',' << format_double(ms) << ',' << format_double(r->value) << ','
            << (same ? 1 : 0) << '\n';
      }
      eager_total += eager.stats.evaluations;
      lazy_total += lazy.stats.evaluations;
      fewer += lazy.stats.evaluations < eager.stats.evaluations;
      ++runs;
    }
  }
  atomic_write(s.out_dir / "bench.csv", csv.str());
  std::printf("%llu runs: eager %llu evaluations, lazy %llu; lazy strictly fewer in %llu runs\n",
              static_cast<unsigned long long>(runs), static_cast<unsigned long long>(eager_total),
              static_cast<unsigned long long>(lazy_total), static_cast<unsigned long long>(fewer));
  return 0;
}

}  // namespace
}  // namespace rcas

int main(int argc, char** argv) {
  using namespace rcas;
  init_logging();

  CLI::App app{"Budgeted block-assignment search"};
  app.require_subcommand(1);
  Args args;
  const auto common = [&args](CLI::App* sub) {
    sub->add_option("--config", args.config, "run configuration (JSON)")->required();
    sub->add_option("--out", args.out, "output directory (overrides the config)");
    sub->add_option("--seed", args.seed, "seed (overrides the config)");
    sub->add_option("--fidelity", args.fidelity, "evaluation fidelity in (0, 1]");
    sub->add_option("--mode", args.mode, "cost mode")->check(CLI::IsMember({"uc", "apr", "amr", "rcas"}));
  };
  CLI::App* search = app.add_subcommand("search", "run the budgeted search");
  CLI::App* cost = app.add_subcommand("cost", "print per-layer costs of an assignment");
  CLI::App* brute = app.add_subcommand("brute", "exhaustive optimum of a small instance");
  CLI::App* diagnose = app.add_subcommand("diagnose", "submodularity and convex-hull diagnostics");
  CLI::App* bench = app.add_subcommand("bench", "eager vs lazy evaluation counts over seeded instances");
  for (CLI::App* sub : {search, cost, brute, diagnose, bench}) common(sub);
  cost->add_option("--assignment", args.assignment, "assignment JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*search) return cmd_search(args);
    if (*cost) return cmd_cost(args);
    if (*brute) return cmd_brute(args);
    if (*diagnose) return cmd_diagnose(args);
    if (*bench) return cmd_bench(args);
  } catch (const ConfigError& e) {
    log(LogLevel::error, e.what());
    return 1;
  } catch (const CostModelError& e) {
    log(LogLevel::error, e.what());
    return 1;
  } catch (const InstanceTooLarge& e) {
    log(LogLevel::error, e.what());
    return 1;
  } catch (const EvaluatorFailure& e) {
    log(LogLevel::error, std::string("evaluator failure: ") + e.what());
    if (!e.payload().empty()) log(LogLevel::debug, "offending payload: " + e.payload());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::error, std::string("internal error: ") + e.what());
    return 3;
  }
  return 3;
}
