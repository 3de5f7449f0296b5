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

// Result and trace serialization, and atomic file output.

#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/search.hpp"

namespace rcas {

inline constexpr const char* kTraceCsvHeader =
    "step,action,position,type,key_before,key_after,F_after,params_after,madds_after,evaluations";

// Shortest text that round-trips; "inf", "-inf", "nan" for non-finite values.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string trace_csv(std::span<const TraceEvent> trace) {
  std::ostringstream out;
  out << kTraceCsvHeader << '\n';
  const auto key = [](const std::optional<RatioKey>& k) { return k ? format_double(k->as_double()) : std::string(); };
  for (const TraceEvent& ev : trace) {
    out << ev.step << ',' << to_string(ev.action) << ',' << ev.element.position << ',' << ev.element.type << ','
        << key(ev.key_before) << ',' << key(ev.key_after) << ',' << format_double(ev.f_after) << ','
        << ev.params_after << ',' << ev.madds_after << ',' << ev.evaluations << '\n';
  }
  return out.str();
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Deterministic: wall time is left out on purpose so reruns compare equal.
inline json to_json(const SearchResult& r) {
  return {{"mode", to_string(r.mode)},
          {"value", r.value},
          {"search_value", r.search_value},
          {"params", r.cost.params},
          {"madds", r.cost.madds},
          {"assignment", r.assignment},
          {"sequence", block_sequence(r.assignment)},
          {"stats",
           {{"evaluations", r.stats.evaluations},
            {"lookups", r.stats.lookups},
            {"queue_pops", r.stats.queue_pops},
            {"reinserts", r.stats.reinserts},
            {"phi", finite_or_null(r.stats.phi)}}}};
}

inline json to_json(const RcasResult& r) {
  json modes = json::object();
  for (CostMode m : kAllCostModes) {
    const std::size_t i = mode_slot(m);
    if (r.modes[i]) {
      json sub = to_json(*r.modes[i]);
      sub["refined_value"] = r.refined_values[i];
      modes[to_string(m)] = sub;
    } else {
      modes[to_string(m)] = {{"error", r.failures[i]}};
    }
  }
  json j = to_json(r.best);
  j["mode"] = "rcas";
  j["winner"] = to_string(r.winner);
  j["warning"] = r.warning;
  j["total_evaluations"] = r.evaluations;
  j["modes"] = modes;
  return j;
}

// Writes `content` next to `path` and renames it into place, so readers never
// see a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rcas
