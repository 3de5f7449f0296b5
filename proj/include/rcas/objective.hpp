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

// The set function being maximized. Backends implement `Objective`; the
// search engines only ever talk to a `CachedObjective`, which memoizes values
// per (assignment, fidelity), counts misses as "function evaluations" and
// rejects scores outside the backend's declared range.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rcas/domain.hpp"
#include "rcas/error.hpp"

namespace rcas {

// Evaluation effort in (0, 1]; 1 is a full evaluation. Synthetic backends turn
// it into noise, external trainers into an epoch budget.
struct Fidelity {
  double level = 1.0;

  static Fidelity of(double level) {
    if (!(level > 0.0 && level <= 1.0)) {
      throw ConfigError("fidelity must lie in (0, 1], got " + std::to_string(level));
    }
    return Fidelity{level};
  }

  friend bool operator==(const Fidelity&, const Fidelity&) = default;
};

enum class EvalSource { synthetic, external, cache };

inline const char* to_string(EvalSource s) {
  switch (s) {
    case EvalSource::synthetic: return "synthetic";
    case EvalSource::external: return "external";
    case EvalSource::cache: return "cache";
  }
  return "?";
}

struct EvalRecord {
  Assignment assignment;
  Fidelity fidelity;
  double value = 0.0;
  EvalSource source = EvalSource::synthetic;
};

struct ScoreRange {
  double lo = 0.0;
  double hi = 1.0;
};

class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual double compute(const Assignment& a, Fidelity fidelity) = 0;

  // True when `compute` may be called from several threads at once.
  virtual bool concurrency_safe() const { return true; }
  virtual ScoreRange score_range() const { return {}; }
  virtual EvalSource source() const { return EvalSource::synthetic; }
};

class CachedObjective {
 public:
  // `capacity` of 0 means unbounded; otherwise least recently used entries are
  // evicted beyond it.
  explicit CachedObjective(std::shared_ptr<Objective> backend, std::size_t capacity = 0)
      : backend_(std::move(backend)), capacity_(capacity) {
    if (!backend_) throw Error("objective backend is null");
  }

  CachedObjective(const CachedObjective&) = delete;
  CachedObjective& operator=(const CachedObjective&) = delete;

  double evaluate(const Assignment& a, Fidelity fidelity) {
    const std::string key = cache_key(a, fidelity);
    {
      std::lock_guard lock(mu_);
      ++calls_;
      if (const auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        lru_.splice(lru_.begin(), lru_, it->second.slot);
        return it->second.value;
      }
      ++misses_;
    }

    double value = 0.0;
    if (backend_->concurrency_safe()) {
      value = backend_->compute(a, fidelity);
    } else {
      std::lock_guard serial(backend_mu_);
      value = backend_->compute(a, fidelity);
    }
    const ScoreRange range = backend_->score_range();
    if (!std::isfinite(value) || value < range.lo || value > range.hi) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", value);
      throw EvaluatorFailure("score " + std::string(buf) + " for {" + a.key() + "} outside [" +
                                 std::to_string(range.lo) + ", " + std::to_string(range.hi) + "]",
                             buf);
    }

    std::lock_guard lock(mu_);
    if (!cache_.count(key)) {
      lru_.push_front(key);
      cache_.emplace(key, Entry{value, lru_.begin()});
      if (capacity_ != 0 && cache_.size() > capacity_) {
        cache_.erase(lru_.back());
        lru_.pop_back();
      }
    }
    if (logging_) log_.push_back({a, fidelity, value, backend_->source()});
    return value;
  }

  // F(a + e) - F(a).
  double marginal_gain(const Assignment& a, const Element& e, Fidelity fidelity) {
    const double base = evaluate(a, fidelity);
    return evaluate(a.add(e), fidelity) - base;
  }

  std::uint64_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }
  std::uint64_t hits() const {
    std::lock_guard lock(mu_);
    return hits_;
  }
  // Backend invocations; the "number of function evaluations".
  std::uint64_t misses() const {
    std::lock_guard lock(mu_);
    return misses_;
  }
  std::size_t cached() const {
    std::lock_guard lock(mu_);
    return cache_.size();
  }

  // Records every backend evaluation (misses only) from now on.
  void set_logging(bool on) {
    std::lock_guard lock(mu_);
    logging_ = on;
  }
  std::vector<EvalRecord> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  Objective& backend() { return *backend_; }
  bool concurrency_safe() const { return backend_->concurrency_safe(); }

  static std::string cache_key(const Assignment& a, Fidelity fidelity) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "|%.17g", fidelity.level);
    return a.key() + buf;
  }

 private:
  struct Entry {
    double value;
    std::list<std::string>::iterator slot;
  };

  std::shared_ptr<Objective> backend_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::mutex backend_mu_;
  std::unordered_map<std::string, Entry> cache_;
  std::list<std::string> lru_;
  std::uint64_t calls_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  bool logging_ = false;
  std::vector<EvalRecord> log_;
};

}  // namespace rcas
