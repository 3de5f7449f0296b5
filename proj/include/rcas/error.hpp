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

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rcas {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PositionOccupied : public Error {
 public:
  using Error::Error;
};

// Raised when a block cannot be placed at a position. `position()` is -1 when
// the failing call had no position context.
class CostModelError : public Error {
 public:
  CostModelError(const std::string& what, int position)
      : Error(what), position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

class GroupMismatch : public CostModelError {
 public:
  using CostModelError::CostModelError;
};

class NonIntegerChannels : public CostModelError {
 public:
  using CostModelError::CostModelError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Any failure of the objective backend. `payload()` carries the raw data
// (response line, stderr tail) that triggered it, if any.
class EvaluatorFailure : public Error {
 public:
  explicit EvaluatorFailure(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

 private:
  std::string payload_;
};

class HandshakeFailure : public EvaluatorFailure {
 public:
  using EvaluatorFailure::EvaluatorFailure;
};

class Timeout : public EvaluatorFailure {
 public:
  using EvaluatorFailure::EvaluatorFailure;
};

class ProtocolError : public EvaluatorFailure {
 public:
  using EvaluatorFailure::EvaluatorFailure;
};

class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class TraceCorrupt : public Error {
 public:
  using Error::Error;
};

}  // namespace rcas
