// Copyright 2026 The gomoku-zero Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace gomoku {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid board, search, training or engine configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its precondition (e.g. on a finished game).
class UsageError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTransformError : public Error {
 public:
  using Error::Error;
};

// Tensor shapes disagree with the network architecture.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Loss or gradient went non-finite during a train step.
class TrainingDivergence : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { NotFound, Corrupt, VersionMismatch, ArchitectureMismatch };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Game record could not be parsed or does not replay. `ply` is the 1-based
// ply of the offending move, or 0 when the failure is not tied to a move.
class RecordError : public Error {
 public:
  RecordError(const std::string& what, int ply = 0) : Error(what), ply_(ply) {}

  int ply() const noexcept { return ply_; }

 private:
  int ply_;
};

}  // namespace gomoku
