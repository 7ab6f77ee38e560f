// Copyright 2026 The hemscast Authors
//
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

namespace hems {

// Error categories map one-to-one onto CLI exit codes (see tools/hems.cpp).
enum class ErrorKind {
  kConfig,
  kData,
  kTraining,
  kSolver,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch = -1)
      : Error(ErrorKind::kTraining, what), epoch_(epoch) {}

  // Epoch at which training failed, or -1 if not epoch-specific.
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorKind::kSolver, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace hems
