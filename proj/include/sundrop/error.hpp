// Copyright 2026 The sundrop Authors.
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
#include <utility>
#include <vector>

namespace sundrop {

// Base of every domain error raised by the library. Plain precondition
// violations on numeric arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SUNDROP_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// trace
SUNDROP_DEFINE_ERROR(MalformedRow);
SUNDROP_DEFINE_ERROR(NonUniformStep);
SUNDROP_DEFINE_ERROR(NegativePower);
SUNDROP_DEFINE_ERROR(InvalidWindow);
SUNDROP_DEFINE_ERROR(OutOfRange);
SUNDROP_DEFINE_ERROR(MisalignedTraces);

// fleet / network
SUNDROP_DEFINE_ERROR(CoreOverflow);
SUNDROP_DEFINE_ERROR(CapacityExceeded);

// workload
SUNDROP_DEFINE_ERROR(UnknownTask);

// forecast
SUNDROP_DEFINE_ERROR(InsufficientHistory);

// scheduler
SUNDROP_DEFINE_ERROR(InfeasibleSlo);
SUNDROP_DEFINE_ERROR(AlreadyLate);
SUNDROP_DEFINE_ERROR(ColdStorageFull);
SUNDROP_DEFINE_ERROR(SearchSpaceTooLarge);

// engine
SUNDROP_DEFINE_ERROR(TimeRegression);

#undef SUNDROP_DEFINE_ERROR

class CyclicDependency : public Error {
 public:
  explicit CyclicDependency(std::vector<std::string> cycle)
      : Error(describe(cycle)), cycle_(std::move(cycle)) {}

  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string describe(const std::vector<std::string>& cycle) {
    std::string msg = "cyclic dependency:";
    for (const auto& id : cycle) msg += " " + id;
    return msg;
  }

  std::vector<std::string> cycle_;
};

// Scenario validation failure. `path()` names the offending field, e.g.
// "sites[1].trace".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace sundrop
