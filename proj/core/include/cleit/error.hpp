// Copyright 2026 The CLEIT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLEIT_ERROR_HPP
#define CLEIT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace cleit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape contracts violated by an operation's operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A NaN/Inf was produced, or an arithmetic guard failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; the message names the offending row/column.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A phase was requested before the phase it depends on has completed.
class MissingPhaseError : public Error {
 public:
  MissingPhaseError(std::string phase, const std::string& message)
      : Error(message), phase_(std::move(phase)) {}
  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

// Wraps any failure raised while a training phase runs.
class PhaseError : public Error {
 public:
  PhaseError(std::string phase, const std::string& message)
      : Error(phase + ": " + message), phase_(std::move(phase)) {}
  const std::string& phase() const { return phase_; }

 private:
  std::string phase_;
};

}  // namespace cleit

#endif  // CLEIT_ERROR_HPP
