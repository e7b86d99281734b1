// Copyright 2026 The symce Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace symce {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input data (non-finite logits, bad shapes,
/// labels out of range).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter outside its admissible range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// An operation invoked on an object in the wrong state, e.g. backward
/// without a preceding forward.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Container/file format violation (bad magic, bad label value).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Truncated payload.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// The loss needs logits (or a noise matrix) and cannot be evaluated from
/// probabilities alone.
class UnsupportedLoss : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration would exceed the configured size bound.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class Divergence : public Error {
 public:
  Divergence(std::size_t epoch, const std::string& what)
      : Error("diverged at epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Experiment configuration could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace symce
