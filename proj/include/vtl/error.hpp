// Copyright 2026 The vtl Authors
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

namespace vtl {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that cannot be combined by an operator.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced during a forward pass, a gradient, or a training run.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Corrupt, truncated, or incompatible on-disk data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Bad argument or configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed command line or configuration file.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace vtl
