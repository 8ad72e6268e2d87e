// Copyright 2026 The cuboidfit Authors.
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

namespace cuboidfit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad data: malformed files, non-finite inputs, empty point sets.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Bad configuration: out-of-range hyperparameters, empty subsets.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Optimization produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cuboidfit
