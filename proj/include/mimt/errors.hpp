// Copyright 2026 The mimt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace mimt {

/// Base class for all mimt exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid probability distribution or density (negative mass, bad
/// normalization, empty support).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Incompatible shapes (vector lengths, channel dimensions).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Scalar parameter outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Absolute-continuity failure: p(x) > 0 where q(x) = 0.
class SupportError : public Error {
 public:
  using Error::Error;
};

/// Numerical-domain failure (divergent integrals, non-finite values).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimt
