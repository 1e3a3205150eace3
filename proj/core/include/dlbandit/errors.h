// Copyright 2026 The dlbandit Authors.
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

#ifndef DLBANDIT_ERRORS_H_
#define DLBANDIT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dlbandit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value is outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Graph construction failed (disconnected, too small, retry budget, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

// The communication matrix does not satisfy the doubly-stochastic,
// symmetric, spectral-gap requirements.
class CommMatrixError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration rejected during validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was breached at runtime (scheduler ordering,
// queue overflow, non-PD Gram matrix, negative regret, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace dlbandit

#endif  // DLBANDIT_ERRORS_H_
