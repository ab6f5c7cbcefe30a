// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef THZRIS_ERRORS_HPP
#define THZRIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace thzris {

// Invalid or unknown configuration values. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the support of a distribution or formula.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// An iterative solver ran out of iterations. CLI exit code 2.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The requested operating condition cannot be met. CLI exit code 3.
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace thzris

#endif
