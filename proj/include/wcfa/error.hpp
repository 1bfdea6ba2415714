// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_ERROR_HPP_
#define WCFA_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wcfa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numerical routine (non-finite input, bad parameters).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `line()` is 1-based; 0 means the file as a whole.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Inconsistent estimator or command configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed or a variational update produced an invalid factor.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wcfa

#endif  // WCFA_ERROR_HPP_
