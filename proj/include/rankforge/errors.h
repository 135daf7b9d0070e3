/*
 * Copyright 2026 The rankforge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RANKFORGE_ERRORS_H_
#define RANKFORGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rankforge {

// Bad shapes or values handed to a public function.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API misuse: stale caches, mismatched parameter sets, bad enum values.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN/inf produced or consumed during computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset or checkpoint text. `line` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what
                                     : "line " + std::to_string(line) + ": " +
                                           what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Invalid run configuration (CLI flags, loss strings, architecture codes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rankforge

#endif  // RANKFORGE_ERRORS_H_
