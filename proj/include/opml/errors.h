/*
 * Copyright 2026 The OPML Lab Authors.
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

#ifndef OPML_ERRORS_H_
#define OPML_ERRORS_H_

#include <stdexcept>
#include <string>

namespace opml {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (e.g. wrong label states).
class ContractError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Factorization failure, non-finite loss, or similar numerical breakdown.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent dataset / model files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid or unknown configuration keys and values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace opml

#endif  // OPML_ERRORS_H_
