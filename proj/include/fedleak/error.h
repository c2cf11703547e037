// Copyright 2026 The FedLeak Authors
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

#ifndef FEDLEAK_ERROR_H_
#define FEDLEAK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedleak {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input record. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A PII span that does not agree with its document.
class AnnotationError : public Error {
 public:
  using Error::Error;
};

// Invalid parameters or inputs that violate an operation's precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

// Transport or HTTP failure from a remote backend, after retries.
class BackendError : public Error {
 public:
  BackendError(const std::string& message, int status = 0)
      : Error(message), status_(status) {}
  // HTTP status of the last attempt, 0 for transport-level failures.
  int status() const { return status_; }

 private:
  int status_;
};

// A remote backend answered, but not with the expected wire format.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedleak

#endif  // FEDLEAK_ERROR_H_
