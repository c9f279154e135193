// Copyright 2026 The metaprior Authors
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

#ifndef METAPRIOR_ERRORS_HPP_
#define METAPRIOR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace metaprior {

// Bad user-supplied configuration (unknown keys, invalid ranges, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical or structural failure inside a model operation.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File / stream I/O failure; carries the offending path in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace metaprior

#endif  // METAPRIOR_ERRORS_HPP_
