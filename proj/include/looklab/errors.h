/* Copyright 2026 The LookLab Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef LOOKLAB_ERRORS_H_
#define LOOKLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace looklab {

// Base of every error thrown by the library. Callers that only care about
// "something in looklab failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector lengths, tensor shapes or heatmap grids.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or empty/unsuitable training data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed image / model / record file.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// A record violates a domain invariant (e.g. wrong_class without a label).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Double review, lease held by someone else, duplicate ids.
class ConflictError : public Error {
 public:
  using Error::Error;
};

class MiningError : public Error {
 public:
  using Error::Error;
};

// Cosine similarity with a zero vector.
class UndefinedSimilarityError : public Error {
 public:
  using Error::Error;
};

}  // namespace looklab

#endif  // LOOKLAB_ERRORS_H_
