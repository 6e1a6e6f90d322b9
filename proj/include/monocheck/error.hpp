/*
 * Copyright 2026 The Monocheck Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace monocheck {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, empty sets, invalid ranks.
class InputError : public Error {
 public:
  using Error::Error;
};

// Invalid feature space, constraint file, or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// CSV or spec-file ingestion failures; the message names row and column.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// A generator could not produce the requested values within its retry cap.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// A model under test failed to produce a prediction.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace monocheck
