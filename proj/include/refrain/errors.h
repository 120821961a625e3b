/* Copyright 2026 The REFRAIN Authors. All Rights Reserved.

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

#pragma once

#include <stdexcept>
#include <string>

namespace refrain {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters, thresholds, or policy settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent dataset / trace-store content.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Generation or embedding backend failed (network, timeout, encoder).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Backend is reachable but lacks a required feature (e.g. logprobs).
class CapabilityError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Backend answered with a payload that violates the wire contract.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

// An answer with no boxed tokens cannot be scored.
class UnscorableAnswerError : public Error {
 public:
  using Error::Error;
};

// Internal statistics are inconsistent (e.g. non-positive running mean).
class InternalStateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace refrain
