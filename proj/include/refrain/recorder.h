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

#include <functional>
#include <set>
#include <string>

#include "refrain/backend.h"
#include "refrain/prompts.h"

namespace refrain {

// Forced closure after the given thinking text.
using ClosureFn = std::function<Closure(const Question& question, const std::string& thinking)>;

struct RecordOptions {
  // Record a closure after every step.
  bool all_closures = false;
  // Record closures after these 1-based steps.
  std::set<int> closure_steps;
  bool no_thinking = false;
};

// Runs one uncapped generation and captures it as a replayable trace.
ReplayTrace record_trace(GenerationBackend& backend, const ClosureFn& closer,
                         const Question& question, const PromptTemplate& prompt,
                         const RecordOptions& options = {});

}  // namespace refrain
