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

#include <memory>
#include <string>
#include <vector>

#include "refrain/backend.h"
#include "refrain/redundancy.h"

namespace refrain::testing {

// Step with one token per whitespace word; all logprobs -0.1.
inline ReasoningStep make_step(int index, const std::string& text) {
  ReasoningStep s;
  s.index = index;
  s.text = text;
  for (auto w : whitespace_tokens(text)) s.tokens.push_back({std::string(w), -0.1});
  return s;
}

inline AnswerSegment boxed_closure(const std::string& answer, double lp = -0.05,
                                   int total = 6) {
  return make_closure("Final Answer: \\boxed{" + answer + "}", {{answer, lp}}, total);
}

inline ReplayTrace make_trace(const std::string& id, const std::vector<std::string>& steps,
                              const std::string& gold = "1",
                              const std::string& final_answer = "1") {
  ReplayTrace t;
  t.question = {id, "question " + id, gold, TaskKind::kMath};
  for (std::size_t i = 0; i < steps.size(); ++i) {
    t.steps.push_back(make_step(static_cast<int>(i + 1), steps[i]));
  }
  t.final_closure = boxed_closure(final_answer);
  return t;
}

inline std::shared_ptr<TraceStore> store_of(std::vector<ReplayTrace> traces) {
  auto store = std::make_shared<TraceStore>();
  for (auto& t : traces) store->add(std::move(t));
  return store;
}

}  // namespace refrain::testing
