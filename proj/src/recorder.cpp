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

#include "refrain/recorder.h"

#include <vector>

namespace refrain {

ReplayTrace record_trace(GenerationBackend& backend, const ClosureFn& closer,
                         const Question& question, const PromptTemplate& prompt,
                         const RecordOptions& options) {
  ReplayTrace trace;
  trace.question = question;
  auto stream = backend.open_episode(question, prompt, std::nullopt);
  while (auto step = stream->next_step()) trace.steps.push_back(std::move(*step));
  trace.final_closure = backend.close_with_answer(*stream).segment;

  const int n = static_cast<int>(trace.steps.size());
  std::vector<std::string> texts;
  for (int k = 1; k < n; ++k) {
    texts.push_back(trace.steps[k - 1].text);
    if (!options.all_closures && !options.closure_steps.contains(k)) continue;
    trace.closures[k] = closer(question, join_steps(texts)).segment;
  }

  if (options.no_thinking) {
    auto nt = backend.open_no_thinking(question, prompt);
    NoThinkingRecord record;
    while (auto step = nt->next_step()) {
      record.tokens.insert(record.tokens.end(), step->tokens.begin(), step->tokens.end());
    }
    record.closure = backend.close_with_answer(*nt).segment;
    trace.no_thinking = std::move(record);
  }
  return trace;
}

}  // namespace refrain
