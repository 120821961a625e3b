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

#include <string>
#include <string_view>

namespace refrain {

inline constexpr std::string_view kQuestionPlaceholder = "{question}";
// Appended after the (possibly truncated) thinking text to force an answer.
inline constexpr std::string_view kForcedClosurePrefix = "Final Answer: \\boxed{";
// Replaces the thinking trace entirely for the no-thinking baseline.
inline constexpr std::string_view kNoThinkingPhrase =
    "Okay, I think I have finished thinking.";

enum class PromptId { kP0, kP1, kP2, kCustom };

std::string_view to_string(PromptId id);
PromptId parse_prompt_id(std::string_view name);

class PromptTemplate {
 public:
  static PromptTemplate builtin(PromptId id);
  // Throws ConfigError unless `text` holds exactly one {question}.
  static PromptTemplate custom(std::string text);

  PromptId id() const { return id_; }
  const std::string& text() const { return text_; }
  std::string render(std::string_view question) const;

 private:
  PromptTemplate(PromptId id, std::string text);

  PromptId id_;
  std::string text_;
};

}  // namespace refrain
