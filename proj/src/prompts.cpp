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

#include "refrain/prompts.h"

#include "refrain/errors.h"

namespace refrain {
namespace {

std::size_t count_placeholders(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kQuestionPlaceholder); pos != std::string_view::npos;
       pos = text.find(kQuestionPlaceholder, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::kP0:
      return "P0";
    case PromptId::kP1:
      return "P1";
    case PromptId::kP2:
      return "P2";
    case PromptId::kCustom:
      return "custom";
  }
  return "custom";
}

PromptId parse_prompt_id(std::string_view name) {
  for (auto id : {PromptId::kP0, PromptId::kP1, PromptId::kP2, PromptId::kCustom}) {
    if (name == to_string(id)) return id;
  }
  throw ConfigError("unknown prompt template '" + std::string(name) + "'");
}

PromptTemplate::PromptTemplate(PromptId id, std::string text)
    : id_(id), text_(std::move(text)) {
  if (count_placeholders(text_) != 1) {
    throw ConfigError("prompt template must contain exactly one {question}");
  }
}

PromptTemplate PromptTemplate::builtin(PromptId id) {
  switch (id) {
    case PromptId::kP0:
      return PromptTemplate(
          id,
          "{question}\nPlease answer step by step. End your response with: "
          "Final Answer: \\boxed{your final answer here}. Make sure to wrap "
          "your final answer in \\boxed{}.");
    case PromptId::kP1:
      return PromptTemplate(
          id,
          "You are a helpful AI Assistant, designed to provided well-reasoned "
          "and detailed responses. You FIRST think about the reasoning process "
          "step by step and then provide the user with the answer. \nQuestion: "
          "{question}\nPlease enclose your final answer in the box: Final "
          "Answer: \\boxed{Your Answer}.");
    case PromptId::kP2:
      return PromptTemplate(
          id,
          "Please solve the following question. Question: {question}\n\nAfter "
          "reasoning step by step, conclude with the final answer in the "
          "format: Final Answer: \\boxed{Your Answer}.");
    case PromptId::kCustom:
      break;
  }
  throw ConfigError("custom prompts need explicit text");
}

PromptTemplate PromptTemplate::custom(std::string text) {
  return PromptTemplate(PromptId::kCustom, std::move(text));
}

std::string PromptTemplate::render(std::string_view question) const {
  std::string out = text_;
  auto pos = out.find(kQuestionPlaceholder);
  out.replace(pos, kQuestionPlaceholder.size(), question);
  return out;
}

}  // namespace refrain
