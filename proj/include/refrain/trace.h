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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refrain {

enum class TaskKind { kMath, kMultipleChoice };

std::string_view to_string(TaskKind kind);
// Accepts "math" and "multiple_choice"; throws DatasetError otherwise.
TaskKind parse_task_kind(std::string_view name);

struct Question {
  std::string id;
  std::string text;
  std::string gold;
  TaskKind task_kind = TaskKind::kMath;
};

struct TokenLogprob {
  std::string text;
  double logprob = 0.0;

  bool operator==(const TokenLogprob&) const = default;
};

// One blank-line delimited unit of the thinking trace.
struct ReasoningStep {
  int index = 0;  // 1-based
  std::string text;
  std::vector<TokenLogprob> tokens;
  std::optional<std::vector<double>> embedding;
  std::optional<bool> reflective;
  std::optional<double> similarity;

  int token_count() const { return static_cast<int>(tokens.size()); }
};

// Forced-closure output. `answer_tokens` covers only the tokens inside the
// boxed region; `total_tokens` counts every generated closure token.
struct AnswerSegment {
  std::string full_text;
  std::optional<std::string> boxed_answer;
  std::vector<TokenLogprob> answer_tokens;
  int prefix_context_len = 0;
  int total_tokens = 0;
  bool malformed = false;
};

struct Trace {
  std::vector<ReasoningStep> steps;
  std::optional<AnswerSegment> answer_segment;
  bool stopped_early = false;
  std::optional<int> stop_step;
};

// Splits decoded thinking text on maximal runs of blank lines (lines that hold
// only whitespace). Fragments are trimmed and empty ones dropped.
std::vector<std::string> segment_steps(std::string_view decoded_text);

// Inverse of segment_steps for already-segmented steps.
std::string join_steps(std::span<const std::string> steps);

// True when `text` contains a blank-line delimiter.
bool contains_blank_line(std::string_view text);

std::string_view trim(std::string_view text);

struct BoxedRegion {
  std::optional<std::string> content;
  // Byte offsets of the content inside the searched text, valid when
  // `content` is set.
  std::size_t begin = 0;
  std::size_t end = 0;
  // A `\boxed{` was found but its braces never balance.
  bool malformed = false;
};

// Locates the last `\boxed{...}` region using balanced-brace matching.
// Backslash-escaped braces do not count towards nesting.
BoxedRegion find_last_boxed(std::string_view text);

std::optional<std::string> extract_boxed(std::string_view answer_text);

// First standalone option letter A-E (not adjacent to another letter or
// digit).
std::optional<char> extract_choice(std::string_view text);

// Strict matching: trimmed equality for math, option letter for multiple
// choice. Never throws.
bool match_answer(std::string_view predicted, std::string_view gold,
                  TaskKind task_kind) noexcept;

// Returns the indices of `tokens` whose character span overlaps
// [begin, end) when the token texts are laid out back to back starting at
// offset `base`.
std::vector<std::size_t> tokens_in_span(std::span<const TokenLogprob> tokens,
                                        std::size_t base, std::size_t begin,
                                        std::size_t end);

}  // namespace refrain
