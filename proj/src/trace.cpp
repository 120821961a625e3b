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

#include "refrain/trace.h"

#include <algorithm>
#include <cctype>

#include "refrain/errors.h"

namespace refrain {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v' ||
         c == '\n';
}

bool is_blank_line(std::string_view line) {
  return std::all_of(line.begin(), line.end(), is_space);
}

bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kMath:
      return "math";
    case TaskKind::kMultipleChoice:
      return "multiple_choice";
  }
  return "math";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "math") return TaskKind::kMath;
  if (name == "multiple_choice") return TaskKind::kMultipleChoice;
  throw DatasetError("unknown task_kind '" + std::string(name) + "'");
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::vector<std::string> segment_steps(std::string_view decoded_text) {
  std::vector<std::string> steps;
  std::size_t fragment_begin = 0;
  std::size_t pos = 0;
  bool in_fragment = false;

  auto flush = [&](std::size_t fragment_end) {
    auto fragment = trim(decoded_text.substr(fragment_begin,
                                             fragment_end - fragment_begin));
    if (!fragment.empty()) steps.emplace_back(fragment);
    in_fragment = false;
  };

  while (pos <= decoded_text.size()) {
    std::size_t eol = decoded_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = decoded_text.size();
    auto line = decoded_text.substr(pos, eol - pos);
    if (is_blank_line(line)) {
      if (in_fragment) flush(pos);
    } else if (!in_fragment) {
      fragment_begin = pos;
      in_fragment = true;
    }
    pos = eol + 1;
  }
  if (in_fragment) flush(decoded_text.size());
  return steps;
}

std::string join_steps(std::span<const std::string> steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += steps[i];
  }
  return out;
}

bool contains_blank_line(std::string_view text) {
  // A blank line exists when two newlines are separated only by whitespace.
  std::size_t pos = text.find('\n');
  while (pos != std::string_view::npos) {
    std::size_t next = text.find('\n', pos + 1);
    if (next == std::string_view::npos) break;
    if (is_blank_line(text.substr(pos + 1, next - pos - 1))) return true;
    pos = next;
  }
  return false;
}

BoxedRegion find_last_boxed(std::string_view text) {
  static constexpr std::string_view kOpen = "\\boxed{";
  BoxedRegion region;
  std::size_t start = text.rfind(kOpen);
  if (start == std::string_view::npos) return region;

  std::size_t content_begin = start + kOpen.size();
  int depth = 1;
  for (std::size_t i = content_begin; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\' && i + 1 < text.size() &&
        (text[i + 1] == '{' || text[i + 1] == '}')) {
      ++i;
      continue;
    }
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) {
        region.content = std::string(text.substr(content_begin, i - content_begin));
        region.begin = content_begin;
        region.end = i;
        return region;
      }
    }
  }
  region.malformed = true;
  return region;
}

std::optional<std::string> extract_boxed(std::string_view answer_text) {
  return find_last_boxed(answer_text).content;
}

std::optional<char> extract_choice(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c < 'A' || c > 'E') continue;
    bool left_ok = i == 0 || !is_alnum(text[i - 1]);
    bool right_ok = i + 1 == text.size() || !is_alnum(text[i + 1]);
    if (left_ok && right_ok) return c;
  }
  return std::nullopt;
}

bool match_answer(std::string_view predicted, std::string_view gold,
                  TaskKind task_kind) noexcept {
  auto p = trim(predicted);
  auto g = trim(gold);
  if (p.empty() || g.empty()) return false;
  if (task_kind == TaskKind::kMath) return p == g;
  auto choice = extract_choice(p);
  return choice.has_value() && g.size() == 1 && *choice == g.front();
}

std::vector<std::size_t> tokens_in_span(std::span<const TokenLogprob> tokens,
                                        std::size_t base, std::size_t begin,
                                        std::size_t end) {
  std::vector<std::size_t> inside;
  std::size_t offset = base;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::size_t tok_begin = offset;
    std::size_t tok_end = offset + tokens[i].text.size();
    offset = tok_end;
    if (tok_begin < end && tok_end > begin) inside.push_back(i);
  }
  return inside;
}

}  // namespace refrain
