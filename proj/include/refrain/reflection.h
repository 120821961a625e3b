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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace refrain {

inline constexpr std::string_view kCheck = "check";
inline constexpr std::string_view kShift = "shift";
inline constexpr std::string_view kUncert = "uncert";
inline constexpr std::string_view kRetro = "retro";

// Named overlays shipped with the default lexicon.
inline constexpr std::string_view kInCategoryExpansion = "in_cat_expansion";
inline constexpr std::string_view kNewCategory = "new_category";

struct TriggerCategory {
  std::string name;
  std::vector<std::string> phrases;  // lowercase, non-empty
};

// Phrases to add per category; unknown categories are appended as new ones.
using VocabularyOverlay = std::map<std::string, std::vector<std::string>>;

// Reflection trigger lexicon (check / shift / uncert / retro plus any extra
// categories) and the provisional-answer cues. Immutable once built.
class TriggerVocabulary {
 public:
  TriggerVocabulary(std::vector<TriggerCategory> categories,
                    std::vector<std::string> answer_cues,
                    std::map<std::string, VocabularyOverlay> overlays = {});

  const std::vector<TriggerCategory>& categories() const { return categories_; }
  const std::vector<std::string>& answer_cues() const { return answer_cues_; }
  const std::map<std::string, VocabularyOverlay>& overlays() const {
    return overlays_;
  }

  // Phrases of one category; empty when the category does not exist.
  const std::vector<std::string>& category(std::string_view name) const;
  bool contains(std::string_view category, std::string_view phrase) const;
  bool empty() const;
  std::size_t phrase_count() const;

  // Copy with the overlay's phrases merged in. Throws ConfigError for an
  // unknown overlay name.
  TriggerVocabulary with_overlay(std::string_view overlay) const;
  // Leave-one-category-out ablation.
  TriggerVocabulary without_category(std::string_view name) const;

  // Stable hex digest of categories and cues (overlays excluded).
  std::string fingerprint() const;

  nlohmann::json to_json() const;
  static TriggerVocabulary from_json(const nlohmann::json& object);
  static TriggerVocabulary load(const std::filesystem::path& path);

 private:
  std::vector<TriggerCategory> categories_;
  std::vector<std::string> answer_cues_;
  std::map<std::string, VocabularyOverlay> overlays_;
};

// Base lexicon with the in-category expansion and new-category overlays.
const TriggerVocabulary& default_vocabulary();

struct ReflectionMatch {
  std::string category;
  std::string phrase;

  bool operator==(const ReflectionMatch&) const = default;
};

struct ReflectionSignal {
  bool reflective = false;
  std::vector<ReflectionMatch> matched_phrases;
};

// Case-insensitive substring containment over every category.
ReflectionSignal detect_reflection(std::string_view step_text,
                                   const TriggerVocabulary& vocab);

// Latches once any answer cue appears.
bool update_answer_cue(bool prior_flag, std::string_view step_text,
                       const TriggerVocabulary& vocab);

std::string to_lower_ascii(std::string_view text);

// Lint findings for a vocabulary file.
struct VocabularyIssue {
  enum class Severity { kWarning, kError } severity;
  std::string message;
};

std::vector<VocabularyIssue> lint_vocabulary(const nlohmann::json& object);

}  // namespace refrain
