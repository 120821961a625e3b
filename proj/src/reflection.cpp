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

#include "refrain/reflection.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include "refrain/errors.h"

namespace refrain {
namespace {

const std::array<std::string_view, 4> kCoreCategories = {kCheck, kShift,
                                                         kUncert, kRetro};

std::vector<std::string> normalized(std::vector<std::string> phrases,
                                    std::string_view where) {
  for (auto& p : phrases) {
    p = to_lower_ascii(p);
    if (p.empty()) {
      throw ConfigError("empty phrase in '" + std::string(where) + "'");
    }
  }
  return phrases;
}

std::vector<std::string> string_list(const nlohmann::json& value,
                                     std::string_view key) {
  if (!value.is_array()) {
    throw ConfigError("vocabulary key '" + std::string(key) +
                      "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw ConfigError("vocabulary key '" + std::string(key) +
                        "' must be an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

bool is_reserved_key(std::string_view key) {
  return key == "answer_cues" || key == "overlays";
}

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

TriggerVocabulary::TriggerVocabulary(
    std::vector<TriggerCategory> categories,
    std::vector<std::string> answer_cues,
    std::map<std::string, VocabularyOverlay> overlays)
    : categories_(std::move(categories)),
      answer_cues_(normalized(std::move(answer_cues), "answer_cues")),
      overlays_(std::move(overlays)) {
  std::set<std::string> names;
  for (auto& cat : categories_) {
    if (cat.name.empty()) throw ConfigError("unnamed trigger category");
    if (!names.insert(cat.name).second) {
      throw ConfigError("duplicate trigger category '" + cat.name + "'");
    }
    cat.phrases = normalized(std::move(cat.phrases), cat.name);
  }
  for (auto& [name, overlay] : overlays_) {
    for (auto& [cat, phrases] : overlay) {
      phrases = normalized(std::move(phrases), name + "." + cat);
    }
  }
}

const std::vector<std::string>& TriggerVocabulary::category(
    std::string_view name) const {
  static const std::vector<std::string> kEmpty;
  for (const auto& cat : categories_) {
    if (cat.name == name) return cat.phrases;
  }
  return kEmpty;
}

bool TriggerVocabulary::contains(std::string_view category_name,
                                 std::string_view phrase) const {
  const auto& phrases = category(category_name);
  return std::find(phrases.begin(), phrases.end(), phrase) != phrases.end();
}

bool TriggerVocabulary::empty() const { return phrase_count() == 0; }

std::size_t TriggerVocabulary::phrase_count() const {
  std::size_t n = 0;
  for (const auto& cat : categories_) n += cat.phrases.size();
  return n;
}

TriggerVocabulary TriggerVocabulary::with_overlay(std::string_view overlay) const {
  auto it = overlays_.find(std::string(overlay));
  if (it == overlays_.end()) {
    throw ConfigError("unknown vocabulary overlay '" + std::string(overlay) + "'");
  }
  auto categories = categories_;
  for (const auto& [name, phrases] : it->second) {
    auto cat = std::find_if(categories.begin(), categories.end(),
                            [&](const auto& c) { return c.name == name; });
    if (cat == categories.end()) {
      categories.push_back({name, {}});
      cat = std::prev(categories.end());
    }
    for (const auto& p : phrases) {
      if (std::find(cat->phrases.begin(), cat->phrases.end(), p) ==
          cat->phrases.end()) {
        cat->phrases.push_back(p);
      }
    }
  }
  return TriggerVocabulary(std::move(categories), answer_cues_, overlays_);
}

TriggerVocabulary TriggerVocabulary::without_category(std::string_view name) const {
  auto categories = categories_;
  std::erase_if(categories, [&](const auto& c) { return c.name == name; });
  return TriggerVocabulary(std::move(categories), answer_cues_, overlays_);
}

std::string TriggerVocabulary::fingerprint() const {
  // FNV-1a over a canonical, order-preserving serialization.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  for (const auto& cat : categories_) {
    mix(cat.name);
    for (const auto& p : cat.phrases) mix(p);
  }
  mix("answer_cues");
  for (const auto& c : answer_cues_) mix(c);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json TriggerVocabulary::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& cat : categories_) out[cat.name] = cat.phrases;
  out["answer_cues"] = answer_cues_;
  if (!overlays_.empty()) {
    nlohmann::json overlays = nlohmann::json::object();
    for (const auto& [name, overlay] : overlays_) overlays[name] = overlay;
    out["overlays"] = overlays;
  }
  return out;
}

TriggerVocabulary TriggerVocabulary::from_json(const nlohmann::json& object) {
  if (!object.is_object()) throw ConfigError("vocabulary must be a JSON object");
  std::vector<TriggerCategory> categories;
  for (auto name : kCoreCategories) {
    auto it = object.find(std::string(name));
    if (it == object.end()) {
      throw ConfigError("vocabulary is missing category '" + std::string(name) + "'");
    }
    categories.push_back({std::string(name), string_list(*it, name)});
  }
  // Extra categories follow the core four in key order.
  for (const auto& [key, value] : object.items()) {
    if (is_reserved_key(key) ||
        std::find(kCoreCategories.begin(), kCoreCategories.end(), key) !=
            kCoreCategories.end()) {
      continue;
    }
    categories.push_back({key, string_list(value, key)});
  }

  std::vector<std::string> cues = {"answer is", "answer should be"};
  if (auto it = object.find("answer_cues"); it != object.end()) {
    cues = string_list(*it, "answer_cues");
  }

  std::map<std::string, VocabularyOverlay> overlays;
  if (auto it = object.find("overlays"); it != object.end()) {
    if (!it->is_object()) throw ConfigError("'overlays' must be an object");
    for (const auto& [name, body] : it->items()) {
      if (!body.is_object()) {
        throw ConfigError("overlay '" + name + "' must be an object");
      }
      VocabularyOverlay overlay;
      for (const auto& [cat, phrases] : body.items()) {
        overlay[cat] = string_list(phrases, name + "." + cat);
      }
      overlays[name] = std::move(overlay);
    }
  }
  return TriggerVocabulary(std::move(categories), std::move(cues),
                           std::move(overlays));
}

TriggerVocabulary TriggerVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  nlohmann::json object;
  try {
    object = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("vocabulary file " + path.string() + ": " + e.what());
  }
  return from_json(object);
}

const TriggerVocabulary& default_vocabulary() {
  static const TriggerVocabulary vocab(
      {
          {std::string(kCheck),
           {"wait", "let me check", "hold on", "have made a mistake"}},
          {std::string(kShift),
           {"alternatively", "let me try", "think of it as", "let me consider"}},
          {std::string(kUncert),
           {"not sure", "looks like", "that seems", "hmm", "perhaps", "maybe i"}},
          {std::string(kRetro),
           {"earlier we saw", "from before", "so now we have", "recall that",
            "let me go back"}},
      },
      {"answer is", "answer should be"},
      {
          {std::string(kInCategoryExpansion),
           {
               {std::string(kCheck),
                {"let me double check", "wait a moment", "is that correct",
                 "let me re-read"}},
               {std::string(kShift),
                {"what if we try", "let's think from a different angle",
                 "an alternative method would be", "instead of doing that"}},
               {std::string(kUncert),
                {"i'm not certain", "it seems", "i suspect", "my guess is"}},
               {std::string(kRetro),
                {"as we established previously", "based on our previous result",
                 "remember that we found", "the value from step"}},
           }},
          {std::string(kNewCategory),
           {
               {"new",
                {"simplify this problem", "the core of the problem is",
                 "this is equivalent to", "this is equal to",
                 "the key insight here is", "break this down",
                 "the overall plan is to", "the plan is to"}},
           }},
      });
  return vocab;
}

ReflectionSignal detect_reflection(std::string_view step_text,
                                   const TriggerVocabulary& vocab) {
  if (vocab.empty()) throw ConfigError("reflection vocabulary is empty");
  ReflectionSignal signal;
  const std::string lowered = to_lower_ascii(step_text);
  for (const auto& cat : vocab.categories()) {
    for (const auto& phrase : cat.phrases) {
      if (lowered.find(phrase) != std::string::npos) {
        signal.matched_phrases.push_back({cat.name, phrase});
      }
    }
  }
  signal.reflective = !signal.matched_phrases.empty();
  return signal;
}

bool update_answer_cue(bool prior_flag, std::string_view step_text,
                       const TriggerVocabulary& vocab) {
  if (prior_flag) return true;
  const std::string lowered = to_lower_ascii(step_text);
  return std::any_of(vocab.answer_cues().begin(), vocab.answer_cues().end(),
                     [&](const std::string& cue) {
                       return lowered.find(cue) != std::string::npos;
                     });
}

std::vector<VocabularyIssue> lint_vocabulary(const nlohmann::json& object) {
  using Severity = VocabularyIssue::Severity;
  std::vector<VocabularyIssue> issues;
  if (!object.is_object()) {
    issues.push_back({Severity::kError, "vocabulary must be a JSON object"});
    return issues;
  }
  for (auto name : kCoreCategories) {
    if (!object.contains(std::string(name))) {
      issues.push_back({Severity::kError,
                        "missing category '" + std::string(name) + "'"});
    }
  }
  if (!object.contains("answer_cues")) {
    issues.push_back({Severity::kWarning,
                      "no 'answer_cues'; defaults will be used"});
  }

  std::map<std::string, std::string> owner;  // phrase -> first category
  auto check_list = [&](const std::string& where, const nlohmann::json& list) {
    if (!list.is_array()) {
      issues.push_back({Severity::kError, "'" + where + "' is not an array"});
      return;
    }
    std::set<std::string> local;
    for (const auto& item : list) {
      if (!item.is_string()) {
        issues.push_back({Severity::kError, "'" + where + "' holds a non-string"});
        continue;
      }
      const auto raw = item.get<std::string>();
      if (raw.empty()) {
        issues.push_back({Severity::kError, "'" + where + "' holds an empty phrase"});
        continue;
      }
      const auto phrase = to_lower_ascii(raw);
      if (phrase != raw) {
        issues.push_back({Severity::kWarning, "'" + where + "': '" + raw +
                                                  "' is not lowercase"});
      }
      if (!local.insert(phrase).second) {
        issues.push_back({Severity::kWarning,
                          "'" + where + "': duplicate phrase '" + phrase + "'"});
      } else if (where != "answer_cues") {
        auto [it, inserted] = owner.emplace(phrase, where);
        if (!inserted) {
          issues.push_back({Severity::kWarning, "'" + phrase + "' appears in both '" +
                                                    it->second + "' and '" + where +
                                                    "'"});
        }
      }
    }
  };

  for (const auto& [key, value] : object.items()) {
    if (key == "overlays") {
      if (!value.is_object()) {
        issues.push_back({Severity::kError, "'overlays' must be an object"});
        continue;
      }
      for (const auto& [name, body] : value.items()) {
        if (!body.is_object()) {
          issues.push_back({Severity::kError,
                            "overlay '" + name + "' must be an object"});
          continue;
        }
        for (const auto& [cat, list] : body.items()) {
          if (!list.is_array()) {
            issues.push_back({Severity::kError,
                              "'" + name + "." + cat + "' is not an array"});
          }
        }
      }
      continue;
    }
    check_list(key, value);
  }
  return issues;
}

}  // namespace refrain
