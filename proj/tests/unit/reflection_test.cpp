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

#include <gtest/gtest.h>

#include <algorithm>

#include "refrain/errors.h"
#include "refrain/reflection.h"

namespace refrain {
namespace {

bool has_match(const ReflectionSignal& s, std::string_view cat, std::string_view phrase) {
  return std::any_of(s.matched_phrases.begin(), s.matched_phrases.end(), [&](const auto& m) {
    return m.category == cat && m.phrase == phrase;
  });
}

bool has_category(const ReflectionSignal& s, std::string_view cat) {
  return std::any_of(s.matched_phrases.begin(), s.matched_phrases.end(),
                     [&](const auto& m) { return m.category == cat; });
}

TEST(DefaultVocabulary, CorePhrases) {
  const auto& v = default_vocabulary();
  EXPECT_TRUE(v.contains(kCheck, "wait"));
  EXPECT_TRUE(v.contains(kShift, "alternatively"));
  EXPECT_TRUE(v.contains(kUncert, "hmm"));
  EXPECT_TRUE(v.contains(kRetro, "earlier we saw"));
  EXPECT_EQ(v.categories().size(), 4u);
  EXPECT_EQ(v.phrase_count(), 19u);
}

TEST(DefaultVocabulary, NewCategoryOverlay) {
  const auto v = default_vocabulary().with_overlay(kNewCategory);
  EXPECT_TRUE(v.contains("new", "simplify this problem"));
  EXPECT_FALSE(default_vocabulary().contains("new", "simplify this problem"));
}

TEST(DefaultVocabulary, InCategoryExpansion) {
  const auto v = default_vocabulary().with_overlay(kInCategoryExpansion);
  EXPECT_TRUE(v.contains(kCheck, "let me double check"));
  EXPECT_TRUE(v.contains(kCheck, "wait"));
  EXPECT_EQ(v.categories().size(), 4u);
  EXPECT_THROW(default_vocabulary().with_overlay("nope"), ConfigError);
}

TEST(DefaultVocabulary, WithoutCategory) {
  const auto v = default_vocabulary().without_category(kUncert);
  EXPECT_EQ(v.categories().size(), 3u);
  EXPECT_FALSE(detect_reflection("hmm", v).reflective);
  EXPECT_TRUE(detect_reflection("hmm", default_vocabulary()).reflective);
}

TEST(DetectReflection, CheckPhrases) {
  const auto s = detect_reflection("Wait, let me check that sum.", default_vocabulary());
  EXPECT_TRUE(s.reflective);
  EXPECT_TRUE(has_match(s, kCheck, "wait"));
  EXPECT_TRUE(has_match(s, kCheck, "let me check"));
}

TEST(DetectReflection, PlainComputation) {
  EXPECT_FALSE(detect_reflection("Compute 6×7 = 42.", default_vocabulary()).reflective);
}

TEST(DetectReflection, UncertAndRetro) {
  const auto s = detect_reflection("Hmm, perhaps I should recall that earlier we saw x=3.",
                                   default_vocabulary());
  EXPECT_TRUE(has_category(s, kUncert));
  EXPECT_TRUE(has_category(s, kRetro));
  EXPECT_TRUE(has_match(s, kRetro, "recall that"));
}

TEST(DetectReflection, CaseInsensitive) {
  EXPECT_TRUE(detect_reflection("ALTERNATIVELY we go", default_vocabulary()).reflective);
}

TEST(DetectReflection, EmptyVocabularyRejected) {
  TriggerVocabulary empty({{"check", {}}, {"shift", {}}, {"uncert", {}}, {"retro", {}}},
                          {"answer is"}, {});
  EXPECT_THROW(detect_reflection("wait", empty), ConfigError);
}

TEST(AnswerCue, Examples) {
  const auto& v = default_vocabulary();
  EXPECT_TRUE(update_answer_cue(false, "So the answer is 42.", v));
  EXPECT_TRUE(update_answer_cue(true, "unrelated text", v));
  EXPECT_FALSE(update_answer_cue(false, "no cue here", v));
  EXPECT_TRUE(update_answer_cue(false, "The ANSWER SHOULD BE 7", v));
}

// Once set, the flag never resets.
TEST(AnswerCue, LatchProperty) {
  const auto& v = default_vocabulary();
  const std::vector<std::string> steps = {"x", "the answer is 3", "y", "z", "wait"};
  bool h = false;
  bool seen = false;
  for (const auto& s : steps) {
    h = update_answer_cue(h, s, v);
    seen = seen || s.find("answer is") != std::string::npos;
    EXPECT_EQ(h, seen);
  }
}

TEST(VocabularyJson, RoundTrip) {
  const auto& v = default_vocabulary();
  const auto back = TriggerVocabulary::from_json(v.to_json());
  EXPECT_EQ(back.fingerprint(), v.fingerprint());
  EXPECT_EQ(back.with_overlay(kNewCategory).phrase_count(),
            v.with_overlay(kNewCategory).phrase_count());
}

TEST(VocabularyJson, LowercasesAndAddsExtraCategories) {
  nlohmann::json j = {{"check", {"WAIT"}},
                      {"shift", {"alternatively"}},
                      {"uncert", {"hmm"}},
                      {"retro", {"recall that"}},
                      {"planning", {"the plan is to"}}};
  const auto v = TriggerVocabulary::from_json(j);
  EXPECT_TRUE(v.contains(kCheck, "wait"));
  EXPECT_TRUE(v.contains("planning", "the plan is to"));
  EXPECT_EQ(v.answer_cues().size(), 2u);
}

TEST(VocabularyJson, Errors) {
  EXPECT_THROW(TriggerVocabulary::from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(TriggerVocabulary::from_json({{"check", {"wait"}}}), ConfigError);
  nlohmann::json j = {{"check", {""}}, {"shift", {"a"}}, {"uncert", {"b"}}, {"retro", {"c"}}};
  EXPECT_THROW(TriggerVocabulary::from_json(j), ConfigError);
  EXPECT_THROW(TriggerVocabulary::load("/nonexistent/vocab.json"), Error);
}

TEST(VocabularyJson, FingerprintTracksContent) {
  const auto a = default_vocabulary().fingerprint();
  const auto b = default_vocabulary().with_overlay(kNewCategory).fingerprint();
  EXPECT_NE(a, b);
  EXPECT_EQ(a, default_vocabulary().fingerprint());
}

TEST(LintVocabulary, DefaultIsClean) {
  for (const auto& issue : lint_vocabulary(default_vocabulary().to_json())) {
    EXPECT_NE(issue.severity, VocabularyIssue::Severity::kError) << issue.message;
  }
}

TEST(LintVocabulary, FindsProblems) {
  nlohmann::json j = {{"check", {"Wait", "wait"}}, {"shift", {"wait"}}, {"uncert", 3}};
  const auto issues = lint_vocabulary(j);
  auto count = [&](VocabularyIssue::Severity s) {
    return std::count_if(issues.begin(), issues.end(),
                         [&](const auto& i) { return i.severity == s; });
  };
  EXPECT_GE(count(VocabularyIssue::Severity::kError), 2);  // missing retro, uncert not array
  EXPECT_GE(count(VocabularyIssue::Severity::kWarning), 3);
}

}  // namespace
}  // namespace refrain
