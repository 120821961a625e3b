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

#include <cmath>
#include <vector>

#include "refrain/errors.h"
#include "refrain/scoring.h"

namespace refrain {
namespace {

TEST(AnswerLikelihood, Examples) {
  EXPECT_DOUBLE_EQ(answer_likelihood(std::vector<double>{0, 0, 0}), 1.0);
  EXPECT_NEAR(answer_likelihood(std::vector<double>{-0.5, -1.5}), 0.367879, 1e-6);
  EXPECT_NEAR(answer_likelihood(std::vector<double>{-0.5, -1.5}), std::exp(-1.0), 1e-15);
  EXPECT_THROW(answer_likelihood(std::vector<double>{}), UnscorableAnswerError);
}

TEST(AnswerLikelihood, RejectsPositiveLogprob) {
  EXPECT_THROW(answer_likelihood(std::vector<double>{-0.1, 0.2}), ConfigError);
  EXPECT_THROW(answer_likelihood(std::vector<double>{std::nan("")}), ConfigError);
}

TEST(ComputeReward, Examples) {
  const RewardConfig cfg;
  // Mean 1000 from two prior episodes.
  const LengthTracker mean_1000(2, 2000);
  EXPECT_NEAR(compute_reward(0.9, 1200, mean_1000, cfg).reward, 0.78, 1e-12);
  const auto first = compute_reward(0.9, 2000, LengthTracker{}, cfg);
  EXPECT_NEAR(first.reward, 0.7, 1e-12);
  EXPECT_TRUE(first.cold_start);
  EXPECT_NEAR(compute_reward(0.5, 1000, mean_1000, cfg).reward, 0.4, 1e-12);
  EXPECT_FALSE(compute_reward(0.5, 1000, mean_1000, cfg).cold_start);
}

TEST(ComputeReward, Errors) {
  const RewardConfig cfg;
  EXPECT_THROW(compute_reward(1.5, 10, LengthTracker{}, cfg), ConfigError);
  EXPECT_THROW(compute_reward(0.5, 0, LengthTracker{}, cfg), ConfigError);
  EXPECT_THROW(compute_reward(0.5, 10, LengthTracker(3, 0), cfg), InternalStateError);
  RewardConfig bad;
  bad.lambda = 0.0;
  EXPECT_THROW(compute_reward(0.5, 10, LengthTracker{}, bad), ConfigError);
}

TEST(RecordLength, Examples) {
  auto t = record_length(LengthTracker{}, 1000);
  EXPECT_EQ(t.episode_count(), 1u);
  EXPECT_DOUBLE_EQ(*t.mean_tokens(), 1000.0);
  t = record_length(t, 2000);
  EXPECT_DOUBLE_EQ(*t.mean_tokens(), 1500.0);
  t = record_length(t, 1500);
  EXPECT_EQ(t.episode_count(), 3u);
  EXPECT_DOUBLE_EQ(*t.mean_tokens(), 1500.0);
  EXPECT_FALSE(LengthTracker{}.mean_tokens().has_value());
  EXPECT_THROW(record_length(LengthTracker{}, 0), ConfigError);
}

// The running mean uses only earlier episodes: recording after computing.
TEST(ComputeReward, PriorEpisodesOnly) {
  const RewardConfig cfg;
  LengthTracker t;
  const std::vector<std::int64_t> lengths = {100, 300, 200};
  std::vector<double> rewards;
  for (auto L : lengths) {
    rewards.push_back(compute_reward(1.0, L, t, cfg).reward);
    t = record_length(t, L);
  }
  EXPECT_NEAR(rewards[0], 1.0 - 0.0001 * 100, 1e-15);
  EXPECT_NEAR(rewards[1], 1.0 - 0.1 * 300.0 / 100.0, 1e-15);
  EXPECT_NEAR(rewards[2], 1.0 - 0.1 * 200.0 / 200.0, 1e-15);
}

}  // namespace
}  // namespace refrain
