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

#include <cstdint>
#include <optional>
#include <span>

namespace refrain {

// exp(mean(logprobs)) over the boxed answer tokens. Throws
// UnscorableAnswerError for an empty list and ConfigError for a positive
// logprob.
double answer_likelihood(std::span<const double> answer_logprobs);

struct RewardConfig {
  double lambda = 0.1;
  double cold_start_coeff = 0.0001;

  void validate() const;
};

// Running mean of per-episode total token counts. Values are immutable
// snapshots; record_length returns the successor.
class LengthTracker {
 public:
  LengthTracker() = default;
  LengthTracker(std::uint64_t episode_count, std::uint64_t token_sum)
      : episode_count_(episode_count), token_sum_(token_sum) {}

  std::uint64_t episode_count() const { return episode_count_; }
  std::uint64_t token_sum() const { return token_sum_; }
  // Absent before the first episode.
  std::optional<double> mean_tokens() const;

 private:
  std::uint64_t episode_count_ = 0;
  std::uint64_t token_sum_ = 0;
};

LengthTracker record_length(const LengthTracker& tracker,
                            std::int64_t total_tokens);

struct RewardRecord {
  double score = 0.0;
  std::int64_t total_tokens = 0;
  double reward = 0.0;
  bool cold_start = false;
};

// score - lambda * L / mean(L) once a mean exists, otherwise
// score - cold_start_coeff * L. Does not touch the tracker.
RewardRecord compute_reward(double score, std::int64_t total_tokens,
                            const LengthTracker& tracker,
                            const RewardConfig& cfg);

}  // namespace refrain
