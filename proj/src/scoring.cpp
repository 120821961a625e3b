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

#include "refrain/scoring.h"

#include <cmath>
#include <string>

#include "refrain/errors.h"

namespace refrain {

double answer_likelihood(std::span<const double> answer_logprobs) {
  if (answer_logprobs.empty()) {
    throw UnscorableAnswerError("no boxed answer tokens to score");
  }
  double sum = 0.0;
  for (double lp : answer_logprobs) {
    if (!(lp <= 0.0)) {
      throw ConfigError("logprob must be <= 0, got " + std::to_string(lp));
    }
    sum += lp;
  }
  return std::exp(sum / static_cast<double>(answer_logprobs.size()));
}

void RewardConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("reward lambda must be > 0");
  if (!(cold_start_coeff >= 0.0)) {
    throw ConfigError("cold-start coefficient must be >= 0");
  }
}

std::optional<double> LengthTracker::mean_tokens() const {
  if (episode_count_ == 0) return std::nullopt;
  return static_cast<double>(token_sum_) / static_cast<double>(episode_count_);
}

LengthTracker record_length(const LengthTracker& tracker,
                            std::int64_t total_tokens) {
  if (total_tokens <= 0) throw ConfigError("total_tokens must be positive");
  return LengthTracker(tracker.episode_count() + 1,
                       tracker.token_sum() +
                           static_cast<std::uint64_t>(total_tokens));
}

RewardRecord compute_reward(double score, std::int64_t total_tokens,
                            const LengthTracker& tracker,
                            const RewardConfig& cfg) {
  cfg.validate();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ConfigError("score must lie in [0, 1]");
  }
  if (total_tokens <= 0) throw ConfigError("total_tokens must be positive");

  RewardRecord rec;
  rec.score = score;
  rec.total_tokens = total_tokens;
  const double length = static_cast<double>(total_tokens);
  if (tracker.episode_count() == 0) {
    rec.cold_start = true;
    rec.reward = score - cfg.cold_start_coeff * length;
    return rec;
  }
  const double mean = *tracker.mean_tokens();
  if (!(mean > 0.0)) {
    throw InternalStateError("running mean of token counts is not positive");
  }
  rec.reward = score - cfg.lambda * length / mean;
  return rec;
}

}  // namespace refrain
