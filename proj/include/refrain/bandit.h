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
#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refrain/rng.h"

namespace refrain {

// Bounded FIFO of the most recent rewards for one threshold arm.
class ArmBuffer {
 public:
  ArmBuffer(double tau, std::size_t capacity);

  double tau() const { return tau_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return rewards_.size(); }
  bool empty() const { return rewards_.empty(); }
  const std::deque<double>& rewards() const { return rewards_; }
  // Mean of the buffered rewards; 0 when empty.
  double mean() const;

  void push(double reward);

 private:
  double tau_;
  std::size_t capacity_;
  std::deque<double> rewards_;
};

inline constexpr std::size_t kDefaultWindow = 50;
inline constexpr double kDefaultExploration = 0.5;

std::vector<double> default_thresholds();

class BanditState {
 public:
  // `taus` must be strictly increasing within [0, 1].
  BanditState(const std::vector<double>& taus, std::size_t window = kDefaultWindow,
              double exploration = kDefaultExploration);

  const std::vector<ArmBuffer>& arms() const { return arms_; }
  std::uint64_t round() const { return round_; }
  std::size_t window() const { return window_; }
  double exploration() const { return exploration_; }
  // min(k, W * |T|).
  std::uint64_t effective_time() const;
  std::size_t total_stored() const;
  // Index of the first arm with an empty buffer, if any.
  std::optional<std::size_t> first_empty_arm() const;

  // Pushes into one arm's buffer (evicting its oldest when full) and advances
  // the round. Throws ConfigError for an invalid arm.
  void record(std::size_t arm, double reward);

  nlohmann::json to_json() const;
  static BanditState from_json(const nlohmann::json& object);

 private:
  std::vector<ArmBuffer> arms_;
  std::size_t window_;
  double exploration_;
  std::uint64_t round_ = 1;
};

struct ArmChoice {
  double tau = 0.0;
  std::size_t arm = 0;

  bool operator==(const ArmChoice&) const = default;
};

// mean + C * sqrt(2 ln(t_eff) / max(1, n)).
double ucb_index(const ArmBuffer& arm, std::uint64_t t_eff, double exploration);

// Cold start first (lowest empty arm); otherwise the max UCB index, ties to
// the lowest arm.
ArmChoice select_arm_sw_ucb(const BanditState& state);

// Value-returning form of BanditState::record.
BanditState record_reward(BanditState state, std::size_t arm, double reward);

// Cold start as for SW-UCB. Then draws u ~ U[0,1); u < epsilon explores a
// uniform arm, otherwise exploits the highest buffer mean (ties low).
ArmChoice select_arm_epsilon_greedy(const BanditState& state, double epsilon,
                                    Rng& rng);

ArmChoice select_arm_random(const BanditState& state, Rng& rng);

}  // namespace refrain
