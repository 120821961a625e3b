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

#include "refrain/bandit.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "refrain/errors.h"

namespace refrain {

ArmBuffer::ArmBuffer(double tau, std::size_t capacity)
    : tau_(tau), capacity_(capacity) {
  if (capacity == 0) throw ConfigError("arm buffer capacity must be positive");
}

double ArmBuffer::mean() const {
  if (rewards_.empty()) return 0.0;
  return std::accumulate(rewards_.begin(), rewards_.end(), 0.0) /
         static_cast<double>(rewards_.size());
}

void ArmBuffer::push(double reward) {
  if (rewards_.size() == capacity_) rewards_.pop_front();
  rewards_.push_back(reward);
}

std::vector<double> default_thresholds() {
  return {0.60, 0.65, 0.70, 0.75, 0.80};
}

BanditState::BanditState(const std::vector<double>& taus, std::size_t window,
                         double exploration)
    : window_(window), exploration_(exploration) {
  if (taus.empty()) throw ConfigError("candidate threshold set is empty");
  if (window == 0) throw ConfigError("window W must be positive");
  if (!(exploration > 0.0)) throw ConfigError("exploration C must be positive");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] >= 0.0 && taus[i] <= 1.0)) {
      throw ConfigError("threshold " + std::to_string(taus[i]) +
                        " outside [0, 1]");
    }
    if (i > 0 && !(taus[i] > taus[i - 1])) {
      throw ConfigError("thresholds must be strictly increasing");
    }
    arms_.emplace_back(taus[i], window);
  }
}

std::uint64_t BanditState::effective_time() const {
  const std::uint64_t cap = window_ > UINT64_MAX / arms_.size()
                                ? UINT64_MAX
                                : static_cast<std::uint64_t>(window_) * arms_.size();
  return std::min(round_, cap);
}

std::size_t BanditState::total_stored() const {
  std::size_t n = 0;
  for (const auto& arm : arms_) n += arm.size();
  return n;
}

std::optional<std::size_t> BanditState::first_empty_arm() const {
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    if (arms_[i].empty()) return i;
  }
  return std::nullopt;
}

void BanditState::record(std::size_t arm, double reward) {
  if (arm >= arms_.size()) {
    throw ConfigError("arm index " + std::to_string(arm) + " out of range");
  }
  arms_[arm].push(reward);
  ++round_;
}

nlohmann::json BanditState::to_json() const {
  nlohmann::json arms = nlohmann::json::array();
  for (const auto& arm : arms_) {
    arms.push_back({{"tau", arm.tau()},
                    {"rewards", std::vector<double>(arm.rewards().begin(),
                                                    arm.rewards().end())}});
  }
  return {{"window", window_},
          {"exploration", exploration_},
          {"round", round_},
          {"arms", arms}};
}

BanditState BanditState::from_json(const nlohmann::json& object) {
  try {
    std::vector<double> taus;
    for (const auto& arm : object.at("arms")) taus.push_back(arm.at("tau").get<double>());
    BanditState state(taus, object.at("window").get<std::size_t>(),
                      object.at("exploration").get<double>());
    const auto& arms = object.at("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto rewards = arms[i].at("rewards").get<std::vector<double>>();
      if (rewards.size() > state.window_) {
        throw ConfigError("bandit snapshot: buffer exceeds window");
      }
      for (double r : rewards) state.arms_[i].push(r);
    }
    state.round_ = object.at("round").get<std::uint64_t>();
    if (state.round_ == 0) throw ConfigError("bandit snapshot: round must be >= 1");
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bandit snapshot: ") + e.what());
  }
}

double ucb_index(const ArmBuffer& arm, std::uint64_t t_eff, double exploration) {
  const double n = static_cast<double>(std::max<std::size_t>(1, arm.size()));
  return arm.mean() +
         exploration * std::sqrt(2.0 * std::log(static_cast<double>(t_eff)) / n);
}

ArmChoice select_arm_sw_ucb(const BanditState& state) {
  const auto& arms = state.arms();
  if (auto empty = state.first_empty_arm()) return {arms[*empty].tau(), *empty};
  const std::uint64_t t_eff = state.effective_time();
  std::size_t best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < arms.size(); ++i) {
    double idx = ucb_index(arms[i], t_eff, state.exploration());
    if (idx > best_index) {
      best_index = idx;
      best = i;
    }
  }
  return {arms[best].tau(), best};
}

BanditState record_reward(BanditState state, std::size_t arm, double reward) {
  state.record(arm, reward);
  return state;
}

ArmChoice select_arm_epsilon_greedy(const BanditState& state, double epsilon,
                                    Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  const auto& arms = state.arms();
  if (auto empty = state.first_empty_arm()) return {arms[*empty].tau(), *empty};
  // The degenerate rates draw nothing, so epsilon = 1 replays the uniform stream.
  const bool explore =
      epsilon >= 1.0 || (epsilon > 0.0 && rng.uniform01() < epsilon);
  if (explore) {
    auto i = static_cast<std::size_t>(rng.uniform_index(arms.size()));
    return {arms[i].tau(), i};
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < arms.size(); ++i) {
    if (arms[i].mean() > arms[best].mean()) best = i;
  }
  return {arms[best].tau(), best};
}

ArmChoice select_arm_random(const BanditState& state, Rng& rng) {
  const auto& arms = state.arms();
  auto i = static_cast<std::size_t>(rng.uniform_index(arms.size()));
  return {arms[i].tau(), i};
}

}  // namespace refrain
