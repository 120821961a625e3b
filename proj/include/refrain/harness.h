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
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "refrain/backend.h"
#include "refrain/bandit.h"
#include "refrain/prompts.h"
#include "refrain/redundancy.h"
#include "refrain/reflection.h"
#include "refrain/rng.h"
#include "refrain/scoring.h"
#include "refrain/trace.h"

namespace refrain {

enum class PolicyKind {
  kRefrainSwUcb,
  kRefrainMab,
  kRst,
  kFixedTau,
  kVanilla,
  kNoThinking,
  kBudget,
  kSpEarly,
  kSptwEarly,
};

std::string_view to_string(PolicyKind kind);
// Throws ConfigError listing the valid names.
PolicyKind parse_policy_kind(std::string_view name);
std::vector<std::string> policy_kind_names();

// Step-probability stopping: min(cap, slope * n) from `start_step` on.
struct StopSchedule {
  double slope = 0.002;
  double cap = 0.5;
  int start_step = 10;
};

double stop_probability(int step, const StopSchedule& schedule = {});

struct StopPolicy {
  PolicyKind kind = PolicyKind::kRefrainSwUcb;
  double tau = 0.70;     // fixed
  int budget = 0;        // budget
  double epsilon = 0.1;  // mab
  StopSchedule schedule;  // sp-early / sptw-early

  void validate() const;
  // Threshold chosen online per question (sequential loop).
  bool is_online() const;
  // Stops with the reflective-redundancy rule.
  bool uses_discriminator() const;
};

// Named per-benchmark thinking caps, e.g. "gsm8k-512" or "gpqa-8192".
int budget_preset(std::string_view name);
std::vector<std::string> budget_preset_names();

// Incremental two-stage stop rule over one trace.
class StopDiscriminator {
 public:
  StopDiscriminator(const TriggerVocabulary& vocab, const SimilarityBackend& similarity,
                    double tau);

  // Decision for the next step. The answer-cue flag covers only earlier steps;
  // the current step's cue is folded in afterwards.
  StopDecision observe(std::string_view step_text);
  bool answer_cue_seen() const { return cue_seen_; }

 private:
  const TriggerVocabulary& vocab_;
  std::unique_ptr<RedundancyScorer> scorer_;
  double tau_;
  bool cue_seen_ = false;
};

// Decision at every step of a fixed sequence, without stopping.
std::vector<StopDecision> discriminate_steps(std::span<const std::string> steps,
                                             const TriggerVocabulary& vocab,
                                             const SimilarityBackend& similarity,
                                             double tau);
// 1-based index of the first stop verdict.
std::optional<int> first_stop_index(std::span<const StopDecision> decisions);

enum class StopCause { kNone, kRedundancy, kSchedule, kBudget };

std::string_view to_string(StopCause cause);
StopCause parse_stop_cause(std::string_view name);

struct EpisodeResult {
  std::string question_id;
  PolicyKind policy = PolicyKind::kVanilla;
  std::optional<double> tau_used;
  std::optional<std::size_t> arm;
  std::optional<int> stop_step;
  bool stopped_early = false;
  StopCause stop_cause = StopCause::kNone;
  int steps_seen = 0;
  std::optional<std::string> answer;
  bool correct = false;
  bool unscorable = false;
  int thinking_tokens = 0;
  int total_tokens = 0;
  double score = 0.0;
  double reward = 0.0;
  bool cold_start = false;
  Fidelity fidelity = Fidelity::kExact;
  // Set when the episode failed hard and was skipped.
  std::optional<std::string> error;

  bool operator==(const EpisodeResult&) const = default;
};

struct EpisodeComponents {
  GenerationBackend* backend = nullptr;
  const TriggerVocabulary* vocab = nullptr;
  const SimilarityBackend* similarity = nullptr;
  PromptTemplate prompt = PromptTemplate::builtin(PromptId::kP0);
};

// Runs one question under `policy`. `tau` is required for threshold
// policies; `rng` drives the probabilistic schedules. Reward fields are left
// for the benchmark loop.
EpisodeResult run_episode(const Question& question, const StopPolicy& policy,
                          std::optional<double> tau, const EpisodeComponents& components,
                          Rng& rng);

struct RunConfig {
  StopPolicy policy;
  std::vector<double> taus = default_thresholds();
  std::size_t window = kDefaultWindow;
  double exploration = kDefaultExploration;
  RewardConfig reward;
  std::uint64_t seed = 42;
  std::optional<std::uint64_t> shuffle_seed;
  // Workers for policies without online state.
  int jobs = 1;
  // Echoed into the report for provenance.
  std::string dataset;
  // Resume the bandit from a snapshot instead of a fresh state.
  std::optional<nlohmann::json> bandit_state;
};

struct BenchmarkHooks {
  std::function<void(std::size_t episode, const ArmChoice& choice)> on_select;
  std::function<void(std::size_t episode, std::size_t arm, double reward)> on_record;
};

struct ArmCount {
  double tau = 0.0;
  int count = 0;

  bool operator==(const ArmCount&) const = default;
};

struct BenchmarkReport {
  static constexpr int kSchemaVersion = 1;

  nlohmann::json config;
  std::vector<EpisodeResult> episodes;
  double pass_at_1 = 0.0;
  std::int64_t total_tokens = 0;
  std::vector<ArmCount> arm_counts;
  std::optional<nlohmann::json> bandit_state;

  int correct_count() const;
  bool operator==(const BenchmarkReport&) const = default;
};

// Questions are visited in dataset order (or a seeded permutation). Online
// policies run strictly sequentially: select, run, reward, record.
BenchmarkReport run_benchmark(std::vector<Question> dataset, const RunConfig& config,
                              const EpisodeComponents& components,
                              const BenchmarkHooks& hooks = {});

// Deterministic Fisher-Yates permutation.
std::vector<Question> shuffled(std::vector<Question> questions, std::uint64_t seed);

}  // namespace refrain
