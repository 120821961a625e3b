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

#include "refrain/harness.h"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "refrain/errors.h"

namespace refrain {
namespace {

struct PolicyName {
  PolicyKind kind;
  std::string_view name;
};

constexpr PolicyName kPolicyNames[] = {
    {PolicyKind::kRefrainSwUcb, "sw-ucb"}, {PolicyKind::kRefrainMab, "mab"},
    {PolicyKind::kRst, "rst"},             {PolicyKind::kFixedTau, "fixed"},
    {PolicyKind::kVanilla, "vanilla"},     {PolicyKind::kNoThinking, "no-thinking"},
    {PolicyKind::kBudget, "budget"},       {PolicyKind::kSpEarly, "sp-early"},
    {PolicyKind::kSptwEarly, "sptw-early"},
};

// Thinking-token caps swept per benchmark.
const std::map<std::string, int, std::less<>>& budget_presets() {
  static const std::map<std::string, int, std::less<>> presets = {
      {"gsm8k-512", 512},    {"gsm8k-1024", 1024}, {"gsm8k-1536", 1536},
      {"math500-1024", 1024}, {"math500-2048", 2048}, {"math500-3072", 3072},
      {"csqa-256", 256},     {"csqa-512", 512},    {"csqa-768", 768},
      {"gpqa-2048", 2048},   {"gpqa-4096", 4096},  {"gpqa-8192", 8192},
  };
  return presets;
}

EpisodeResult failed_episode(const Question& q, const StopPolicy& policy,
                             std::optional<double> tau, const std::exception& e) {
  EpisodeResult r;
  r.question_id = q.id;
  r.policy = policy.kind;
  r.tau_used = tau;
  r.error = std::string("question '") + q.id + "': " + e.what();
  return r;
}

EpisodeResult guarded_episode(const Question& q, const StopPolicy& policy,
                              std::optional<double> tau, const EpisodeComponents& c,
                              Rng& rng) {
  try {
    return run_episode(q, policy, tau, c, rng);
  } catch (const std::exception& e) {
    return failed_episode(q, policy, tau, e);
  }
}

nlohmann::json config_snapshot(const RunConfig& cfg, const EpisodeComponents& c) {
  const auto& p = cfg.policy;
  nlohmann::json policy = {{"kind", std::string(to_string(p.kind))}};
  switch (p.kind) {
    case PolicyKind::kFixedTau:
      policy["tau"] = p.tau;
      break;
    case PolicyKind::kBudget:
      policy["budget"] = p.budget;
      break;
    case PolicyKind::kRefrainMab:
      policy["epsilon"] = p.epsilon;
      break;
    case PolicyKind::kSpEarly:
    case PolicyKind::kSptwEarly:
      policy["schedule"] = {{"slope", p.schedule.slope},
                            {"cap", p.schedule.cap},
                            {"start_step", p.schedule.start_step}};
      break;
    default:
      break;
  }
  nlohmann::json out = {
      {"policy", policy},
      {"taus", cfg.taus},
      {"window", cfg.window},
      {"exploration", cfg.exploration},
      {"lambda", cfg.reward.lambda},
      {"cold_start_coeff", cfg.reward.cold_start_coeff},
      {"seed", cfg.seed},
      {"shuffle_seed", cfg.shuffle_seed ? nlohmann::json(*cfg.shuffle_seed)
                                        : nlohmann::json(nullptr)},
      {"dataset", cfg.dataset},
      {"backend", c.backend->name()},
      {"similarity", c.similarity ? c.similarity->name() : std::string()},
      {"vocabulary_fingerprint", c.vocab ? c.vocab->fingerprint() : std::string()},
      {"prompt_template", std::string(to_string(c.prompt.id()))},
  };
  if (cfg.bandit_state) out["resumed_bandit_state"] = true;
  return out;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& p : kPolicyNames) {
    if (p.kind == kind) return p.name;
  }
  return "vanilla";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (const auto& p : kPolicyNames) {
    if (p.name == name) return p.kind;
  }
  std::string valid;
  for (const auto& n : policy_kind_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown policy '" + std::string(name) + "'; valid: " + valid);
}

std::vector<std::string> policy_kind_names() {
  std::vector<std::string> names;
  for (const auto& p : kPolicyNames) names.emplace_back(p.name);
  return names;
}

double stop_probability(int step, const StopSchedule& schedule) {
  if (step < schedule.start_step) return 0.0;
  return std::min(schedule.cap, schedule.slope * step);
}

void StopPolicy::validate() const {
  if (uses_discriminator() && kind == PolicyKind::kFixedTau &&
      !(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("fixed tau must lie in [0, 1]");
  }
  if (kind == PolicyKind::kBudget && budget < 0) {
    throw ConfigError("token budget must be >= 0");
  }
  if (kind == PolicyKind::kRefrainMab && !(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if ((kind == PolicyKind::kSpEarly || kind == PolicyKind::kSptwEarly) &&
      !(schedule.slope >= 0.0 && schedule.cap >= 0.0 && schedule.cap <= 1.0)) {
    throw ConfigError("stop schedule must yield probabilities in [0, 1]");
  }
}

bool StopPolicy::is_online() const {
  return kind == PolicyKind::kRefrainSwUcb || kind == PolicyKind::kRefrainMab ||
         kind == PolicyKind::kRst;
}

bool StopPolicy::uses_discriminator() const {
  return is_online() || kind == PolicyKind::kFixedTau;
}

int budget_preset(std::string_view name) {
  const auto& presets = budget_presets();
  if (auto it = presets.find(name); it != presets.end()) return it->second;
  throw ConfigError("unknown budget preset '" + std::string(name) + "'");
}

std::vector<std::string> budget_preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : budget_presets()) names.push_back(name);
  return names;
}

StopDiscriminator::StopDiscriminator(const TriggerVocabulary& vocab,
                                     const SimilarityBackend& similarity, double tau)
    : vocab_(vocab), scorer_(similarity.start_episode()), tau_(tau) {
  evaluate_stop(false, false, 0.0, tau_);  // validates tau
}

StopDecision StopDiscriminator::observe(std::string_view step_text) {
  const bool reflective = detect_reflection(step_text, vocab_).reflective;
  const double phi = scorer_->observe(step_text);
  StopDecision decision = evaluate_stop(cue_seen_, reflective, phi, tau_);
  cue_seen_ = update_answer_cue(cue_seen_, step_text, vocab_);
  return decision;
}

std::vector<StopDecision> discriminate_steps(std::span<const std::string> steps,
                                             const TriggerVocabulary& vocab,
                                             const SimilarityBackend& similarity,
                                             double tau) {
  StopDiscriminator disc(vocab, similarity, tau);
  std::vector<StopDecision> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(disc.observe(s));
  return out;
}

std::optional<int> first_stop_index(std::span<const StopDecision> decisions) {
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (decisions[i].stop) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

std::string_view to_string(StopCause cause) {
  switch (cause) {
    case StopCause::kNone:
      return "none";
    case StopCause::kRedundancy:
      return "redundancy";
    case StopCause::kSchedule:
      return "schedule";
    case StopCause::kBudget:
      return "budget";
  }
  return "none";
}

StopCause parse_stop_cause(std::string_view name) {
  for (auto c : {StopCause::kNone, StopCause::kRedundancy, StopCause::kSchedule,
                 StopCause::kBudget}) {
    if (name == to_string(c)) return c;
  }
  throw DatasetError("unknown stop cause '" + std::string(name) + "'");
}

EpisodeResult run_episode(const Question& question, const StopPolicy& policy,
                          std::optional<double> tau, const EpisodeComponents& components,
                          Rng& rng) {
  policy.validate();
  if (components.backend == nullptr) throw ConfigError("no generation backend");
  const bool discriminate = policy.uses_discriminator();
  if (discriminate && !tau) throw ConfigError("threshold policy needs a tau");
  if ((discriminate || policy.kind == PolicyKind::kSptwEarly) &&
      components.vocab == nullptr) {
    throw ConfigError("policy needs a trigger vocabulary");
  }
  if (discriminate && components.similarity == nullptr) {
    throw ConfigError("policy needs a similarity backend");
  }

  EpisodeResult res;
  res.question_id = question.id;
  res.policy = policy.kind;
  if (discriminate) res.tau_used = tau;

  std::unique_ptr<StepStream> stream;
  if (policy.kind == PolicyKind::kNoThinking) {
    stream = components.backend->open_no_thinking(question, components.prompt);
  } else {
    std::optional<int> budget;
    if (policy.kind == PolicyKind::kBudget) budget = policy.budget;
    stream = components.backend->open_episode(question, components.prompt, budget);
  }

  std::optional<StopDiscriminator> disc;
  if (discriminate) disc.emplace(*components.vocab, *components.similarity, *tau);

  int n = 0;
  while (auto step = stream->next_step()) {
    ++n;
    if (disc) {
      if (disc->observe(step->text).stop) {
        res.stop_cause = StopCause::kRedundancy;
        break;
      }
    } else if (policy.kind == PolicyKind::kSpEarly ||
               policy.kind == PolicyKind::kSptwEarly) {
      const double p = stop_probability(n, policy.schedule);
      const bool gate = policy.kind == PolicyKind::kSpEarly ||
                        detect_reflection(step->text, *components.vocab).reflective;
      if (gate && p > 0.0 && rng.uniform01() < p) {
        res.stop_cause = StopCause::kSchedule;
        break;
      }
    }
  }
  if (res.stop_cause == StopCause::kNone && stream->budget_truncated()) {
    res.stop_cause = StopCause::kBudget;
  }
  res.stopped_early = res.stop_cause != StopCause::kNone;
  res.steps_seen = n;
  if (res.stopped_early) res.stop_step = n;

  Closure closure = components.backend->close_with_answer(*stream);
  const AnswerSegment& seg = closure.segment;
  res.fidelity = closure.fidelity;
  res.answer = seg.boxed_answer;
  res.unscorable = seg.answer_tokens.empty();
  if (!res.unscorable) {
    std::vector<double> lps;
    lps.reserve(seg.answer_tokens.size());
    for (const auto& t : seg.answer_tokens) lps.push_back(t.logprob);
    res.score = answer_likelihood(lps);
    res.correct = res.answer && match_answer(*res.answer, question.gold,
                                             question.task_kind);
  }
  res.thinking_tokens = stream->thinking_tokens();
  res.total_tokens = components.backend->tokens_used(*stream, &closure);
  return res;
}

int BenchmarkReport::correct_count() const {
  return static_cast<int>(std::count_if(episodes.begin(), episodes.end(),
                                        [](const auto& e) { return e.correct; }));
}

std::vector<Question> shuffled(std::vector<Question> questions, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = questions.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(questions[i - 1], questions[j]);
  }
  return questions;
}

BenchmarkReport run_benchmark(std::vector<Question> dataset, const RunConfig& config,
                              const EpisodeComponents& components,
                              const BenchmarkHooks& hooks) {
  if (dataset.empty()) throw ConfigError("dataset is empty");
  if (components.backend == nullptr) throw ConfigError("no generation backend");
  config.policy.validate();
  config.reward.validate();
  if (config.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (config.shuffle_seed) dataset = shuffled(std::move(dataset), *config.shuffle_seed);

  const StopPolicy& policy = config.policy;
  BenchmarkReport report;
  report.config = config_snapshot(config, components);
  report.episodes.resize(dataset.size());

  if (policy.is_online()) {
    BanditState state = config.bandit_state
                            ? BanditState::from_json(*config.bandit_state)
                            : BanditState(config.taus, config.window, config.exploration);
    Rng run_rng(config.seed);
    LengthTracker tracker;
    std::vector<int> counts(state.arms().size(), 0);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      ArmChoice choice;
      switch (policy.kind) {
        case PolicyKind::kRefrainSwUcb:
          choice = select_arm_sw_ucb(state);
          break;
        case PolicyKind::kRefrainMab:
          choice = select_arm_epsilon_greedy(state, policy.epsilon, run_rng);
          break;
        default:
          choice = select_arm_random(state, run_rng);
          break;
      }
      ++counts[choice.arm];
      if (hooks.on_select) hooks.on_select(i, choice);

      Rng episode_rng(derive_seed(config.seed, i));
      EpisodeResult r = guarded_episode(dataset[i], policy, choice.tau, components,
                                        episode_rng);
      r.arm = choice.arm;
      if (!r.error) {
        const std::int64_t length = std::max(1, r.total_tokens);
        RewardRecord rec = compute_reward(r.score, length, tracker, config.reward);
        r.reward = rec.reward;
        r.cold_start = rec.cold_start;
        state.record(choice.arm, rec.reward);
        if (hooks.on_record) hooks.on_record(i, choice.arm, rec.reward);
        tracker = record_length(tracker, length);
      }
      report.episodes[i] = std::move(r);
    }
    for (std::size_t a = 0; a < counts.size(); ++a) {
      report.arm_counts.push_back({state.arms()[a].tau(), counts[a]});
    }
    report.bandit_state = state.to_json();
  } else {
    std::optional<double> tau;
    if (policy.kind == PolicyKind::kFixedTau) tau = policy.tau;
    auto run_one = [&](std::size_t i) {
      Rng episode_rng(derive_seed(config.seed, i));
      report.episodes[i] = guarded_episode(dataset[i], policy, tau, components,
                                           episode_rng);
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.jobs), dataset.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < dataset.size(); ++i) run_one(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < dataset.size(); i = next++) run_one(i);
        });
      }
      for (auto& t : pool) t.join();
    }
    // Rewards need the prior-history mean, so they follow dataset order.
    LengthTracker tracker;
    for (auto& r : report.episodes) {
      if (r.error) continue;
      const std::int64_t length = std::max(1, r.total_tokens);
      RewardRecord rec = compute_reward(r.score, length, tracker, config.reward);
      r.reward = rec.reward;
      r.cold_start = rec.cold_start;
      tracker = record_length(tracker, length);
    }
    if (tau) {
      report.arm_counts.push_back({*tau, static_cast<int>(report.episodes.size())});
    }
  }

  for (const auto& e : report.episodes) report.total_tokens += e.total_tokens;
  report.pass_at_1 = static_cast<double>(report.correct_count()) /
                     static_cast<double>(report.episodes.size());
  return report;
}

}  // namespace refrain
