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
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "refrain/prompts.h"
#include "refrain/trace.h"

namespace refrain {

// Whether a closure was produced for the exact stop point or reused from a
// different one.
enum class Fidelity { kExact, kApproximate };

std::string_view to_string(Fidelity fidelity);
Fidelity parse_fidelity(std::string_view name);

struct Closure {
  AnswerSegment segment;
  Fidelity fidelity = Fidelity::kExact;
};

// Step-by-step view over one episode's thinking. Single owner.
class StepStream {
 public:
  virtual ~StepStream() = default;

  // Next whole step in generation order, or nullopt once exhausted.
  virtual std::optional<ReasoningStep> next_step() = 0;
  virtual bool exhausted() const = 0;
  // Tokens of all steps yielded so far.
  virtual int thinking_tokens() const = 0;
  virtual int steps_yielded() const = 0;
  // True when a token budget prevented the next step from being yielded.
  virtual bool budget_truncated() const { return false; }
  // Forced closure after the steps yielded so far. Valid at any point,
  // including before the first step.
  virtual Closure close() = 0;
};

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string name() const = 0;

  // `budget` caps cumulative thinking tokens; a step is yielded only when it
  // fits entirely.
  virtual std::unique_ptr<StepStream> open_episode(
      const Question& question, const PromptTemplate& prompt,
      std::optional<int> budget = std::nullopt) = 0;

  // One pseudo-step holding the fixed no-thinking phrase, then exhausted.
  virtual std::unique_ptr<StepStream> open_no_thinking(
      const Question& question, const PromptTemplate& prompt) = 0;

  Closure close_with_answer(StepStream& stream) { return stream.close(); }
  int tokens_used(const StepStream& stream, const Closure* closure = nullptr) const {
    return stream.thinking_tokens() +
           (closure != nullptr ? closure->segment.total_tokens : 0);
  }
};

// Stream yielding one pseudo-step with the no-thinking phrase; `tokens` are the
// backend's tokenization of the phrase and `closer` produces the closure.
std::unique_ptr<StepStream> no_thinking_stream(
    std::vector<TokenLogprob> tokens, std::function<Closure()> closer);

// ---------------------------------------------------------------------------
// Replay backend

struct NoThinkingRecord {
  std::vector<TokenLogprob> tokens;
  AnswerSegment closure;
};

// Recorded generation for one question.
struct ReplayTrace {
  Question question;
  std::vector<ReasoningStep> steps;
  // Closure recorded as if thinking stopped right after step k (1-based).
  std::map<int, AnswerSegment> closures;
  AnswerSegment final_closure;
  std::optional<NoThinkingRecord> no_thinking;
};

// Builds an AnswerSegment from recorded closure text and tokens. The boxed
// answer is extracted from the text; tokens are validated.
AnswerSegment make_closure(std::string text, std::vector<TokenLogprob> answer_tokens,
                           std::optional<int> total_tokens = std::nullopt,
                           int prefix_context_len = 0);

nlohmann::json closure_to_json(const AnswerSegment& segment);
AnswerSegment closure_from_json(const nlohmann::json& object);
nlohmann::json replay_trace_to_json(const ReplayTrace& trace);
ReplayTrace replay_trace_from_json(const nlohmann::json& object);

// JSON-lines trace store keyed by question id; preserves file order.
class TraceStore {
 public:
  void add(ReplayTrace trace);
  const ReplayTrace* find(std::string_view id) const;
  // Throws DatasetError naming the id when absent.
  const ReplayTrace& at(std::string_view id) const;
  std::size_t size() const { return traces_.size(); }
  const std::vector<ReplayTrace>& traces() const { return traces_; }
  std::vector<Question> questions() const;

  static TraceStore read(std::istream& in);
  static TraceStore load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

 private:
  std::vector<ReplayTrace> traces_;
  std::unordered_map<std::string, std::size_t> index_;
};

class ReplayStream;

std::unique_ptr<ReplayStream> replay_open(std::shared_ptr<const TraceStore> store,
                                          std::string_view question_id,
                                          std::optional<int> budget = std::nullopt);

// Recorded closure for `stop_step` when present, otherwise the final closure
// flagged approximate (exact when stop_step covers every recorded step).
Closure replay_close(const ReplayStream& stream, int stop_step);

class ReplayStream final : public StepStream {
 public:
  ReplayStream(std::shared_ptr<const TraceStore> store, const ReplayTrace& trace,
               std::optional<int> budget);

  std::optional<ReasoningStep> next_step() override;
  bool exhausted() const override { return exhausted_; }
  int thinking_tokens() const override { return thinking_tokens_; }
  int steps_yielded() const override { return yielded_; }
  bool budget_truncated() const override { return budget_truncated_; }
  Closure close() override { return replay_close(*this, yielded_); }

  const ReplayTrace& trace() const { return *trace_; }

 private:
  std::shared_ptr<const TraceStore> store_;
  const ReplayTrace* trace_;
  std::optional<int> budget_;
  int yielded_ = 0;
  int thinking_tokens_ = 0;
  bool exhausted_ = false;
  bool budget_truncated_ = false;
};

class ReplayBackend final : public GenerationBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<const TraceStore> store);

  std::string name() const override { return "replay"; }
  std::unique_ptr<StepStream> open_episode(const Question& question,
                                           const PromptTemplate& prompt,
                                           std::optional<int> budget) override;
  // Uses the trace's recorded no-thinking run when present; otherwise the
  // phrase is counted in whitespace tokens and the final closure is reused
  // with approximate fidelity.
  std::unique_ptr<StepStream> open_no_thinking(const Question& question,
                                               const PromptTemplate& prompt) override;

  const TraceStore& store() const { return *store_; }

 private:
  std::shared_ptr<const TraceStore> store_;
};

}  // namespace refrain
