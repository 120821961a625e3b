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

#include <fstream>
#include <string>

#include "refrain/backend.h"
#include "refrain/dataset.h"
#include "refrain/errors.h"
#include "refrain/redundancy.h"

namespace refrain {
namespace {

std::vector<TokenLogprob> tokens_from_json(const nlohmann::json& list,
                                           std::string_view where) {
  if (!list.is_array()) {
    throw DatasetError(std::string(where) + ": tokens must be an array");
  }
  std::vector<TokenLogprob> tokens;
  tokens.reserve(list.size());
  for (const auto& item : list) {
    TokenLogprob tok{item.at("t").get<std::string>(), item.at("lp").get<double>()};
    if (!(tok.logprob <= 0.0)) {
      throw DatasetError(std::string(where) + ": logprob " +
                         std::to_string(tok.logprob) + " is positive");
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

nlohmann::json tokens_to_json(const std::vector<TokenLogprob>& tokens) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& tok : tokens) list.push_back({{"t", tok.text}, {"lp", tok.logprob}});
  return list;
}

class NoThinkingStream final : public StepStream {
 public:
  NoThinkingStream(std::vector<TokenLogprob> tokens, std::function<Closure()> closer)
      : tokens_(std::move(tokens)), closer_(std::move(closer)) {}

  std::optional<ReasoningStep> next_step() override {
    if (exhausted_) return std::nullopt;
    exhausted_ = true;
    ReasoningStep step;
    step.index = 1;
    step.text = std::string(kNoThinkingPhrase);
    step.tokens = tokens_;
    return step;
  }
  bool exhausted() const override { return exhausted_; }
  int thinking_tokens() const override {
    return exhausted_ ? static_cast<int>(tokens_.size()) : 0;
  }
  int steps_yielded() const override { return exhausted_ ? 1 : 0; }
  Closure close() override { return closer_(); }

 private:
  std::vector<TokenLogprob> tokens_;
  std::function<Closure()> closer_;
  bool exhausted_ = false;
};

}  // namespace

std::string_view to_string(Fidelity fidelity) {
  return fidelity == Fidelity::kExact ? "exact" : "approximate";
}

Fidelity parse_fidelity(std::string_view name) {
  if (name == "exact") return Fidelity::kExact;
  if (name == "approximate") return Fidelity::kApproximate;
  throw DatasetError("unknown fidelity '" + std::string(name) + "'");
}

std::unique_ptr<StepStream> no_thinking_stream(std::vector<TokenLogprob> tokens,
                                               std::function<Closure()> closer) {
  return std::make_unique<NoThinkingStream>(std::move(tokens), std::move(closer));
}

AnswerSegment make_closure(std::string text, std::vector<TokenLogprob> answer_tokens,
                           std::optional<int> total_tokens, int prefix_context_len) {
  AnswerSegment seg;
  auto region = find_last_boxed(text);
  seg.malformed = region.malformed;
  if (region.content && !trim(*region.content).empty()) {
    seg.boxed_answer = region.content;
  }
  seg.full_text = std::move(text);
  for (const auto& tok : answer_tokens) {
    if (!(tok.logprob <= 0.0)) throw DatasetError("closure logprob is positive");
  }
  if (seg.boxed_answer.has_value() != !answer_tokens.empty()) {
    throw DatasetError(
        "closure must carry answer tokens exactly when it has a boxed answer");
  }
  seg.answer_tokens = std::move(answer_tokens);
  seg.total_tokens = total_tokens.value_or(static_cast<int>(seg.answer_tokens.size()));
  if (seg.total_tokens < static_cast<int>(seg.answer_tokens.size())) {
    throw DatasetError("closure total_tokens is smaller than its answer tokens");
  }
  seg.prefix_context_len = prefix_context_len;
  return seg;
}

nlohmann::json closure_to_json(const AnswerSegment& segment) {
  nlohmann::json out = {{"text", segment.full_text},
                        {"answer_tokens", tokens_to_json(segment.answer_tokens)},
                        {"total_tokens", segment.total_tokens}};
  if (segment.prefix_context_len != 0) {
    out["prefix_context_len"] = segment.prefix_context_len;
  }
  return out;
}

AnswerSegment closure_from_json(const nlohmann::json& object) {
  std::optional<int> total;
  if (auto it = object.find("total_tokens"); it != object.end()) total = it->get<int>();
  return make_closure(object.at("text").get<std::string>(),
                      tokens_from_json(object.value("answer_tokens", nlohmann::json::array()),
                                       "closure"),
                      total, object.value("prefix_context_len", 0));
}

nlohmann::json replay_trace_to_json(const ReplayTrace& trace) {
  nlohmann::json out = question_to_json(trace.question);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : trace.steps) {
    steps.push_back({{"text", step.text}, {"tokens", tokens_to_json(step.tokens)}});
  }
  out["steps"] = steps;
  nlohmann::json closures = nlohmann::json::object();
  for (const auto& [k, seg] : trace.closures) closures[std::to_string(k)] = closure_to_json(seg);
  out["closures"] = closures;
  out["final_closure"] = closure_to_json(trace.final_closure);
  if (trace.no_thinking) {
    out["no_thinking"] = {{"tokens", tokens_to_json(trace.no_thinking->tokens)},
                          {"closure", closure_to_json(trace.no_thinking->closure)}};
  }
  return out;
}

ReplayTrace replay_trace_from_json(const nlohmann::json& object) {
  ReplayTrace trace;
  trace.question = question_from_json(object);
  const std::string& id = trace.question.id;
  try {
    int index = 0;
    for (const auto& s : object.at("steps")) {
      ReasoningStep step;
      step.index = ++index;
      step.text = s.at("text").get<std::string>();
      if (trim(step.text).empty() || contains_blank_line(step.text)) {
        throw DatasetError("trace '" + id + "': step " + std::to_string(index) +
                           " is empty or contains a blank line");
      }
      step.tokens = tokens_from_json(s.at("tokens"), "trace '" + id + "' step");
      trace.steps.push_back(std::move(step));
    }
    if (auto it = object.find("closures"); it != object.end()) {
      for (const auto& [key, value] : it->items()) {
        int k = std::stoi(key);
        if (k < 0 || k > static_cast<int>(trace.steps.size())) {
          throw DatasetError("trace '" + id + "': closure index " + key +
                             " out of range");
        }
        trace.closures[k] = closure_from_json(value);
      }
    }
    if (!object.contains("final_closure")) {
      throw DatasetError("trace '" + id + "': missing final_closure");
    }
    trace.final_closure = closure_from_json(object.at("final_closure"));
    if (auto it = object.find("no_thinking"); it != object.end()) {
      trace.no_thinking = NoThinkingRecord{
          tokens_from_json(it->at("tokens"), "no_thinking"),
          closure_from_json(it->at("closure"))};
    }
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("trace '" + id + "': " + e.what());
  } catch (const std::invalid_argument&) {
    throw DatasetError("trace '" + id + "': closure keys must be integers");
  }
  return trace;
}

void TraceStore::add(ReplayTrace trace) {
  const std::string id = trace.question.id;
  if (index_.count(id) != 0) throw DatasetError("duplicate trace id '" + id + "'");
  index_.emplace(id, traces_.size());
  traces_.push_back(std::move(trace));
}

const ReplayTrace* TraceStore::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &traces_[it->second];
}

const ReplayTrace& TraceStore::at(std::string_view id) const {
  if (const auto* trace = find(id)) return *trace;
  throw DatasetError("no recorded trace for question '" + std::string(id) + "'");
}

std::vector<Question> TraceStore::questions() const {
  std::vector<Question> out;
  out.reserve(traces_.size());
  for (const auto& t : traces_) out.push_back(t.question);
  return out;
}

TraceStore TraceStore::read(std::istream& in) {
  TraceStore store;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      store.add(replay_trace_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("trace store line " + std::to_string(line_no) + ": " +
                         e.what());
    }
  }
  return store;
}

TraceStore TraceStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace store " + path.string());
  return read(in);
}

void TraceStore::write(std::ostream& out) const {
  for (const auto& t : traces_) out << replay_trace_to_json(t).dump() << '\n';
}

ReplayStream::ReplayStream(std::shared_ptr<const TraceStore> store,
                           const ReplayTrace& trace, std::optional<int> budget)
    : store_(std::move(store)), trace_(&trace), budget_(budget) {
  if (budget_ && *budget_ < 0) throw ConfigError("token budget must be >= 0");
  exhausted_ = trace_->steps.empty();
}

std::optional<ReasoningStep> ReplayStream::next_step() {
  if (exhausted_) return std::nullopt;
  const ReasoningStep& step = trace_->steps[static_cast<std::size_t>(yielded_)];
  if (budget_ && thinking_tokens_ + step.token_count() > *budget_) {
    budget_truncated_ = true;
    exhausted_ = true;
    return std::nullopt;
  }
  ++yielded_;
  thinking_tokens_ += step.token_count();
  if (yielded_ == static_cast<int>(trace_->steps.size())) exhausted_ = true;
  return step;
}

std::unique_ptr<ReplayStream> replay_open(std::shared_ptr<const TraceStore> store,
                                          std::string_view question_id,
                                          std::optional<int> budget) {
  if (!store) throw ConfigError("replay_open: no trace store");
  const ReplayTrace& trace = store->at(question_id);
  return std::make_unique<ReplayStream>(std::move(store), trace, budget);
}

Closure replay_close(const ReplayStream& stream, int stop_step) {
  const ReplayTrace& trace = stream.trace();
  if (stop_step < 0 || stop_step > stream.steps_yielded()) {
    throw ConfigError("replay_close: stop step " + std::to_string(stop_step) +
                      " beyond the steps yielded");
  }
  if (auto it = trace.closures.find(stop_step); it != trace.closures.end()) {
    return {it->second, Fidelity::kExact};
  }
  const bool complete = stop_step == static_cast<int>(trace.steps.size());
  return {trace.final_closure, complete ? Fidelity::kExact : Fidelity::kApproximate};
}

ReplayBackend::ReplayBackend(std::shared_ptr<const TraceStore> store)
    : store_(std::move(store)) {
  if (!store_) throw ConfigError("replay backend needs a trace store");
}

std::unique_ptr<StepStream> ReplayBackend::open_episode(const Question& question,
                                                        const PromptTemplate&,
                                                        std::optional<int> budget) {
  return replay_open(store_, question.id, budget);
}

std::unique_ptr<StepStream> ReplayBackend::open_no_thinking(const Question& question,
                                                            const PromptTemplate&) {
  const ReplayTrace& trace = store_->at(question.id);
  if (trace.no_thinking) {
    Closure closure{trace.no_thinking->closure, Fidelity::kExact};
    return no_thinking_stream(trace.no_thinking->tokens,
                              [closure] { return closure; });
  }
  std::vector<TokenLogprob> tokens;
  for (auto word : whitespace_tokens(kNoThinkingPhrase)) {
    tokens.push_back({std::string(word), 0.0});
  }
  Closure closure{trace.final_closure, Fidelity::kApproximate};
  return no_thinking_stream(std::move(tokens), [closure] { return closure; });
}

}  // namespace refrain
