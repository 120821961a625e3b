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

#include "refrain/http_backend.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <exception>
#include <thread>

#include "httplib.h"
#include "refrain/errors.h"

namespace refrain {
namespace {

using nlohmann::json;

httplib::Headers auth_headers(const std::string& api_key_env) {
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  return headers;
}

std::unique_ptr<httplib::Client> make_client(const std::string& base_url,
                                             int timeout_ms) {
  auto client = std::make_unique<httplib::Client>(base_url);
  if (!client->is_valid()) throw ConfigError("invalid base URL '" + base_url + "'");
  const auto timeout = std::chrono::milliseconds(timeout_ms);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  return client;
}

bool is_transient(int status) { return status == 429 || status >= 500; }

void backoff(int backoff_ms, int attempt) {
  std::this_thread::sleep_for(std::chrono::milliseconds(
      static_cast<long long>(backoff_ms) << std::min(attempt, 16)));
}

// POST with JSON body and retries on connection failures and 429/5xx.
json post_json(const std::string& base_url, const std::string& path,
               const json& body, int timeout_ms, int retries, int backoff_ms,
               const std::string& api_key_env) {
  auto client = make_client(base_url, timeout_ms);
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0) backoff(backoff_ms, attempt - 1);
    auto res = client->Post(path, auth_headers(api_key_env), payload,
                            "application/json");
    if (!res) {
      last_error = "request to " + base_url + path + " failed: " +
                   httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw ProtocolError("invalid JSON from " + path + ": " + e.what());
      }
    }
    last_error = "HTTP " + std::to_string(res->status) + " from " + path;
    if (!is_transient(res->status)) throw BackendError(last_error);
  }
  throw BackendError(last_error + " (after " + std::to_string(retries) + " retries)");
}

std::vector<TokenLogprob> parse_logprob_content(const json& content) {
  std::vector<TokenLogprob> tokens;
  for (const auto& item : content) {
    TokenLogprob tok{item.value("token", std::string()), item.at("logprob").get<double>()};
    tok.logprob = std::min(tok.logprob, 0.0);
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

json sampling_fields(const BackendConfig& cfg) {
  return {{"model", cfg.model_name},
          {"temperature", cfg.temperature},
          {"top_p", cfg.top_p},
          {"top_k", cfg.top_k}};
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  });
}

class HttpStepStream final : public StepStream {
 public:
  HttpStepStream(BackendConfig config, std::string prompt, std::optional<int> budget)
      : config_(std::move(config)), prompt_(std::move(prompt)), budget_(budget) {
    if (budget_ && *budget_ < 0) throw ConfigError("token budget must be >= 0");
  }

  ~HttpStepStream() override { stop_worker(); }

  void start() {
    worker_ = std::thread([this] { run(); });
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return first_event_ || done_; });
    if (error_ && ready_.empty()) {
      auto err = error_;
      lock.unlock();
      stop_worker();
      std::rethrow_exception(err);
    }
  }

  std::optional<ReasoningStep> next_step() override {
    if (exhausted_) return std::nullopt;
    ReasoningStep step;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return !ready_.empty() || done_; });
      if (ready_.empty()) {
        exhausted_ = true;
        if (error_) std::rethrow_exception(error_);
        return std::nullopt;
      }
      step = std::move(ready_.front());
      ready_.pop_front();
    }
    if (budget_ && thinking_tokens_ + step.token_count() > *budget_) {
      budget_truncated_ = true;
      exhausted_ = true;
      stop_worker();
      return std::nullopt;
    }
    step.index = ++yielded_;
    thinking_tokens_ += step.token_count();
    texts_.push_back(step.text);
    return step;
  }

  bool exhausted() const override { return exhausted_; }
  int thinking_tokens() const override { return thinking_tokens_; }
  int steps_yielded() const override { return yielded_; }
  bool budget_truncated() const override { return budget_truncated_; }

  Closure close() override {
    stop_worker();
    exhausted_ = true;
    return http_close(config_, prompt_, join_steps(texts_));
  }

 private:
  void stop_worker() {
    cancel_.store(true);
    if (worker_.joinable()) worker_.join();
  }

  void fail(std::exception_ptr err) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = err;
    done_ = true;
    cv_.notify_all();
  }

  void publish(std::vector<ReasoningStep> steps, bool first_chunk) {
    std::lock_guard lock(mu_);
    for (auto& s : steps) ready_.push_back(std::move(s));
    if (first_chunk) first_event_ = true;
    cv_.notify_all();
  }

  // Returns false to abort the transfer.
  bool handle_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.rfind("data:", 0) != 0) return true;
    StreamDelta delta;
    bool more;
    try {
      more = parse_stream_payload(line.substr(5), delta);
    } catch (const std::exception& e) {
      fail(std::make_exception_ptr(ProtocolError(e.what())));
      return false;
    }
    if (!more) {
      stream_done_ = true;
      return true;
    }
    if (delta.text.empty() && (!delta.tokens || delta.tokens->empty())) return true;
    const bool first = !saw_content_;
    saw_content_ = true;
    if (!delta.tokens) {
      if (first) {
        fail(std::make_exception_ptr(CapabilityError(
            "endpoint " + config_.base_url +
            " does not return per-token logprobs")));
      } else {
        fail(std::make_exception_ptr(
            ProtocolError("stream chunk without logprobs")));
      }
      return false;
    }
    assembler_.append(delta.text, std::move(*delta.tokens));
    publish(assembler_.take_completed(), first);
    return true;
  }

  bool feed(const char* data, std::size_t len) {
    line_buffer_.append(data, len);
    std::size_t pos;
    while ((pos = line_buffer_.find('\n')) != std::string::npos) {
      std::string line = line_buffer_.substr(0, pos);
      line_buffer_.erase(0, pos + 1);
      if (!handle_line(line)) return false;
    }
    return !cancel_.load();
  }

  void run() {
    json body = sampling_fields(config_);
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt_}}});
    body["stream"] = true;
    body["logprobs"] = true;
    body["max_tokens"] = budget_ ? std::min(config_.max_tokens, std::max(*budget_, 1))
                                 : config_.max_tokens;
    const std::string payload = body.dump();

    std::string last_error;
    try {
      auto client = make_client(config_.base_url, config_.timeout_ms);
      for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (cancel_.load()) break;
        if (attempt > 0) backoff(config_.backoff_ms, attempt - 1);
        int status = 0;
        bool received = false;
        line_buffer_.clear();

        httplib::Request req;
        req.method = "POST";
        req.path = config_.chat_path;
        req.headers = auth_headers(config_.api_key_env);
        req.headers.emplace("Accept", "text/event-stream");
        req.set_header("Content-Type", "application/json");
        req.body = payload;
        req.response_handler = [&](const httplib::Response& res) {
          status = res.status;
          return res.status == 200;
        };
        req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t,
                                   std::uint64_t) {
          received = true;
          return feed(data, len);
        };
        auto res = client->send(req);

        {
          std::lock_guard lock(mu_);
          if (error_) return;
        }
        if (status == 200) {
          if (res || cancel_.load() || stream_done_) {
            if (!line_buffer_.empty() && !cancel_.load()) handle_line(line_buffer_);
            break;
          }
          if (received) {
            throw BackendError("stream from " + config_.base_url + " broke: " +
                               httplib::to_string(res.error()));
          }
        }
        last_error = status != 0 && status != 200 ? "HTTP " + std::to_string(status)
                                                  : httplib::to_string(res.error());
        if (status != 0 && status != 200 && !is_transient(status)) {
          throw BackendError(last_error);
        }
        if (attempt == config_.retries) {
          throw BackendError(last_error + " (after " +
                             std::to_string(config_.retries) + " retries)");
        }
      }
    } catch (...) {
      fail(std::current_exception());
      return;
    }

    std::vector<ReasoningStep> tail;
    if (auto last = assembler_.finish()) tail.push_back(std::move(*last));
    std::lock_guard lock(mu_);
    for (auto& s : tail) ready_.push_back(std::move(s));
    done_ = true;
    cv_.notify_all();
  }

  BackendConfig config_;
  std::string prompt_;
  std::optional<int> budget_;

  // Consumer-side state.
  std::vector<std::string> texts_;
  int yielded_ = 0;
  int thinking_tokens_ = 0;
  bool exhausted_ = false;
  bool budget_truncated_ = false;

  // Worker-side state.
  std::thread worker_;
  std::atomic<bool> cancel_{false};
  StepAssembler assembler_;
  std::string line_buffer_;
  bool saw_content_ = false;
  bool stream_done_ = false;

  // Shared state.
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ReasoningStep> ready_;
  bool first_event_ = false;
  bool done_ = false;
  std::exception_ptr error_;
};

}  // namespace

void BackendConfig::validate() const {
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (closure_max_tokens < 1) throw ConfigError("closure_max_tokens must be >= 1");
  if (retries < 0) throw ConfigError("retries must be >= 0");
  if (timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
  if (backoff_ms < 0) throw ConfigError("backoff_ms must be >= 0");
  if (base_url.empty()) throw ConfigError("base_url is empty");
}

BackendConfig sampling_preset(std::string_view name) {
  BackendConfig cfg;
  if (name == "qwen3") {
    cfg.model_name = "Qwen/Qwen3-8B";
    cfg.temperature = 0.6;
    cfg.top_p = 0.95;
    cfg.top_k = 20;
  } else if (name == "gpt-oss") {
    cfg.model_name = "openai/gpt-oss-20b";
    cfg.temperature = 1.0;
    cfg.top_p = 1.0;
    cfg.top_k = 50;
  } else {
    throw ConfigError("unknown sampling preset '" + std::string(name) + "'");
  }
  return cfg;
}

std::vector<std::string> sampling_preset_names() { return {"qwen3", "gpt-oss"}; }

void StepAssembler::append(std::string_view text, std::vector<TokenLogprob> tokens) {
  const std::size_t base = buffer_.size();
  buffer_.append(text);
  const std::size_t limit = buffer_.size();
  std::size_t offset = base;
  for (auto& tok : tokens) {
    // Keep the token anchored inside this chunk even if its text disagrees.
    const std::size_t anchored = std::min(offset, limit == base ? base : limit - 1);
    offset += tok.text.size();
    pending_.push_back({anchored, std::move(tok)});
  }
  split_completed();
}

void StepAssembler::split_completed() {
  for (;;) {
    // First blank line: "\n" + whitespace-only line + "\n".
    std::size_t delim_begin = std::string::npos, delim_end = 0;
    for (std::size_t p = buffer_.find('\n'); p != std::string::npos;) {
      std::size_t q = buffer_.find('\n', p + 1);
      if (q == std::string::npos) break;
      if (is_blank(std::string_view(buffer_).substr(p + 1, q - p - 1))) {
        delim_begin = p;
        delim_end = q + 1;
        break;
      }
      p = q;
    }
    if (delim_begin == std::string::npos) return;

    std::vector<TokenLogprob> tokens = std::move(carry_);
    carry_.clear();
    std::size_t consumed = 0;
    while (consumed < pending_.size() && pending_[consumed].offset < delim_end) {
      tokens.push_back(std::move(pending_[consumed].token));
      ++consumed;
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(consumed));

    auto fragment = trim(std::string_view(buffer_).substr(0, delim_begin));
    if (fragment.empty()) {
      carry_ = std::move(tokens);
    } else {
      ReasoningStep step;
      step.text = std::string(fragment);
      step.tokens = std::move(tokens);
      completed_.push_back(std::move(step));
    }
    // Keep the closing newline so a following blank line still delimits.
    buffer_.erase(0, delim_end - 1);
    for (auto& p : pending_) p.offset -= delim_end - 1;
  }
}

std::vector<ReasoningStep> StepAssembler::take_completed() {
  std::vector<ReasoningStep> out;
  out.swap(completed_);
  return out;
}

std::optional<ReasoningStep> StepAssembler::finish() {
  auto fragment = trim(buffer_);
  std::vector<TokenLogprob> tokens = std::move(carry_);
  carry_.clear();
  for (auto& p : pending_) tokens.push_back(std::move(p.token));
  pending_.clear();
  buffer_.clear();
  if (fragment.empty()) return std::nullopt;
  ReasoningStep step;
  step.text = std::string(fragment);
  step.tokens = std::move(tokens);
  return step;
}

bool parse_stream_payload(std::string_view payload, StreamDelta& delta) {
  payload = trim(payload);
  if (payload == "[DONE]") return false;
  const json chunk = json::parse(payload);
  if (chunk.contains("error")) {
    throw BackendError("stream error: " + chunk["error"].dump());
  }
  delta = StreamDelta{};
  const auto& choices = chunk.at("choices");
  if (choices.empty()) return true;
  const auto& choice = choices.at(0);
  if (auto d = choice.find("delta"); d != choice.end() && d->is_object()) {
    for (const char* key : {"reasoning_content", "content"}) {
      if (auto it = d->find(key); it != d->end() && it->is_string()) {
        delta.text += it->get<std::string>();
      }
    }
  }
  if (auto lp = choice.find("logprobs"); lp != choice.end() && lp->is_object()) {
    if (auto content = lp->find("content");
        content != lp->end() && content->is_array()) {
      delta.tokens = parse_logprob_content(*content);
    }
  }
  return true;
}

AnswerSegment closure_from_continuation(std::string_view continuation,
                                        const std::vector<TokenLogprob>& tokens,
                                        int total_tokens, int prefix_context_len) {
  AnswerSegment seg;
  seg.full_text = std::string(kForcedClosurePrefix) + std::string(continuation);
  auto region = find_last_boxed(seg.full_text);
  seg.malformed = region.malformed;
  if (region.content && !trim(*region.content).empty()) {
    for (auto i : tokens_in_span(tokens, kForcedClosurePrefix.size(), region.begin,
                                 region.end)) {
      seg.answer_tokens.push_back(tokens[i]);
    }
    if (seg.answer_tokens.empty()) {
      throw ProtocolError("boxed answer has no covering tokens");
    }
    seg.boxed_answer = region.content;
  }
  seg.total_tokens = std::max(total_tokens, static_cast<int>(tokens.size()));
  seg.prefix_context_len = prefix_context_len;
  return seg;
}

Closure http_close(const BackendConfig& config, const std::string& rendered_prompt,
                   const std::string& thinking_text) {
  std::string assistant = thinking_text;
  if (!assistant.empty()) assistant += "\n\n";
  assistant += kForcedClosurePrefix;

  json body = sampling_fields(config);
  body["messages"] = json::array({{{"role", "user"}, {"content", rendered_prompt}},
                                  {{"role", "assistant"}, {"content", assistant}}});
  body["stream"] = false;
  body["logprobs"] = true;
  body["max_tokens"] = config.closure_max_tokens;
  body["continue_final_message"] = true;
  body["add_generation_prompt"] = false;

  json res = post_json(config.base_url, config.chat_path, body, config.timeout_ms,
                       config.retries, config.backoff_ms, config.api_key_env);
  try {
    const auto& choice = res.at("choices").at(0);
    std::string content;
    if (const auto& m = choice.at("message"); m.contains("content") &&
                                              m["content"].is_string()) {
      content = m["content"].get<std::string>();
    }
    const auto lp = choice.find("logprobs");
    if (lp == choice.end() || !lp->is_object() || !lp->contains("content") ||
        !(*lp)["content"].is_array()) {
      throw CapabilityError("closure response carries no logprobs");
    }
    auto tokens = parse_logprob_content((*lp)["content"]);
    int completion = static_cast<int>(tokens.size());
    int prompt_tokens = 0;
    if (auto usage = res.find("usage"); usage != res.end() && usage->is_object()) {
      completion = usage->value("completion_tokens", completion);
      prompt_tokens = usage->value("prompt_tokens", 0);
    }
    return {closure_from_continuation(content, tokens, completion, prompt_tokens),
            Fidelity::kExact};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed closure response: ") + e.what());
  }
}

std::unique_ptr<StepStream> http_open(const BackendConfig& config,
                                      const Question& question,
                                      const PromptTemplate& prompt,
                                      std::optional<int> budget) {
  config.validate();
  auto stream = std::make_unique<HttpStepStream>(config, prompt.render(question.text),
                                                 budget);
  try {
    stream->start();
  } catch (const Error& e) {
    if (dynamic_cast<const CapabilityError*>(&e)) throw;
    throw BackendError("question '" + question.id + "': " + e.what());
  }
  return stream;
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::unique_ptr<StepStream> HttpBackend::open_episode(const Question& question,
                                                      const PromptTemplate& prompt,
                                                      std::optional<int> budget) {
  return http_open(config_, question, prompt, budget);
}

std::vector<TokenLogprob> HttpBackend::tokenize(std::string_view text) const {
  json body = {{"model", config_.model_name},
               {"prompt", std::string(text)},
               {"add_special_tokens", false},
               {"return_token_strs", true}};
  json res;
  try {
    res = post_json(config_.base_url, config_.tokenize_path, body, config_.timeout_ms,
                    config_.retries, config_.backoff_ms, config_.api_key_env);
  } catch (const BackendError& e) {
    throw CapabilityError(std::string("tokenize endpoint unavailable: ") + e.what());
  }
  std::vector<TokenLogprob> tokens;
  if (auto strs = res.find("token_strs"); strs != res.end() && strs->is_array()) {
    for (const auto& s : *strs) tokens.push_back({s.get<std::string>(), 0.0});
  } else if (auto ids = res.find("tokens"); ids != res.end() && ids->is_array()) {
    for (const auto& id : *ids) tokens.push_back({id.dump(), 0.0});
  } else {
    throw ProtocolError("tokenize response has neither token_strs nor tokens");
  }
  return tokens;
}

std::unique_ptr<StepStream> HttpBackend::open_no_thinking(const Question& question,
                                                          const PromptTemplate& prompt) {
  auto tokens = tokenize(kNoThinkingPhrase);
  auto cfg = config_;
  auto rendered = prompt.render(question.text);
  return no_thinking_stream(std::move(tokens), [cfg, rendered] {
    return http_close(cfg, rendered, std::string(kNoThinkingPhrase));
  });
}

EmbeddingClient::EmbeddingClient(EmbeddingConfig config) : config_(std::move(config)) {
  if (config_.dimension == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<std::vector<double>> EmbeddingClient::embed(
    const std::vector<std::string>& texts) {
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mu_);
    for (const auto& t : texts) {
      if (cache_.count(t) == 0 &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
  }
  if (!missing.empty()) {
    json body = {{"model", config_.model_name}, {"input", missing}};
    json res = post_json(config_.base_url, config_.path, body, config_.timeout_ms,
                         config_.retries, config_.backoff_ms, config_.api_key_env);
    std::vector<std::vector<double>> vectors(missing.size());
    try {
      const auto& data = res.at("data");
      if (data.size() != missing.size()) {
        throw ProtocolError("embedding service returned " +
                            std::to_string(data.size()) + " vectors for " +
                            std::to_string(missing.size()) + " inputs");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t idx = data[i].value("index", i);
        if (idx >= missing.size()) throw ProtocolError("embedding index out of range");
        vectors[idx] = data[i].at("embedding").get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("malformed embedding response: ") + e.what());
    }
    std::lock_guard lock(mu_);
    ++requests_;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const std::size_t dim = vectors[i].size();
      if (dim == 0 || (dimension_ && dim != *dimension_) ||
          (i > 0 && dim != vectors[0].size())) {
        throw ProtocolError("embedding dimension mismatch within batch");
      }
    }
    if (!vectors.empty()) dimension_ = vectors[0].size();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      cache_.emplace(missing[i], std::move(vectors[i]));
    }
  }
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  std::lock_guard lock(mu_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

std::size_t EmbeddingClient::requests_sent() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::vector<double>> remote_embed(const std::vector<std::string>& texts,
                                              const EmbeddingConfig& config) {
  if (texts.empty()) return {};
  EmbeddingClient client(config);
  return client.embed(texts);
}

RemoteEmbedder::RemoteEmbedder(EmbeddingConfig config)
    : client_(std::make_shared<EmbeddingClient>(std::move(config))) {}

std::vector<double> RemoteEmbedder::embed(std::string_view text) const {
  auto vectors = client_->embed({std::string(text)});
  if (vectors.front().size() != dimension()) {
    throw ProtocolError("embedding dimension " + std::to_string(vectors.front().size()) +
                        " differs from configured " + std::to_string(dimension()));
  }
  return unit_normalized(std::move(vectors.front()));
}

std::string RemoteEmbedder::name() const {
  return "remote/" + client_->config().model_name;
}

}  // namespace refrain
