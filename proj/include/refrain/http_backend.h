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

// Live counterparts of the replay backend and the offline embedder. Wire
// formats are documented in docs/protocol.md.

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "refrain/backend.h"
#include "refrain/redundancy.h"

namespace refrain {

struct BackendConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_name = "Qwen/Qwen3-8B";
  double temperature = 0.6;
  double top_p = 0.95;
  int top_k = 20;
  int max_tokens = 16384;
  int closure_max_tokens = 256;
  int timeout_ms = 600000;
  int retries = 2;
  int backoff_ms = 200;
  // Environment variable holding a bearer token; unset means no auth header.
  std::string api_key_env = "REFRAIN_API_KEY";
  std::string chat_path = "/v1/chat/completions";
  std::string tokenize_path = "/tokenize";

  void validate() const;
};

// Decoding presets: "qwen3" (0.6 / 0.95 / 20) and "gpt-oss" (1.0 / 1.0 / 50).
BackendConfig sampling_preset(std::string_view name);
std::vector<std::string> sampling_preset_names();

// Incrementally splits streamed text into blank-line delimited steps and
// attaches each token to the step in which it starts. Tokens of
// whitespace-only fragments carry over to the next step.
class StepAssembler {
 public:
  void append(std::string_view text, std::vector<TokenLogprob> tokens);
  // Steps completed by the delimiters seen so far, in order.
  std::vector<ReasoningStep> take_completed();
  // Flushes the trailing fragment at end of stream.
  std::optional<ReasoningStep> finish();

 private:
  struct PendingToken {
    std::size_t offset;
    TokenLogprob token;
  };

  void split_completed();

  std::string buffer_;
  std::vector<PendingToken> pending_;
  std::vector<TokenLogprob> carry_;
  std::vector<ReasoningStep> completed_;
};

// Parses one SSE `data:` payload of a streamed chat completion into the text
// delta and its token logprobs. Returns false for the `[DONE]` sentinel.
struct StreamDelta {
  std::string text;
  std::optional<std::vector<TokenLogprob>> tokens;  // absent: no logprobs
};
bool parse_stream_payload(std::string_view payload, StreamDelta& delta);

// Builds the forced-closure answer segment from the continuation generated
// after kForcedClosurePrefix.
AnswerSegment closure_from_continuation(std::string_view continuation,
                                        const std::vector<TokenLogprob>& tokens,
                                        int total_tokens, int prefix_context_len);

// Opens a streamed generation. Blocks until the first content chunk arrives
// so a server without logprob support is reported here as CapabilityError.
std::unique_ptr<StepStream> http_open(const BackendConfig& config,
                                      const Question& question,
                                      const PromptTemplate& prompt,
                                      std::optional<int> budget = std::nullopt);

// Forced closure after `thinking_text` (empty for none).
Closure http_close(const BackendConfig& config, const std::string& rendered_prompt,
                   const std::string& thinking_text);

class HttpBackend final : public GenerationBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  std::string name() const override { return "http"; }
  std::unique_ptr<StepStream> open_episode(const Question& question,
                                           const PromptTemplate& prompt,
                                           std::optional<int> budget) override;
  // Token count of the phrase comes from the server's tokenize endpoint.
  std::unique_ptr<StepStream> open_no_thinking(const Question& question,
                                               const PromptTemplate& prompt) override;

  std::vector<TokenLogprob> tokenize(std::string_view text) const;
  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
};

struct EmbeddingConfig {
  std::string base_url = "http://127.0.0.1:8001";
  std::string model_name = "sentence-transformers/all-MiniLM-L6-v2";
  std::string path = "/v1/embeddings";
  std::size_t dimension = 384;
  int timeout_ms = 30000;
  int retries = 2;
  int backoff_ms = 100;
  std::string api_key_env = "REFRAIN_API_KEY";
};

// Thread-safe embedding-service client with an exact-text cache. Vectors are
// returned exactly as the service sent them.
class EmbeddingClient {
 public:
  explicit EmbeddingClient(EmbeddingConfig config);

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts);
  std::size_t requests_sent() const;
  const EmbeddingConfig& config() const { return config_; }

 private:
  EmbeddingConfig config_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::vector<double>> cache_;
  std::optional<std::size_t> dimension_;
  std::size_t requests_ = 0;
};

std::vector<std::vector<double>> remote_embed(const std::vector<std::string>& texts,
                                              const EmbeddingConfig& config);

// Embedder adapter over the service; output is unit-normalized.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbeddingConfig config);

  std::vector<double> embed(std::string_view text) const override;
  std::size_t dimension() const override { return client_->config().dimension; }
  std::string name() const override;

 private:
  std::shared_ptr<EmbeddingClient> client_;
};

}  // namespace refrain
