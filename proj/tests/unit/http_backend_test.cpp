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

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "refrain/errors.h"
#include "refrain/http_backend.h"

namespace refrain {
namespace {

using nlohmann::json;

std::string sse_chunk(const std::string& text, bool with_logprobs, double lp = -0.1) {
  json choice = {{"index", 0}, {"delta", {{"content", text}}}};
  if (with_logprobs) {
    choice["logprobs"] = {{"content", json::array({{{"token", text}, {"logprob", lp}}})}};
  }
  return "data: " + json{{"choices", json::array({choice})}}.dump() + "\n\n";
}

// Scripted OpenAI-compatible server on an ephemeral port.
class StubServer {
 public:
  std::vector<std::string> stream_tokens = {"a", "\n\n", "b", "\n\n"};
  bool logprobs = true;
  std::atomic<int> fail_first{0};
  int fail_status = 500;
  std::string closure_content = "42}";
  std::vector<std::string> closure_tokens = {"42", "}"};
  std::vector<std::vector<double>> embeddings = {{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}};
  std::atomic<int> chat_requests{0};
  std::atomic<int> embed_requests{0};
  json last_closure_request;

  StubServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      ++chat_requests;
      if (fail_first.load() > 0) {
        --fail_first;
        res.status = fail_status;
        res.set_content("{}", "application/json");
        return;
      }
      const json body = json::parse(req.body);
      if (body.value("stream", false)) {
        std::string payload;
        for (const auto& t : stream_tokens) payload += sse_chunk(t, logprobs);
        payload += "data: [DONE]\n\n";
        res.set_chunked_content_provider(
            "text/event-stream", [payload](std::size_t, httplib::DataSink& sink) {
              sink.write(payload.data(), payload.size());
              sink.done();
              return true;
            });
        return;
      }
      last_closure_request = body;
      json content = json::array();
      for (const auto& t : closure_tokens) content.push_back({{"token", t}, {"logprob", -0.2}});
      json choice = {{"index", 0},
                     {"message", {{"role", "assistant"}, {"content", closure_content}}}};
      if (logprobs) choice["logprobs"] = {{"content", content}};
      res.set_content(json{{"choices", json::array({choice})},
                           {"usage", {{"prompt_tokens", 30}, {"completion_tokens", 3}}}}
                          .dump(),
                      "application/json");
    });
    server_.Post("/tokenize", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"tokens":[1,2,3],"token_strs":["Okay",",","done"]})",
                      "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_requests;
      const json body = json::parse(req.body);
      json data = json::array();
      for (std::size_t i = 0; i < body["input"].size(); ++i) {
        data.push_back({{"index", i}, {"embedding", embeddings[i % embeddings.size()]}});
      }
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

BackendConfig config_for(const StubServer& s) {
  BackendConfig c = sampling_preset("qwen3");
  c.base_url = s.url();
  c.timeout_ms = 5000;
  c.backoff_ms = 1;
  return c;
}

const Question kQuestion{"h1", "What is 6 times 7?", "42", TaskKind::kMath};

TEST(HttpOpen, StreamsStepsWithLogprobs) {
  StubServer server;
  auto stream = http_open(config_for(server), kQuestion, PromptTemplate::builtin(PromptId::kP0));
  auto a = stream->next_step();
  auto b = stream->next_step();
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->text, "a");
  EXPECT_EQ(b->text, "b");
  ASSERT_FALSE(a->tokens.empty());
  EXPECT_EQ(a->tokens.front().text, "a");
  EXPECT_DOUBLE_EQ(a->tokens.front().logprob, -0.1);
  EXPECT_EQ(b->tokens.front().text, "b");
  EXPECT_FALSE(stream->next_step().has_value());
  EXPECT_EQ(stream->steps_yielded(), 2);
  EXPECT_EQ(stream->thinking_tokens(), 4);
}

TEST(HttpOpen, RetriesTransientFailures) {
  StubServer server;
  server.fail_first = 2;
  auto cfg = config_for(server);
  cfg.retries = 2;
  auto stream = http_open(cfg, kQuestion, PromptTemplate::builtin(PromptId::kP0));
  EXPECT_TRUE(stream->next_step().has_value());
  EXPECT_EQ(server.chat_requests.load(), 3);
}

TEST(HttpOpen, GivesUpAfterRetries) {
  StubServer server;
  server.fail_first = 3;
  auto cfg = config_for(server);
  cfg.retries = 2;
  EXPECT_THROW(http_open(cfg, kQuestion, PromptTemplate::builtin(PromptId::kP0)),
               BackendError);
}

TEST(HttpOpen, NonTransientStatusFailsFast) {
  StubServer server;
  server.fail_first = 1;
  server.fail_status = 400;
  EXPECT_THROW(http_open(config_for(server), kQuestion, PromptTemplate::builtin(PromptId::kP0)),
               BackendError);
  EXPECT_EQ(server.chat_requests.load(), 1);
}

TEST(HttpOpen, MissingLogprobsIsCapabilityError) {
  StubServer server;
  server.logprobs = false;
  EXPECT_THROW(http_open(config_for(server), kQuestion, PromptTemplate::builtin(PromptId::kP0)),
               CapabilityError);
}

TEST(HttpOpen, ConnectionRefused) {
  BackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.retries = 1;
  cfg.backoff_ms = 1;
  cfg.timeout_ms = 500;
  EXPECT_THROW(http_open(cfg, kQuestion, PromptTemplate::builtin(PromptId::kP0)), BackendError);
}

TEST(HttpOpen, BudgetNeverEmitsPartialStep) {
  StubServer server;
  auto stream = http_open(config_for(server), kQuestion, PromptTemplate::builtin(PromptId::kP0), 3);
  EXPECT_TRUE(stream->next_step().has_value());
  EXPECT_FALSE(stream->next_step().has_value());
  EXPECT_TRUE(stream->budget_truncated());
  EXPECT_LE(stream->thinking_tokens(), 3);
}

TEST(HttpClose, ForcedClosureScoresBoxedTokens) {
  StubServer server;
  auto stream = http_open(config_for(server), kQuestion, PromptTemplate::builtin(PromptId::kP0));
  stream->next_step();
  const auto c = stream->close();
  EXPECT_EQ(c.segment.boxed_answer, "42");
  ASSERT_EQ(c.segment.answer_tokens.size(), 1u);
  EXPECT_EQ(c.segment.answer_tokens[0].text, "42");
  EXPECT_EQ(c.segment.total_tokens, 3);
  EXPECT_EQ(c.fidelity, Fidelity::kExact);
  const auto& msgs = server.last_closure_request["messages"];
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[1]["content"], "a\n\nFinal Answer: \\boxed{");
  EXPECT_TRUE(server.last_closure_request["continue_final_message"].get<bool>());
}

TEST(HttpNoThinking, UsesTokenizerAndPhrase) {
  StubServer server;
  HttpBackend backend(config_for(server));
  auto stream = backend.open_no_thinking(kQuestion, PromptTemplate::builtin(PromptId::kP0));
  auto step = stream->next_step();
  ASSERT_TRUE(step);
  EXPECT_EQ(step->text, "Okay, I think I have finished thinking.");
  EXPECT_EQ(stream->thinking_tokens(), 3);
  const auto c = backend.close_with_answer(*stream);
  EXPECT_EQ(c.segment.boxed_answer, "42");
  EXPECT_EQ(server.last_closure_request["messages"][1]["content"],
            "Okay, I think I have finished thinking.\n\nFinal Answer: \\boxed{");
}

TEST(StepAssembler, SplitsAcrossChunks) {
  StepAssembler asm_;
  asm_.append("first st", {{"first", -0.1}, {" st", -0.2}});
  asm_.append("ep\n", {{"ep", -0.1}, {"\n", -0.1}});
  EXPECT_TRUE(asm_.take_completed().empty());
  asm_.append("\nsecond", {{"\n", -0.1}, {"second", -0.3}});
  auto done = asm_.take_completed();
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].text, "first step");
  // Delimiter newlines belong to the step they close.
  EXPECT_EQ(done[0].tokens.size(), 5u);
  auto last = asm_.finish();
  ASSERT_TRUE(last);
  EXPECT_EQ(last->text, "second");
  EXPECT_EQ(last->tokens.size(), 1u);
  EXPECT_EQ(last->tokens[0].text, "second");
}

TEST(StepAssembler, EmptyFragmentsCarryTokens) {
  StepAssembler asm_;
  asm_.append("\n\n\n\nx", {{"\n\n", -0.1}, {"\n\n", -0.1}, {"x", -0.1}});
  EXPECT_TRUE(asm_.take_completed().empty());
  auto last = asm_.finish();
  ASSERT_TRUE(last);
  EXPECT_EQ(last->text, "x");
  EXPECT_EQ(last->tokens.size(), 3u);
}

TEST(StreamPayload, Parsing) {
  StreamDelta d;
  EXPECT_FALSE(parse_stream_payload(" [DONE]", d));
  EXPECT_TRUE(parse_stream_payload(
      R"({"choices":[{"delta":{"reasoning_content":"hm"},"logprobs":{"content":[{"token":"hm","logprob":-0.5}]}}]})",
      d));
  EXPECT_EQ(d.text, "hm");
  ASSERT_TRUE(d.tokens);
  EXPECT_DOUBLE_EQ((*d.tokens)[0].logprob, -0.5);
  EXPECT_THROW(parse_stream_payload(R"({"error":{"message":"boom"}})", d), BackendError);
}

TEST(ClosureContinuation, AnswerTokensCoverBox) {
  const auto seg = closure_from_continuation("5", {{"5", -0.1}, {"2", -0.2}, {"_8", -0.3}, {"}", -0.4}}, 4, 0);
  EXPECT_FALSE(seg.boxed_answer.has_value());
  EXPECT_TRUE(seg.malformed);
  const auto ok = closure_from_continuation("52_8}", {{"52", -0.1}, {"_8", -0.3}, {"}", -0.4}}, 3, 0);
  EXPECT_EQ(ok.boxed_answer, "52_8");
  EXPECT_EQ(ok.answer_tokens.size(), 2u);
}

TEST(SamplingPresets, Values) {
  const auto q = sampling_preset("qwen3");
  EXPECT_DOUBLE_EQ(q.temperature, 0.6);
  EXPECT_DOUBLE_EQ(q.top_p, 0.95);
  EXPECT_EQ(q.top_k, 20);
  EXPECT_EQ(q.max_tokens, 16384);
  const auto g = sampling_preset("gpt-oss");
  EXPECT_DOUBLE_EQ(g.temperature, 1.0);
  EXPECT_DOUBLE_EQ(g.top_p, 1.0);
  EXPECT_EQ(g.top_k, 50);
  EXPECT_THROW(sampling_preset("llama"), ConfigError);
}

TEST(RemoteEmbed, EmptyBatch) {
  EmbeddingConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  EXPECT_TRUE(remote_embed({}, cfg).empty());
}

TEST(RemoteEmbed, PassesVectorsThrough) {
  StubServer server;
  EmbeddingConfig cfg;
  cfg.base_url = server.url();
  cfg.dimension = 3;
  const auto v = remote_embed({"x", "y"}, cfg);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0], server.embeddings[0]);
  EXPECT_EQ(v[1], server.embeddings[1]);
}

TEST(RemoteEmbed, DuplicatesAndCache) {
  StubServer server;
  EmbeddingConfig cfg;
  cfg.base_url = server.url();
  EmbeddingClient client(cfg);
  const auto v = client.embed({"same", "same"});
  EXPECT_EQ(v[0], v[1]);
  client.embed({"same"});
  EXPECT_EQ(client.requests_sent(), 1u);
}

TEST(RemoteEmbed, DimensionMismatch) {
  StubServer server;
  server.embeddings = {{1.0, 0.0}, {1.0, 0.0, 0.0}};
  EmbeddingConfig cfg;
  cfg.base_url = server.url();
  EXPECT_THROW(remote_embed({"a", "b"}, cfg), ProtocolError);
}

TEST(RemoteEmbedder, NormalizesOutput) {
  StubServer server;
  server.embeddings = {{0.0, 2.0, 0.0}};
  EmbeddingConfig cfg;
  cfg.base_url = server.url();
  cfg.dimension = 3;
  RemoteEmbedder e(cfg);
  EXPECT_EQ(e.embed("z"), (std::vector<double>{0.0, 1.0, 0.0}));
}

}  // namespace
}  // namespace refrain
