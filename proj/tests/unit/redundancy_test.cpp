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

#include <cmath>
#include <map>
#include <random>

#include "refrain/errors.h"
#include "refrain/redundancy.h"

namespace refrain {
namespace {

std::string lower_copy(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Exact bag-of-words cosine over lowercased whitespace tokens.
double bow_cosine(std::string_view a, std::string_view b) {
  std::map<std::string, double> ca, cb;
  for (auto t : whitespace_tokens(a)) ca[lower_copy(t)] += 1;
  for (auto t : whitespace_tokens(b)) cb[lower_copy(t)] += 1;
  double d = 0, na = 0, nb = 0;
  for (auto& [k, v] : ca) {
    na += v * v;
    if (auto it = cb.find(k); it != cb.end()) d += v * it->second;
  }
  for (auto& [k, v] : cb) nb += v * v;
  return d / std::sqrt(na * nb);
}

class CountingEmbedder final : public Embedder {
 public:
  std::vector<double> embed(std::string_view text) const override {
    ++calls;
    return inner.embed(text);
  }
  std::size_t dimension() const override { return inner.dimension(); }
  std::string name() const override { return "counting"; }
  HashedBagEmbedder inner{64};
  mutable int calls = 0;
};

class FailingEmbedder final : public Embedder {
 public:
  std::vector<double> embed(std::string_view) const override {
    throw std::runtime_error("service down");
  }
  std::size_t dimension() const override { return 8; }
  std::string name() const override { return "failing"; }
};

TEST(HashedBag, UnitNormAndCaseInsensitive) {
  HashedBagEmbedder e(256);
  const auto v = e.embed("Alpha beta beta");
  double n = 0;
  for (double x : v) n += x * x;
  EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_EQ(e.embed("ALPHA Beta beta"), v);
  EXPECT_THROW(HashedBagEmbedder(4), ConfigError);
}

TEST(HashedBag, EmptyTextIsZeroVector) {
  HashedBagEmbedder e(16);
  for (double x : e.embed("  ")) EXPECT_EQ(x, 0.0);
}

TEST(HashedBag, MatchesExactCosineWithoutCollisions) {
  HashedBagEmbedder e(8192);
  const std::string a = "the cat sat on the mat";
  const std::string b = "the dog sat on a mat today";
  double d = 0;
  const auto va = e.embed(a);
  const auto vb = e.embed(b);
  for (std::size_t i = 0; i < va.size(); ++i) d += va[i] * vb[i];
  EXPECT_NEAR(d, bow_cosine(a, b), 1e-12);
}

TEST(MaxPriorSimilarity, IdenticalStepIsOne) {
  auto backend = embedding_cosine_backend(hashed_bag_embedder(512));
  const std::vector<std::string> history = {"first step text", "6 times 7 is 42"};
  EXPECT_NEAR(max_prior_similarity("6 times 7 is 42", history, *backend), 1.0, 1e-9);
}

TEST(MaxPriorSimilarity, EmptyHistoryIsZero) {
  for (auto kind : {SimilarityKind::kEmbeddingCosine, SimilarityKind::kTfidfCosine,
                    SimilarityKind::kRougeL}) {
    auto backend = make_similarity_backend(kind, hashed_bag_embedder(64));
    EXPECT_EQ(max_prior_similarity("anything", {}, *backend), 0.0);
    EXPECT_EQ(backend->start_episode()->observe("first"), 0.0);
  }
  EXPECT_EQ(max_prior_similarity(std::vector<double>{1.0, 0.0}, {}), 0.0);
}

TEST(MaxPriorSimilarity, DisjointTfidfIsZero) {
  auto backend = tfidf_cosine_backend();
  const std::vector<std::string> history = {"alpha beta gamma"};
  EXPECT_EQ(max_prior_similarity("delta epsilon", history, *backend), 0.0);
}

TEST(MaxPriorSimilarity, TfidfSelfIsOne) {
  auto backend = tfidf_cosine_backend();
  const std::vector<std::string> history = {"the cat sat", "a dog ran home"};
  EXPECT_NEAR(max_prior_similarity("a dog ran home", history, *backend), 1.0, 1e-9);
}

TEST(MaxPriorSimilarity, VectorOverloadTakesMax) {
  const std::vector<double> q = {1.0, 0.0};
  const std::vector<double> rows = {0.0, 1.0, 0.6, 0.8};
  EXPECT_NEAR(max_prior_similarity(q, rows), 0.6, 1e-15);
}

TEST(RougeL, Examples) {
  EXPECT_NEAR(rouge_l_f("a b c", "a c"), 0.8, 1e-12);
  EXPECT_NEAR(rouge_l_f("the cat sat", "the cat sat"), 1.0, 1e-12);
  EXPECT_EQ(rouge_l_f("x", ""), 0.0);
  EXPECT_EQ(rouge_l_f("", "x"), 0.0);
}

TEST(RougeL, Symmetric) {
  std::mt19937_64 gen(3);
  const char* words[] = {"a", "b", "c", "d"};
  for (int i = 0; i < 300; ++i) {
    std::string x, y;
    for (int j = 0; j < 1 + static_cast<int>(gen() % 7); ++j) x += std::string(words[gen() % 4]) + " ";
    for (int j = 0; j < 1 + static_cast<int>(gen() % 7); ++j) y += std::string(words[gen() % 4]) + " ";
    EXPECT_NEAR(rouge_l_f(x, y), rouge_l_f(y, x), 1e-15);
  }
}

TEST(Scorers, EmbeddingCacheReusesVectors) {
  auto embedder = std::make_shared<CountingEmbedder>();
  auto backend = embedding_cosine_backend(embedder);
  auto scorer = backend->start_episode();
  scorer->observe("same text");
  EXPECT_NEAR(scorer->observe("same text"), 1.0, 1e-12);
  EXPECT_EQ(embedder->calls, 1);
  EXPECT_EQ(scorer->size(), 2u);
}

TEST(Scorers, EmbedderFailureNamesStep) {
  auto backend = embedding_cosine_backend(std::make_shared<FailingEmbedder>());
  auto scorer = backend->start_episode();
  try {
    scorer->observe("x");
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
  }
}

TEST(Scorers, EmbeddingMatchesBagOfWordsOracle) {
  auto backend = embedding_cosine_backend(hashed_bag_embedder(8192));
  const std::vector<std::string> steps = {"we add 3 and 4", "so 3 plus 4 is 7",
                                          "wait we add 3 and 4 again", "done"};
  auto scorer = backend->start_episode();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    double want = 0;
    for (std::size_t j = 0; j < i; ++j) want = std::max(want, bow_cosine(steps[i], steps[j]));
    EXPECT_NEAR(scorer->observe(steps[i]), want, 1e-12) << i;
  }
}

TEST(Scorers, KindsAndNames) {
  EXPECT_EQ(parse_similarity_kind("rouge_l"), SimilarityKind::kRougeL);
  EXPECT_EQ(to_string(SimilarityKind::kTfidfCosine), "tfidf_cosine");
  EXPECT_THROW(parse_similarity_kind("jaccard"), ConfigError);
  EXPECT_THROW(make_similarity_backend(SimilarityKind::kEmbeddingCosine, nullptr), ConfigError);
}

TEST(EvaluateStop, Examples) {
  EXPECT_TRUE(evaluate_stop(true, true, 0.82, 0.80).stop);
  EXPECT_FALSE(evaluate_stop(false, true, 0.99, 0.60).stop);
  EXPECT_FALSE(evaluate_stop(true, true, 0.74, 0.75).stop);
}

TEST(EvaluateStop, InclusiveBoundaryAndErrors) {
  EXPECT_TRUE(evaluate_stop(true, true, 0.70, 0.70).stop);
  EXPECT_FALSE(evaluate_stop(true, false, 1.0, 0.0).stop);
  EXPECT_THROW(evaluate_stop(true, true, 0.5, 1.01), ConfigError);
  EXPECT_THROW(evaluate_stop(true, true, 0.5, -0.1), ConfigError);
  EXPECT_THROW(evaluate_stop(true, true, 0.5, std::nan("")), ConfigError);
}

// Raising tau can only turn stops into non-stops.
TEST(EvaluateStop, MonotoneInTau) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const bool h = gen() & 1, r = gen() & 1;
    const double phi = u(gen), t1 = u(gen), t2 = u(gen);
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    if (evaluate_stop(h, r, phi, hi).stop) EXPECT_TRUE(evaluate_stop(h, r, phi, lo).stop);
  }
}

}  // namespace
}  // namespace refrain
