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

#include "refrain/redundancy.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "refrain/errors.h"
#include "refrain/kernels.h"
#include "refrain/reflection.h"

namespace refrain {
namespace {

double clamp_cosine(double c) { return std::clamp(c, -1.0, 1.0); }

class EmbeddingScorer final : public RedundancyScorer {
 public:
  explicit EmbeddingScorer(std::shared_ptr<const Embedder> embedder)
      : embedder_(std::move(embedder)) {}

  double observe(std::string_view step) override {
    const std::vector<double>& e = lookup(step);
    double phi = max_prior_similarity(e, rows_);
    rows_.insert(rows_.end(), e.begin(), e.end());
    ++count_;
    return phi;
  }

  std::size_t size() const override { return count_; }

 private:
  const std::vector<double>& lookup(std::string_view step) {
    std::string key(step);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::vector<double> e;
    try {
      e = unit_normalized(embedder_->embed(step));
    } catch (const std::exception& ex) {
      throw BackendError("embedding step " + std::to_string(count_ + 1) + ": " +
                         ex.what());
    }
    if (e.size() != embedder_->dimension()) {
      throw BackendError("embedding step " + std::to_string(count_ + 1) +
                         ": dimension " + std::to_string(e.size()) +
                         ", expected " + std::to_string(embedder_->dimension()));
    }
    return cache_.emplace(std::move(key), std::move(e)).first->second;
  }

  std::shared_ptr<const Embedder> embedder_;
  std::unordered_map<std::string, std::vector<double>> cache_;
  std::vector<double> rows_;
  std::size_t count_ = 0;
};

class EmbeddingBackend final : public SimilarityBackend {
 public:
  explicit EmbeddingBackend(std::shared_ptr<const Embedder> embedder)
      : embedder_(std::move(embedder)) {
    if (!embedder_) throw ConfigError("embedding_cosine requires an embedder");
  }
  SimilarityKind kind() const override { return SimilarityKind::kEmbeddingCosine; }
  std::string name() const override {
    return "embedding_cosine:" + embedder_->name();
  }
  std::unique_ptr<RedundancyScorer> start_episode() const override {
    return std::make_unique<EmbeddingScorer>(embedder_);
  }

 private:
  std::shared_ptr<const Embedder> embedder_;
};

class TfidfScorer final : public RedundancyScorer {
 public:
  double observe(std::string_view step) override {
    std::unordered_map<std::string, int> tf;
    for (auto tok : whitespace_tokens(step)) ++tf[to_lower_ascii(tok)];
    for (const auto& [term, count] : tf) ++df_[term];
    docs_.push_back(std::move(tf));

    const double n_docs = static_cast<double>(docs_.size());
    auto idf = [&](const std::string& term) {
      return std::log((1.0 + n_docs) / (1.0 + df_.at(term))) + 1.0;
    };
    auto norm = [&](const std::unordered_map<std::string, int>& doc) {
      double s = 0.0;
      for (const auto& [term, count] : doc) {
        double w = count * idf(term);
        s += w * w;
      }
      return std::sqrt(s);
    };

    const auto& current = docs_.back();
    const double current_norm = norm(current);
    double best = 0.0;
    for (std::size_t j = 0; j + 1 < docs_.size(); ++j) {
      const auto& prior = docs_[j];
      double prior_norm = norm(prior);
      if (current_norm == 0.0 || prior_norm == 0.0) continue;
      double d = 0.0;
      for (const auto& [term, count] : current) {
        if (auto it = prior.find(term); it != prior.end()) {
          double w = idf(term);
          d += count * w * it->second * w;
        }
      }
      best = std::max(best, clamp_cosine(d / (current_norm * prior_norm)));
    }
    return best;
  }

  std::size_t size() const override { return docs_.size(); }

 private:
  std::vector<std::unordered_map<std::string, int>> docs_;
  std::unordered_map<std::string, int> df_;
};

class TfidfBackend final : public SimilarityBackend {
 public:
  SimilarityKind kind() const override { return SimilarityKind::kTfidfCosine; }
  std::string name() const override { return "tfidf_cosine"; }
  std::unique_ptr<RedundancyScorer> start_episode() const override {
    return std::make_unique<TfidfScorer>();
  }
};

class RougeScorer final : public RedundancyScorer {
 public:
  double observe(std::string_view step) override {
    double best = 0.0;
    for (const auto& prior : history_) {
      best = std::max(best, rouge_l_f(step, prior));
    }
    history_.emplace_back(step);
    return best;
  }
  std::size_t size() const override { return history_.size(); }

 private:
  std::vector<std::string> history_;
};

class RougeBackend final : public SimilarityBackend {
 public:
  SimilarityKind kind() const override { return SimilarityKind::kRougeL; }
  std::string name() const override { return "rouge_l"; }
  std::unique_ptr<RedundancyScorer> start_episode() const override {
    return std::make_unique<RougeScorer>();
  }
};

}  // namespace

HashedBagEmbedder::HashedBagEmbedder(std::size_t dimension)
    : dimension_(dimension) {
  if (dimension < 8) {
    throw ConfigError("hashed bag embedder dimension must be >= 8");
  }
}

std::uint64_t HashedBagEmbedder::token_hash(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t HashedBagEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(token_hash(to_lower_ascii(token)) % dimension_);
}

std::vector<double> HashedBagEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  for (auto tok : whitespace_tokens(text)) v[bucket(tok)] += 1.0;
  return unit_normalized(std::move(v));
}

std::string HashedBagEmbedder::name() const {
  return "hashed_bag/" + std::to_string(dimension_);
}

std::shared_ptr<const Embedder> hashed_bag_embedder(std::size_t dimension) {
  return std::make_shared<HashedBagEmbedder>(dimension);
}

std::vector<double> unit_normalized(std::vector<double> v) {
  double sq = kernels::squared_norm(v);
  if (sq > 0.0) kernels::scale(v, 1.0 / std::sqrt(sq));
  return v;
}

std::vector<std::string_view> whitespace_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  auto is_ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_ws(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_ws(text[i])) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::size_t lcs_length(std::span<const std::string_view> a,
                       std::span<const std::string_view> b) {
  if (a.empty() || b.empty()) return 0;
  // Two-row dynamic program over b.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_f(std::string_view a, std::string_view b) {
  auto ta = whitespace_tokens(a);
  auto tb = whitespace_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;
  double lcs = static_cast<double>(lcs_length(ta, tb));
  if (lcs == 0.0) return 0.0;
  double recall = lcs / static_cast<double>(ta.size());
  double precision = lcs / static_cast<double>(tb.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::string_view to_string(SimilarityKind kind) {
  switch (kind) {
    case SimilarityKind::kEmbeddingCosine:
      return "embedding_cosine";
    case SimilarityKind::kTfidfCosine:
      return "tfidf_cosine";
    case SimilarityKind::kRougeL:
      return "rouge_l";
  }
  return "embedding_cosine";
}

SimilarityKind parse_similarity_kind(std::string_view name) {
  for (auto kind : {SimilarityKind::kEmbeddingCosine, SimilarityKind::kTfidfCosine,
                    SimilarityKind::kRougeL}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown similarity backend '" + std::string(name) + "'");
}

std::shared_ptr<const SimilarityBackend> embedding_cosine_backend(
    std::shared_ptr<const Embedder> embedder) {
  return std::make_shared<EmbeddingBackend>(std::move(embedder));
}

std::shared_ptr<const SimilarityBackend> tfidf_cosine_backend() {
  return std::make_shared<TfidfBackend>();
}

std::shared_ptr<const SimilarityBackend> rouge_l_backend() {
  return std::make_shared<RougeBackend>();
}

std::shared_ptr<const SimilarityBackend> make_similarity_backend(
    SimilarityKind kind, std::shared_ptr<const Embedder> embedder) {
  switch (kind) {
    case SimilarityKind::kEmbeddingCosine:
      return embedding_cosine_backend(std::move(embedder));
    case SimilarityKind::kTfidfCosine:
      return tfidf_cosine_backend();
    case SimilarityKind::kRougeL:
      return rouge_l_backend();
  }
  throw ConfigError("unknown similarity backend");
}

double max_prior_similarity(std::string_view current,
                            std::span<const std::string> history,
                            const SimilarityBackend& backend) {
  if (history.empty()) return 0.0;
  auto scorer = backend.start_episode();
  for (const auto& step : history) scorer->observe(step);
  return scorer->observe(current);
}

double max_prior_similarity(std::span<const double> current,
                            std::span<const double> history_rows) {
  if (history_rows.empty() || current.empty()) return 0.0;
  return clamp_cosine(kernels::max_dot(current, history_rows));
}

StopDecision evaluate_stop(bool h, bool r, double phi, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("threshold tau must lie in [0, 1], got " +
                      std::to_string(tau));
  }
  return StopDecision{h, r, phi, tau, h && r && phi >= tau};
}

}  // namespace refrain
