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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refrain {

// Sentence encoder f(.). Implementations must be deterministic and safe to
// call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;
};

// Deterministic offline encoder: lowercased whitespace tokens are hashed
// with 64-bit FNV-1a into `dimension` buckets, counted, then unit-normalized.
class HashedBagEmbedder final : public Embedder {
 public:
  explicit HashedBagEmbedder(std::size_t dimension);

  std::vector<double> embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string name() const override;

  static std::uint64_t token_hash(std::string_view token);
  std::size_t bucket(std::string_view token) const;

 private:
  std::size_t dimension_;
};

std::shared_ptr<const Embedder> hashed_bag_embedder(std::size_t dimension);

// Returns a unit-length copy (the zero vector stays zero).
std::vector<double> unit_normalized(std::vector<double> v);

std::vector<std::string_view> whitespace_tokens(std::string_view text);

std::size_t lcs_length(std::span<const std::string_view> a,
                       std::span<const std::string_view> b);

// ROUGE-L F1 over whitespace tokens: recall against `a`, precision against
// `b`. Zero when either side has no tokens.
double rouge_l_f(std::string_view a, std::string_view b);

enum class SimilarityKind { kEmbeddingCosine, kTfidfCosine, kRougeL };

std::string_view to_string(SimilarityKind kind);
SimilarityKind parse_similarity_kind(std::string_view name);

// Per-episode incremental redundancy state. Single owner.
class RedundancyScorer {
 public:
  virtual ~RedundancyScorer() = default;
  // Returns max similarity of `step` to every step observed so far (0 for the
  // first step), then appends `step` to the history.
  virtual double observe(std::string_view step) = 0;
  virtual std::size_t size() const = 0;
};

class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual SimilarityKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<RedundancyScorer> start_episode() const = 0;
};

std::shared_ptr<const SimilarityBackend> embedding_cosine_backend(
    std::shared_ptr<const Embedder> embedder);
// Term weights use raw counts times idf = ln((1 + N) / (1 + df)) + 1, with
// the document set being the trace's steps observed so far.
std::shared_ptr<const SimilarityBackend> tfidf_cosine_backend();
std::shared_ptr<const SimilarityBackend> rouge_l_backend();

// Builds a backend of `kind`; `embedder` is required for embedding cosine.
std::shared_ptr<const SimilarityBackend> make_similarity_backend(
    SimilarityKind kind, std::shared_ptr<const Embedder> embedder = nullptr);

// Max similarity of `current` to the ordered `history`; exactly 0 when the
// history is empty.
double max_prior_similarity(std::string_view current,
                            std::span<const std::string> history,
                            const SimilarityBackend& backend);

// Vector form over unit-normalized embeddings laid out row-major.
double max_prior_similarity(std::span<const double> current,
                            std::span<const double> history_rows);

struct StopDecision {
  bool h = false;
  bool r = false;
  double phi = 0.0;
  double tau = 0.0;
  bool stop = false;

  bool operator==(const StopDecision&) const = default;
};

// stop = h && r && phi >= tau. Throws ConfigError for tau outside [0, 1].
StopDecision evaluate_stop(bool h, bool r, double phi, double tau);

}  // namespace refrain
