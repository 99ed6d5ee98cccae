// Copyright 2026 The AnnoBridge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ANNOBRIDGE_EMBEDDING_HPP_
#define ANNOBRIDGE_EMBEDDING_HPP_

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "annobridge/gateway.hpp"
#include "annobridge/metrics.hpp"

namespace annobridge {

class DimInconsistent : public Error {
 public:
  using Error::Error;
};

class EmbeddingTransport {
 public:
  virtual ~EmbeddingTransport() = default;
  // One vector per input, same order.
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
};

// POST <base_url>/embeddings with {model, input}.
class HttpEmbeddingTransport : public EmbeddingTransport {
 public:
  explicit HttpEmbeddingTransport(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  Endpoint endpoint_;
};

// Deterministic offline embeddings: hashed character trigrams, so identical
// texts map to identical vectors and similar texts to nearby ones.
class MockEmbeddingTransport : public EmbeddingTransport {
 public:
  explicit MockEmbeddingTransport(int dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

  std::size_t requests() const { return requests_.load(); }

 private:
  int dim_;
  std::uint64_t seed_;
  std::atomic<std::size_t> requests_{0};
};

// Splits `texts` into batches of at most `batch_size`. Throws
// DimInconsistent when the service returns vectors of differing sizes.
std::vector<EmbeddingVector> embed(EmbeddingTransport& transport,
                                   const std::vector<std::string>& texts,
                                   std::size_t batch_size = 32);

}  // namespace annobridge

#endif  // ANNOBRIDGE_EMBEDDING_HPP_
