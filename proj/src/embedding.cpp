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

#include "annobridge/embedding.hpp"

#include <algorithm>

#include "annobridge/utf8.hpp"

namespace annobridge {
namespace {

std::uint64_t fnv1a(std::u32string_view s, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (char32_t c : s) {
    for (int shift = 0; shift < 32; shift += 8) {
      h ^= (c >> shift) & 0xFF;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace

std::vector<EmbeddingVector> HttpEmbeddingTransport::embed_batch(
    const std::vector<std::string>& texts) {
  const Json reply = post_json(endpoint_, "/embeddings",
                               Json{{"model", endpoint_.model}, {"input", texts}});
  const auto data = reply.find("data");
  if (data == reply.end() || !data->is_array() || data->size() != texts.size()) {
    throw TransportError(200, "embedding reply does not hold one vector per input");
  }
  std::vector<EmbeddingVector> out(texts.size());
  for (std::size_t i = 0; i < data->size(); ++i) {
    const Json& item = (*data)[i];
    const std::size_t slot = item.contains("index") ? item["index"].get<std::size_t>() : i;
    if (slot >= out.size()) throw TransportError(200, "embedding index out of range");
    const auto values = item.at("embedding").get<std::vector<double>>();
    out[slot] = Eigen::Map<const EmbeddingVector>(values.data(),
                                                  static_cast<Eigen::Index>(values.size()));
  }
  return out;
}

std::vector<EmbeddingVector> MockEmbeddingTransport::embed_batch(
    const std::vector<std::string>& texts) {
  ++requests_;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    const std::u32string padded = U"  " + utf8::to_lower(utf8::decode(text)) + U"  ";
    EmbeddingVector v = EmbeddingVector::Zero(dim_);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const auto h = fnv1a(std::u32string_view(padded).substr(i, 3), seed_);
      v(static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_))) +=
          (h >> 63) ? 1.0 : -1.0;
    }
    if (v.norm() == 0.0) v(0) = 1.0;
    out.push_back(v.normalized());
  }
  return out;
}

std::vector<EmbeddingVector> embed(EmbeddingTransport& transport,
                                   const std::vector<std::string>& texts,
                                   std::size_t batch_size) {
  if (batch_size == 0) batch_size = 1;
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t b = 0; b < texts.size(); b += batch_size) {
    const auto last = std::min(texts.size(), b + batch_size);
    const std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(b),
                                         texts.begin() + static_cast<std::ptrdiff_t>(last));
    auto vectors = transport.embed_batch(batch);
    if (vectors.size() != batch.size()) {
      throw LengthMismatch("embedding service returned " + std::to_string(vectors.size()) +
                           " vectors for " + std::to_string(batch.size()) + " texts");
    }
    for (auto& v : vectors) {
      if (!out.empty() && v.size() != out.front().size()) {
        throw DimInconsistent("embedding service returned mixed dimensions (" +
                              std::to_string(out.front().size()) + " and " +
                              std::to_string(v.size()) + ")");
      }
      if (v.size() == 0) throw DimInconsistent("embedding service returned an empty vector");
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace annobridge
