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

#ifndef ANNOBRIDGE_METRICS_HPP_
#define ANNOBRIDGE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "annobridge/error.hpp"
#include "annobridge/record.hpp"

namespace annobridge {

// ---------------------------------------------------------------------------
// Span transfer quality

enum class MatchClass { Exact, Wider, Narrower, Mismatch, Unhandled };

std::string_view to_string(MatchClass c);

// Compares intervals only. Partial overlap and disjoint intervals are both
// Mismatch.
MatchClass classify_match(const CharSpan& gold, const std::optional<CharSpan>& sys);

struct MatchCounts {
  std::size_t exact = 0;
  std::size_t wider = 0;
  std::size_t narrower = 0;
  std::size_t mismatched = 0;
  std::size_t unhandled = 0;

  std::size_t spans_checked() const { return exact + wider + narrower + mismatched; }
  std::size_t total() const { return spans_checked() + unhandled; }
  void add(MatchClass c);

  bool operator==(const MatchCounts&) const = default;
};

struct TransferReport {
  std::size_t total_entries = 0;
  MatchCounts counts;
  std::map<std::string, MatchCounts> per_label;
  std::vector<std::string> missing_records;  // gold ids absent from sys
};

// Pairs records by id and target spans by span_id. Gold spans are the gold
// record's spans_rus. Throws IdCollision on repeated record or span ids,
// MissingField when a gold record lacks spans_rus.
TransferReport transfer_report(const std::vector<SentenceRecord>& gold,
                               const std::vector<SentenceRecord>& sys);

// Rows: Total Entries, Exact Match, Wider Match, Narrower Match, Mismatched,
// Spans Checked; one column per system.
std::string format_transfer_table(
    const std::vector<std::pair<std::string, TransferReport>>& columns);
Json transfer_report_to_json(const TransferReport& r);

// ---------------------------------------------------------------------------
// BLEU

struct BleuOptions {
  int max_n = 4;
  bool add_one_smoothing = false;  // applied to n >= 2
};

// Lowercase, split on whitespace, punctuation as separate tokens.
std::vector<std::string> bleu_tokenize(std::string_view text);

// Corpus-level BLEU in [0, 1]. Throws LengthMismatch, EmptyCorpus.
double bleu(const std::vector<std::string>& candidates,
            const std::vector<std::string>& references, BleuOptions options = {});

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Embedding distances

using EmbeddingVector = Eigen::VectorXd;
// One embedding per row.
using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimMismatch : public Error {
 public:
  using Error::Error;
};
class ZeroVector : public Error {
 public:
  using Error::Error;
};

enum class DistanceKind { Cosine, Euclidean };

namespace detail {
template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  if (u.size() != v.size()) {
    throw DimMismatch("embedding dims differ: " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
  }
  if (u.size() == 0) throw DimMismatch("empty embedding");
}
}  // namespace detail

// 1 - cos(u, v), in [0, 2].
template <typename A, typename B>
typename A::Scalar cosine_distance(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  detail::check_pair(u, v);
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw ZeroVector("zero-norm embedding");
  const Scalar cos = u.dot(v) / (nu * nv);
  return Scalar(1) - std::clamp(cos, Scalar(-1), Scalar(1));
}

// Euclidean distance between the L2-normalized vectors.
template <typename A, typename B>
typename A::Scalar euclidean_distance(const Eigen::MatrixBase<A>& u,
                                      const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  detail::check_pair(u, v);
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) throw ZeroVector("zero-norm embedding");
  return (u / nu - v / nv).norm();
}

template <typename A, typename B>
typename A::Scalar distance(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v,
                            DistanceKind kind) {
  return kind == DistanceKind::Cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

// Mean row-wise distance between two stacks of embeddings.
template <typename A, typename B>
typename A::Scalar mean_paired_distance(const Eigen::MatrixBase<A>& x,
                                        const Eigen::MatrixBase<B>& y,
                                        DistanceKind kind = DistanceKind::Cosine) {
  using Scalar = typename A::Scalar;
  if (x.rows() != y.rows()) {
    throw LengthMismatch("paired embedding counts differ: " + std::to_string(x.rows()) +
                         " vs " + std::to_string(y.rows()));
  }
  if (x.rows() == 0) return Scalar(0);
  Scalar sum(0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += distance(x.row(i), y.row(i), kind);
  return sum / static_cast<Scalar>(x.rows());
}

// Mean distance between gold and system target-language embeddings.
template <typename A, typename B>
typename A::Scalar bleu_like_metric(const Eigen::MatrixBase<A>& gold_ru,
                                    const Eigen::MatrixBase<B>& sys_ru,
                                    DistanceKind kind = DistanceKind::Cosine) {
  return mean_paired_distance(gold_ru, sys_ru, kind);
}

// mean d(en, gold_ru) - mean d(en, sys_ru). Negative when system
// translations sit farther from the source than the gold ones.
template <typename A, typename B, typename C>
typename A::Scalar parallel_comparison(const Eigen::MatrixBase<A>& en,
                                       const Eigen::MatrixBase<B>& gold_ru,
                                       const Eigen::MatrixBase<C>& sys_ru,
                                       DistanceKind kind = DistanceKind::Cosine) {
  return mean_paired_distance(en, gold_ru, kind) - mean_paired_distance(en, sys_ru, kind);
}

EmbeddingMatrix stack_rows(const std::vector<EmbeddingVector>& vectors);

struct TranslationScores {
  double bleu = 0.0;
  std::optional<double> bleu_like;
  std::optional<double> parallel_comparison;
};

std::string format_translation_table(const TranslationScores& s);
Json translation_scores_to_json(const TranslationScores& s);

}  // namespace annobridge

#endif  // ANNOBRIDGE_METRICS_HPP_
