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

#include <cmath>
#include <fstream>
#include <random>

#include "annobridge/embedding.hpp"
#include "annobridge/jsonl.hpp"
#include "annobridge/metrics.hpp"
#include "doctest.h"

using namespace annobridge;

namespace {

const std::filesystem::path kFixtures = ANNOBRIDGE_FIXTURES;

CharSpan iv(std::size_t s, std::size_t e) { return {s, e, "Term", "T1", ""}; }

}  // namespace

TEST_CASE("classify_match on the committed truth table") {
  std::ifstream in(kFixtures / "match_cases.json");
  const Json cases = Json::parse(in);
  REQUIRE(cases.size() == 16);
  for (const auto& c : cases) {
    INFO(c["name"].get<std::string>());
    const auto gold = iv(c["gold"][0], c["gold"][1]);
    const auto sys = c["sys"].is_null() ? std::optional<CharSpan>{} : iv(c["sys"][0], c["sys"][1]);
    std::string got(to_string(classify_match(gold, sys)));
    std::transform(got.begin(), got.end(), got.begin(), ::tolower);
    CHECK(got == c["expected"].get<std::string>());
  }
}

TEST_CASE("classify_match is total and consistent with interval containment") {
  for (std::size_t gs = 0; gs < 12; ++gs)
    for (std::size_t ge = gs + 1; ge <= 12; ++ge)
      for (std::size_t ss = 0; ss < 12; ++ss)
        for (std::size_t se = ss + 1; se <= 12; ++se) {
          const auto c = classify_match(iv(gs, ge), iv(ss, se));
          const bool sys_in_gold = gs <= ss && se <= ge;
          const bool gold_in_sys = ss <= gs && ge <= se;
          if (gs == ss && ge == se) {
            CHECK(c == MatchClass::Exact);
          } else if (gold_in_sys) {
            CHECK(c == MatchClass::Wider);
          } else if (sys_in_gold) {
            CHECK(c == MatchClass::Narrower);
          } else {
            CHECK(c == MatchClass::Mismatch);
          }
        }
  CHECK(classify_match(iv(0, 50), std::nullopt) == MatchClass::Unhandled);
}

TEST_CASE("transfer_report on the hand-labeled fixture") {
  const auto gold = read_jsonl(kFixtures / "transfer_gold.jsonl");
  const auto sys = read_jsonl(kFixtures / "transfer_sys.jsonl");
  const auto r = transfer_report(gold, sys);
  CHECK(r.total_entries == 10);
  CHECK(r.counts.exact == 7);
  CHECK(r.counts.wider == 2);
  CHECK(r.counts.narrower == 1);
  CHECK(r.counts.mismatched == 1);
  CHECK(r.counts.unhandled == 1);
  CHECK(r.counts.spans_checked() == 11);
  CHECK(r.per_label.at("Definition").wider == 1);
  CHECK(r.per_label.at("Definition").unhandled == 1);

  const auto self = transfer_report(gold, gold);
  CHECK(self.counts.exact == 12);
  CHECK(self.counts.spans_checked() == 12);

  // Permuting the system records changes nothing.
  auto shuffled = sys;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(transfer_report(gold, shuffled).counts == r.counts);

  // A missing system record turns its spans into unhandled ones.
  auto fewer = sys;
  fewer.erase(fewer.begin());
  const auto m = transfer_report(gold, fewer);
  CHECK(m.missing_records == std::vector<std::string>{"g:0"});
  CHECK(m.counts.unhandled == 3);

  auto dup = sys;
  dup.push_back(sys[0]);
  CHECK_THROWS_AS(transfer_report(gold, dup), IdCollision);
  auto bare = gold;
  bare[0].spans_rus.reset();
  CHECK_THROWS_AS(transfer_report(bare, sys), MissingField);

  const std::string table = format_transfer_table({{"Fixture", r}});
  CHECK(table.find("Total Entries") != std::string::npos);
  CHECK(table.find("Spans Checked") != std::string::npos);
  const Json j = transfer_report_to_json(r);
  CHECK(j["spans_checked"] == 11);
  CHECK(j["per_label"]["Term"]["exact"].is_number());
}

TEST_CASE("BLEU tokenization and edge cases") {
  CHECK(bleu_tokenize("Митоз — ЭТО деление, Ядра!") ==
        std::vector<std::string>{"митоз", "—", "это", "деление", ",", "ядра", "!"});
  CHECK(bleu({"a b c d"}, {"a b c d"}) == 1.0);
  CHECK(bleu({"x y z w"}, {"a b c d"}) == 0.0);
  CHECK_THROWS_AS(bleu({}, {}), EmptyCorpus);
  CHECK_THROWS_AS(bleu({"a"}, {"a", "b"}), LengthMismatch);
  // Short identical corpora still score 1 (orders without n-grams drop out).
  CHECK(bleu({"a"}, {"a"}) == 1.0);
}

TEST_CASE("BLEU brevity penalty and smoothing, computed by hand") {
  // Candidate "a b" vs reference "a b c d": p1 = 1, p2 = 1, orders 3-4 have
  // no candidate n-grams; BP = exp(1 - 4/2).
  CHECK(bleu({"a b"}, {"a b c d"}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // "a b c d" vs "a b x d": p1 = 3/4, p2 = 1/3, p3 = 0 -> 0 without smoothing.
  CHECK(bleu({"a b c d"}, {"a b x d"}) == 0.0);
  BleuOptions smooth;
  smooth.add_one_smoothing = true;
  const double expected = std::exp((std::log(3.0 / 4) + std::log(2.0 / 4) + std::log(1.0 / 3) +
                                    std::log(1.0 / 2)) /
                                   4.0);
  CHECK(bleu({"a b c d"}, {"a b x d"}, smooth) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("embedding distances") {
  Eigen::Vector3d u(1, 2, 3), v(4, 5, 6);
  CHECK(cosine_distance(u, v) ==
        doctest::Approx(1.0 - 32.0 / (std::sqrt(14.0) * std::sqrt(77.0))).epsilon(1e-12));
  // Between unit vectors: |a - b|^2 = 2 - 2 cos.
  CHECK(euclidean_distance(u, v) ==
        doctest::Approx(std::sqrt(2.0 * (1.0 - 32.0 / (std::sqrt(14.0) * std::sqrt(77.0))))));
  CHECK(euclidean_distance(u, 2.0 * u) == doctest::Approx(0.0));
  CHECK(cosine_distance(u, u) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine_distance(u, Eigen::Vector3d::Zero()), ZeroVector);
  // Fixed-size mismatches fail to compile; dynamic ones throw.
  CHECK_THROWS_AS(cosine_distance(Eigen::VectorXd(u), Eigen::VectorXd(Eigen::Vector2d(1, 2))), DimMismatch);

  EmbeddingMatrix en(2, 2), gold(2, 2), sys(2, 2);
  en << 1, 0, 0, 1;
  gold << 1, 0, 0, 1;
  sys << 0, 1, 1, 1;
  CHECK(bleu_like_metric(gold, gold) == doctest::Approx(0.0));
  const double d_sys = (1.0 + (1.0 - 1.0 / std::sqrt(2.0))) / 2.0;
  CHECK(bleu_like_metric(gold, sys) == doctest::Approx(d_sys));
  // Gold sits on the source, system does not: gold-minus-system is negative.
  CHECK(parallel_comparison(en, gold, sys) == doctest::Approx(-d_sys));
  CHECK_THROWS_AS(mean_paired_distance(en, EmbeddingMatrix(1, 2)), LengthMismatch);

  const auto stacked = stack_rows({Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4)});
  CHECK(stacked(1, 0) == 3.0);
}

TEST_CASE("mock embedder is deterministic and batches requests") {
  MockEmbeddingTransport m(32, 9);
  const auto a = embed(m, {"ядро клетки", "ядро клетки", "совсем другое", "x"}, 3);
  CHECK(m.requests() == 2);
  REQUIRE(a.size() == 4);
  CHECK(a[0].size() == 32);
  CHECK(a[0].isApprox(a[1]));
  CHECK(a[0].norm() == doctest::Approx(1.0));
  CHECK(cosine_distance(a[0], a[2]) > 0.1);
  MockEmbeddingTransport other_seed(32, 10);
  CHECK_FALSE(embed(other_seed, {"ядро клетки"})[0].isApprox(a[0]));
}

TEST_CASE("translation score report") {
  TranslationScores s;
  s.bleu = 0.50114;
  const std::string t = format_translation_table(s);
  CHECK(t.find("0.5011") != std::string::npos);
  CHECK(t.find("n/a") != std::string::npos);
  const Json j = translation_scores_to_json(s);
  CHECK(j["bleu_like"].is_null());
  CHECK(j["parallel_comparison_sign"] == "gold_minus_system");
}
