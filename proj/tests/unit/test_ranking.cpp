#include <doctest.h>

#include <random>

#include "mvlang/ranking.hpp"
#include "testutil.hpp"

using namespace mvlang;
using testutil::check_kind;

namespace {

struct Scenario {
  ViewMatrix space;
  std::vector<LanguageMeta> meta;
};

Scenario random_scenario(std::mt19937_64& rng, int n, int dim) {
  Scenario s;
  s.space = testutil::make_view("space", testutil::random_matrix(rng, n, dim));
  std::uniform_int_distribution<std::int64_t> size_dist(0, 250000);
  for (const auto& code : s.space.languages) {
    s.meta.push_back(LanguageMeta{code, "fam", "", size_dist(rng)});
  }
  return s;
}

Scenario uniform_sizes(int n, std::int64_t size) {
  std::mt19937_64 rng(7);
  Scenario s = random_scenario(rng, n, 4);
  for (auto& m : s.meta) m.train_size = size;
  return s;
}

}  // namespace

TEST_CASE("a tiny budget selects exactly one candidate") {
  auto s = uniform_sizes(6, 100);
  RankingQuery q;
  q.child = s.space.languages[0];
  q.budget = 1;
  const auto result = rank(s.space, s.meta, q);
  CHECK(result.k == 1);
  CHECK(result.accumulated_size == 100);
  CHECK_FALSE(result.budget_unmet);
}

TEST_CASE("uniform candidate sizes make the prefix arithmetic exact") {
  auto s = uniform_sizes(8, 100);
  RankingQuery q;
  q.child = s.space.languages[2];
  q.budget = 450;
  const auto result = rank(s.space, s.meta, q);
  CHECK(result.k == 5);
  CHECK(result.accumulated_size == 500);
}

TEST_CASE("rank rejects unknown children and missing metadata") {
  auto s = uniform_sizes(5, 10);
  RankingQuery q;
  q.child = "zzz";
  q.budget = 5;
  check_kind(ErrorKind::UnknownLanguage, [&] { rank(s.space, s.meta, q); });

  q.child = s.space.languages[0];
  auto missing = s.meta;
  missing.pop_back();
  check_kind(ErrorKind::MissingMetadata, [&] { rank(s.space, missing, q); });

  q.budget = 0;
  check_kind(ErrorKind::InvalidArgument, [&] { rank(s.space, s.meta, q); });
}

TEST_CASE("explain is the sorted audit table behind rank") {
  std::mt19937_64 rng(17);
  auto s = random_scenario(rng, 10, 5);
  RankingQuery q;
  q.child = s.space.languages[4];
  q.budget = 100000;

  const auto table = explain(s.space, s.meta, q);
  CHECK(table.size() == 9);
  std::int64_t running = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i > 0) CHECK(table[i].similarity <= table[i - 1].similarity);
    CHECK(table[i].code != q.child);
    running += table[i].train_size;
    CHECK(table[i].cumulative_size == running);
  }

  const auto result = rank(s.space, s.meta, q);
  REQUIRE(result.k >= 1);
  CHECK(result.candidates[0].code == table[0].code);
  CHECK(result.candidates[0].similarity == table[0].similarity);
}

TEST_CASE("rank candidates are a prefix of the filtered explain table") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 1000; ++rep) {
    auto s = random_scenario(rng, 3 + static_cast<int>(rng() % 10), 3);
    RankingQuery q;
    q.child = s.space.languages[rng() % s.space.languages.size()];
    q.budget = 1 + static_cast<std::int64_t>(rng() % 800000);
    q.min_candidate_size = static_cast<std::int64_t>(rng() % 150000);
    if (rng() % 3 == 0) q.max_k = 1 + static_cast<int>(rng() % 5);

    const auto result = rank(s.space, s.meta, q);
    const auto table = explain(s.space, s.meta, q);

    std::vector<ExplainRow> eligible;
    for (const auto& row : table) {
      if (row.eligible) eligible.push_back(row);
    }
    REQUIRE(result.candidates.size() <= eligible.size());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
      CHECK(result.candidates[i].code == eligible[i].code);  // prefix property
      CHECK(result.candidates[i].train_size >= q.min_candidate_size);
      total += result.candidates[i].train_size;
      if (i > 0) CHECK(result.candidates[i].similarity <= result.candidates[i - 1].similarity);
    }
    CHECK(total == result.accumulated_size);
    CHECK(result.k == static_cast<int>(result.candidates.size()));

    const bool capped = q.max_k && result.k == *q.max_k;
    if (result.budget_unmet) {
      CHECK(result.accumulated_size < q.budget);
      // unreachable budget returns everything eligible (unless capped)
      if (!capped) CHECK(result.candidates.size() == eligible.size());
    } else {
      CHECK(result.accumulated_size >= q.budget);
      // shortest prefix: dropping the last candidate goes under budget
      if (!result.candidates.empty()) {
        CHECK(result.accumulated_size - result.candidates.back().train_size < q.budget);
      }
    }
  }
}

TEST_CASE("increasing the budget never removes a selected candidate") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 300; ++rep) {
    auto s = random_scenario(rng, 4 + static_cast<int>(rng() % 8), 3);
    RankingQuery q;
    q.child = s.space.languages[rng() % s.space.languages.size()];
    q.budget = 1 + static_cast<std::int64_t>(rng() % 300000);
    const auto small = rank(s.space, s.meta, q);
    RankingQuery bigger = q;
    bigger.budget = q.budget + 1 + static_cast<std::int64_t>(rng() % 300000);
    const auto large = rank(s.space, s.meta, bigger);
    REQUIRE(large.candidates.size() >= small.candidates.size());
    for (std::size_t i = 0; i < small.candidates.size(); ++i) {
      CHECK(small.candidates[i].code == large.candidates[i].code);
    }
  }
}

TEST_CASE("min_candidate_size zero is a no-op filter") {
  std::mt19937_64 rng(31);
  auto s = random_scenario(rng, 8, 4);
  RankingQuery q;
  q.child = s.space.languages[0];
  q.budget = 1;
  q.min_candidate_size = 0;
  const auto table = explain(s.space, s.meta, q);
  for (const auto& row : table) CHECK(row.eligible);
}

TEST_CASE("max_k caps the candidate list") {
  auto s = uniform_sizes(9, 10);
  RankingQuery q;
  q.child = s.space.languages[0];
  q.budget = 1000;  // would need 100 candidates
  q.max_k = 3;
  const auto result = rank(s.space, s.meta, q);
  CHECK(result.k == 3);
  CHECK(result.budget_unmet);
}
