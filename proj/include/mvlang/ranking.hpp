#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvlang/dataset.hpp"

namespace mvlang {

struct RankingQuery {
  std::string child;
  std::int64_t budget = 0;  // target accumulated training-sentence count
  std::int64_t min_candidate_size = 0;
  std::optional<int> max_k;
};

struct RankedCandidate {
  std::string code;
  double similarity = 0.0;
  std::int64_t train_size = 0;
};

struct RankingResult {
  std::string child;
  std::vector<RankedCandidate> candidates;  // similarity nonincreasing
  std::int64_t accumulated_size = 0;
  int k = 0;
  bool budget_unmet = false;
};

struct ExplainRow {
  std::string code;
  double similarity = 0.0;
  std::int64_t train_size = 0;
  std::int64_t cumulative_size = 0;
  bool eligible = true;  // passes the min-size filter
};

// Candidates are all languages in the space other than the child, filtered by
// min_candidate_size, sorted by cosine similarity to the child (ties by
// code). The result is the shortest prefix whose sizes reach the budget,
// capped at max_k; an unreachable budget returns every eligible candidate
// with budget_unmet set.
RankingResult rank(const ViewMatrix& space, const std::vector<LanguageMeta>& meta,
                   const RankingQuery& query);

// The full audit table: every language with similarity, size and running
// size total, in ranked order.
std::vector<ExplainRow> explain(const ViewMatrix& space, const std::vector<LanguageMeta>& meta,
                                const RankingQuery& query);

std::string ranking_to_json(const RankingResult& result);
std::string explain_to_csv(const std::vector<ExplainRow>& rows);

}  // namespace mvlang
