#include "mvlang/ranking.hpp"

#include <algorithm>
#include <cstdio>
#include <json.hpp>
#include <unordered_map>

namespace mvlang {

namespace {

// All languages != child, ranked by similarity (ties by code), with sizes.
std::vector<ExplainRow> ranked_table(const ViewMatrix& space,
                                     const std::vector<LanguageMeta>& meta,
                                     const RankingQuery& query) {
  space.validate();
  if (query.budget <= 0) fail(ErrorKind::InvalidArgument, "budget must be positive");
  if (query.min_candidate_size < 0) {
    fail(ErrorKind::InvalidArgument, "min_candidate_size must be nonnegative");
  }
  const Eigen::Index child_row = space.index_of(query.child);
  if (child_row < 0) {
    fail(ErrorKind::UnknownLanguage, "child '" + query.child + "' is not in the space");
  }
  std::unordered_map<std::string, std::int64_t> size_of;
  for (const auto& m : meta) size_of[m.code] = m.train_size;

  const double child_norm = space.data.row(child_row).norm();
  if (child_norm == 0.0) {
    fail(ErrorKind::DegenerateVector, "zero-norm vector for '" + query.child + "'");
  }

  std::vector<ExplainRow> rows;
  for (Eigen::Index i = 0; i < space.data.rows(); ++i) {
    if (i == child_row) continue;
    const std::string& code = space.languages[static_cast<std::size_t>(i)];
    auto it = size_of.find(code);
    if (it == size_of.end()) {
      fail(ErrorKind::MissingMetadata, "no training size for '" + code + "'");
    }
    const double norm = space.data.row(i).norm();
    if (norm == 0.0) fail(ErrorKind::DegenerateVector, "zero-norm vector for '" + code + "'");
    ExplainRow row;
    row.code = code;
    row.similarity = space.data.row(child_row).dot(space.data.row(i)) / (child_norm * norm);
    row.train_size = it->second;
    row.eligible = it->second >= query.min_candidate_size;
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const ExplainRow& a, const ExplainRow& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.code < b.code;
  });
  std::int64_t running = 0;
  for (auto& row : rows) {
    running += row.train_size;
    row.cumulative_size = running;
  }
  return rows;
}

}  // namespace

RankingResult rank(const ViewMatrix& space, const std::vector<LanguageMeta>& meta,
                   const RankingQuery& query) {
  const auto table = ranked_table(space, meta, query);

  RankingResult result;
  result.child = query.child;
  for (const auto& row : table) {
    if (!row.eligible) continue;
    if (query.max_k && static_cast<int>(result.candidates.size()) >= *query.max_k) break;
    result.candidates.push_back(RankedCandidate{row.code, row.similarity, row.train_size});
    result.accumulated_size += row.train_size;
    if (result.accumulated_size >= query.budget) break;
  }
  result.k = static_cast<int>(result.candidates.size());
  result.budget_unmet = result.accumulated_size < query.budget;
  return result;
}

std::vector<ExplainRow> explain(const ViewMatrix& space, const std::vector<LanguageMeta>& meta,
                                const RankingQuery& query) {
  return ranked_table(space, meta, query);
}

std::string ranking_to_json(const RankingResult& result) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : result.candidates) {
    candidates.push_back(
        {{"code", c.code}, {"similarity", c.similarity}, {"train_size", c.train_size}});
  }
  nlohmann::json j{{"schema_version", 1},
                   {"child", result.child},
                   {"candidates", candidates},
                   {"accumulated_size", result.accumulated_size},
                   {"k", result.k},
                   {"budget_unmet", result.budget_unmet}};
  return j.dump(2);
}

std::string explain_to_csv(const std::vector<ExplainRow>& rows) {
  std::string out = "code,similarity,train_size,cumulative_size,eligible\n";
  char buf[48];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.similarity);
    out += row.code + ',' + buf + ',' + std::to_string(row.train_size) + ',' +
           std::to_string(row.cumulative_size) + ',' + (row.eligible ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace mvlang
