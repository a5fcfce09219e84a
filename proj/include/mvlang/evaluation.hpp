#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvlang/dataset.hpp"

namespace mvlang {

enum class Protocol { OneLanguageOut, OneFamilyOut };

Protocol protocol_from_string(const std::string& name);
const char* to_string(Protocol protocol) noexcept;

/// Binary typological targets plus the family metadata needed for the
/// one-family-out protocol.
struct TypologyDataset {
  ViewMatrix view;  // values in {0, 1}
  std::vector<LanguageMeta> meta;
};

struct SkippedCell {
  std::string fold;     // held-out language code or family name
  std::string feature;  // feature column name
};

struct PredictionReport {
  Protocol protocol = Protocol::OneLanguageOut;
  std::map<std::string, double> per_feature_accuracy;
  double macro_accuracy = 0.0;
  int fold_count = 0;
  std::vector<SkippedCell> skipped;
};

/// L2-regularized logistic regression fitted by Newton iterations.
/// Deterministic: zero initialization, fixed iteration cap and tolerance.
struct LogisticRegression {
  Vector weights;
  double bias = 0.0;
  double l2 = 1.0;

  static LogisticRegression fit(const Matrix& x, const Vector& y01, double l2 = 1.0);
  Vector predict_probability(const Matrix& x) const;
  // probability >= 0.5 -> 1
  std::vector<int> predict(const Matrix& x) const;
};

// Held-out typological feature prediction: one fold per language (or family),
// one classifier per binary feature, trained on the remaining languages.
// Folds whose training labels are single-class are skipped and recorded.
PredictionReport predict_features(const ViewMatrix& inputs, const TypologyDataset& targets,
                                  Protocol protocol);

// Spearman rank correlation over the strict upper triangles of two distance
// matrices on the same language set. Average ranks for ties; p-value from the
// t-distribution approximation.
struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  Eigen::Index n_pairs = 0;
};

SpearmanResult spearman(const DistanceMatrix& d1, const DistanceMatrix& d2);

// Spearman rho of two plain vectors (the matrix version reduces to this).
SpearmanResult spearman_vectors(const std::vector<double>& a, const std::vector<double>& b);

std::string report_to_json(const PredictionReport& report);
std::string report_to_csv(const PredictionReport& report);

}  // namespace mvlang
