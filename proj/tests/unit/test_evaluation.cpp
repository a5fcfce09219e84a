#include <doctest.h>

#include <random>

#include "mvlang/evaluation.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mvlang;
using testutil::check_kind;

namespace {

// Inputs with one margin-separated coordinate per feature: feature j is the
// sign of coordinate j, pushed 0.35 away from zero, plus a fixed number of
// flipped labels. The rule is linearly decodable up to the label noise.
struct LinearInstance {
  ViewMatrix inputs;
  TypologyDataset targets;
};

LinearInstance linear_threshold_instance(int n, int n_features, int flips, std::mt19937_64& rng) {
  LinearInstance out;
  Matrix x = testutil::random_matrix(rng, n, n_features);
  out.targets.view.name = "targets";
  out.targets.view.languages = testutil::codes(n);
  out.targets.view.data.resize(n, n_features);
  for (int f = 0; f < n_features; ++f) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool positive = x(i, f) >= 0.0;
      out.targets.view.data(i, f) = positive ? 1.0 : 0.0;
      x(i, f) += positive ? 0.35 : -0.35;
    }
    for (int flip = 0; flip < flips; ++flip) {
      const Eigen::Index at = static_cast<Eigen::Index>(rng() % n);
      out.targets.view.data(at, f) = 1.0 - out.targets.view.data(at, f);
    }
    out.targets.view.feature_names.push_back("f" + std::to_string(f));
  }
  out.inputs = testutil::make_view("inputs", x);
  for (const auto& code : out.targets.view.languages) {
    out.targets.meta.push_back(LanguageMeta{code, "fam" + std::to_string(code.back() % 3), "", 0});
  }
  return out;
}

}  // namespace

TEST_CASE("logistic regression separates a linear rule") {
  std::mt19937_64 rng(301);
  const Matrix x = testutil::random_matrix(rng, 40, 3);
  Vector y(40);
  for (int i = 0; i < 40; ++i) y(i) = x(i, 0) + 0.5 * x(i, 1) > 0 ? 1.0 : 0.0;
  const auto model = LogisticRegression::fit(x, y);
  const auto predicted = model.predict(x);
  int correct = 0;
  for (int i = 0; i < 40; ++i) {
    if (predicted[static_cast<std::size_t>(i)] == static_cast<int>(y(i))) ++correct;
  }
  CHECK(correct >= 38);
}

TEST_CASE("features predict themselves almost perfectly") {
  std::mt19937_64 rng(307);
  TypologyDataset targets;
  targets.view.name = "t";
  targets.view.languages = testutil::codes(40);
  targets.view.data.resize(40, 6);
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) targets.view.data(i, j) = (rng() % 2) ? 1.0 : 0.0;
  }
  for (const auto& code : targets.view.languages) {
    targets.meta.push_back(LanguageMeta{code, "fam", "", 0});
  }
  ViewMatrix inputs = targets.view;

  const auto report = predict_features(inputs, targets, Protocol::OneLanguageOut);
  CHECK(report.macro_accuracy >= 0.99);
  CHECK(report.fold_count == 40);
}

TEST_CASE("linearly decodable features with label noise stay above 0.95") {
  std::mt19937_64 rng(311);
  const auto instance = linear_threshold_instance(60, 6, 1, rng);  // ~2% of 60 labels flipped

  const auto report = predict_features(instance.inputs, instance.targets, Protocol::OneLanguageOut);
  CHECK(report.macro_accuracy >= 0.95);
  CHECK(report.fold_count == 60);

  const auto family_report =
      predict_features(instance.inputs, instance.targets, Protocol::OneFamilyOut);
  CHECK(family_report.fold_count == 3);  // fam0, fam1, fam2
}

TEST_CASE("single-class training folds are skipped and recorded") {
  std::mt19937_64 rng(313);
  const Matrix inputs = testutil::random_matrix(rng, 8, 3);
  TypologyDataset targets;
  targets.view.name = "t";
  targets.view.languages = testutil::codes(8);
  targets.view.data = Matrix::Zero(8, 2);
  targets.view.data(0, 0) = 1.0;  // feature 0: only language 0 is positive
  for (Eigen::Index i = 0; i < 8; ++i) targets.view.data(i, 1) = static_cast<double>(i % 2);
  targets.view.feature_names = {"lonely", "balanced"};

  const auto report =
      predict_features(testutil::make_view("in", inputs), targets, Protocol::OneLanguageOut);
  // leaving language 0 out makes "lonely" single-class in training
  bool found = false;
  for (const auto& s : report.skipped) {
    if (s.feature == "lonely" && s.fold == "aaa") found = true;
  }
  CHECK(found);
  CHECK(report.per_feature_accuracy.count("balanced") == 1);
}

TEST_CASE("prediction rejects misaligned inputs and non-binary targets") {
  std::mt19937_64 rng(317);
  TypologyDataset targets;
  targets.view = testutil::make_view("t", Matrix::Zero(5, 2));
  auto inputs = testutil::make_view("in", testutil::random_matrix(rng, 6, 2));
  check_kind(ErrorKind::DimensionMismatch,
             [&] { predict_features(inputs, targets, Protocol::OneLanguageOut); });

  auto bad = targets;
  bad.view.data(0, 0) = 0.5;
  auto aligned_inputs = testutil::make_view("in", testutil::random_matrix(rng, 5, 2));
  check_kind(ErrorKind::MalformedInput,
             [&] { predict_features(aligned_inputs, bad, Protocol::OneLanguageOut); });

  check_kind(ErrorKind::MissingMetadata,
             [&] { predict_features(aligned_inputs, targets, Protocol::OneFamilyOut); });
}

TEST_CASE("prediction reports are deterministic") {
  std::mt19937_64 rng(331);
  const auto instance = linear_threshold_instance(25, 4, 1, rng);
  const auto a = predict_features(instance.inputs, instance.targets, Protocol::OneLanguageOut);
  const auto b = predict_features(instance.inputs, instance.targets, Protocol::OneLanguageOut);
  CHECK(a.macro_accuracy == b.macro_accuracy);
  CHECK(a.per_feature_accuracy == b.per_feature_accuracy);
}

TEST_CASE("spearman handles monotone transforms and reversals") {
  std::mt19937_64 rng(337);
  const auto d1 = testutil::random_distance(rng, 6);
  DistanceMatrix doubled = d1;
  doubled.d *= 2.0;
  CHECK(spearman(d1, doubled).rho == doctest::Approx(1.0));

  DistanceMatrix reversed = d1;
  const double top = d1.d.maxCoeff() + 0.5;
  for (Eigen::Index i = 0; i < reversed.d.rows(); ++i) {
    for (Eigen::Index j = 0; j < reversed.d.cols(); ++j) {
      if (i != j) reversed.d(i, j) = top - d1.d(i, j);
    }
  }
  CHECK(spearman(d1, reversed).rho == doctest::Approx(-1.0));
  CHECK(spearman(d1, d1).rho == doctest::Approx(1.0));
}

TEST_CASE("spearman equals rank-then-pearson on random matrices") {
  std::mt19937_64 rng(347);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d1 = testutil::random_distance(rng, 10);
    const auto d2 = testutil::random_distance(rng, 10);
    const auto got = spearman(d1, d2);
    std::vector<double> v1, v2;
    for (int i = 0; i < 10; ++i) {
      for (int j = i + 1; j < 10; ++j) {
        v1.push_back(d1.d(i, j));
        v2.push_back(d2.d(i, j));
      }
    }
    CHECK(got.rho == doctest::Approx(oracles::spearman_rho(v1, v2)).epsilon(1e-12));
    CHECK(got.n_pairs == 45);
    const auto flipped = spearman(d2, d1);
    CHECK(flipped.rho == doctest::Approx(got.rho));
  }
}

TEST_CASE("spearman agrees with frozen reference values") {
  // reference rho and p computed with an independent statistics stack
  const std::vector<double> v1{17, 86, 60, 77, 47, 3, 70, 87, 88, 92};
  const std::vector<double> v2{70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
  const auto r = spearman_vectors(v1, v2);
  CHECK(r.rho == doctest::Approx(-0.16363636363636364).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(0.6514773427962428).epsilon(1e-9));

  const std::vector<double> tied{17, 86, 60, 77, 47, 3, 70, 47, 88, 92};
  const auto rt = spearman_vectors(tied, v2);
  CHECK(rt.rho == doctest::Approx(0.024316221747202587).epsilon(1e-12));
  CHECK(rt.p_value == doctest::Approx(0.9468397049085097).epsilon(1e-9));
}

TEST_CASE("spearman input contracts") {
  std::mt19937_64 rng(349);
  const auto d1 = testutil::random_distance(rng, 3);
  check_kind(ErrorKind::TooFewSamples, [&] { spearman(d1, d1); });

  auto d4 = testutil::random_distance(rng, 5);
  DistanceMatrix constant = d4;
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) constant.d(i, j) = i == j ? 0.0 : 1.0;
  }
  check_kind(ErrorKind::UndefinedCorrelation, [&] { spearman(d4, constant); });

  DistanceMatrix other = testutil::random_distance(rng, 5);
  other.languages[0] = "zzz";
  check_kind(ErrorKind::DimensionMismatch, [&] { spearman(d4, other); });
}

TEST_CASE("spearman reorders mismatched language order") {
  std::mt19937_64 rng(353);
  const auto d1 = testutil::random_distance(rng, 5);
  DistanceMatrix permuted;
  const std::vector<int> perm{4, 2, 0, 3, 1};
  permuted.languages.resize(5);
  permuted.d.setZero(5, 5);
  for (int i = 0; i < 5; ++i) {
    permuted.languages[static_cast<std::size_t>(i)] =
        d1.languages[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    for (int j = 0; j < 5; ++j) {
      permuted.d(i, j) = d1.d(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
  }
  CHECK(spearman(d1, permuted).rho == doctest::Approx(1.0));
}
