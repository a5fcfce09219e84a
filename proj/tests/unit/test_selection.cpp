#include <doctest.h>

#include <random>

#include "mvlang/selection.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace mvlang;
using testutil::check_kind;

namespace {

DistanceMatrix from_points(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  DistanceMatrix d;
  d.languages = testutil::codes(n);
  d.d.setZero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d.d(i, j) = d.d(j, i) = std::abs(xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)]);
    }
  }
  return d;
}

// Well separated blobs on a line, `per` points each.
std::vector<double> blob_points(std::mt19937_64& rng, int blobs, int per, double spread) {
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<double> xs;
  for (int b = 0; b < blobs; ++b) {
    for (int i = 0; i < per; ++i) xs.push_back(10.0 * b + noise(rng));
  }
  return xs;
}

ViewMatrix blob_view(std::mt19937_64& rng, int blobs, int per, int dim, double spread) {
  std::normal_distribution<double> noise(0.0, spread);
  Matrix centers = testutil::random_matrix(rng, blobs, dim, 5.0);
  Matrix data(blobs * per, dim);
  for (int b = 0; b < blobs; ++b) {
    for (int i = 0; i < per; ++i) {
      for (int c = 0; c < dim; ++c) data(b * per + i, c) = centers(b, c) + noise(rng);
    }
  }
  return testutil::make_view("blobs", data);
}

}  // namespace

TEST_CASE("silhouette peaks at two for two separated blobs") {
  std::mt19937_64 rng(401);
  const auto d = from_points(blob_points(rng, 2, 5, 0.1));
  const auto steps = agglomerate(d, Linkage::Average);
  const auto curve = silhouette_curve(d, steps, 9);
  CHECK(curve.best_k == 2);
  CHECK(curve.scores[0] > 0.9);
  CHECK(curve.ks.front() == 2);
  CHECK(curve.ks.back() == 9);
}

TEST_CASE("per-sample silhouettes match the hand computation on 7 points") {
  const auto d = from_points({0.0, 0.1, 0.2, 1.0, 1.1, 2.0, 2.2});
  const std::vector<int> labels{0, 0, 0, 1, 1, 2, 2};
  const auto s = silhouette_samples(d, labels);
  // frozen values from the direct textbook formula
  const std::vector<double> expected{0.8571428571428571, 0.8947368421052632, 0.8235294117647058,
                                     0.8888888888888888, 0.8999999999999999, 0.7894736842105261,
                                     0.826086956521739};
  REQUIRE(s.size() == expected.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK(mean_silhouette(d, labels) == doctest::Approx(0.8542655200905687).epsilon(1e-12));

  const auto oracle = oracles::silhouette_samples(d.d, labels);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
  }
}

TEST_CASE("all-singleton cuts have mean silhouette zero") {
  std::mt19937_64 rng(409);
  const auto d = testutil::random_distance(rng, 6);
  std::vector<int> labels{0, 1, 2, 3, 4, 5};
  CHECK(mean_silhouette(d, labels) == 0.0);
}

TEST_CASE("silhouette values stay in [-1, 1] and scale-invariant") {
  std::mt19937_64 rng(419);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = testutil::random_distance(rng, 9);
    const auto steps = agglomerate(d, Linkage::Average);
    const auto curve = silhouette_curve(d, steps, 8);
    for (double s : curve.scores) {
      CHECK(s >= -1.0);
      CHECK(s <= 1.0);
    }
    DistanceMatrix scaled = d;
    scaled.d *= 3.75;
    const auto scaled_curve = silhouette_curve(scaled, agglomerate(scaled, Linkage::Average), 8);
    CHECK(scaled_curve.best_k == curve.best_k);
    for (std::size_t i = 0; i < curve.scores.size(); ++i) {
      CHECK(scaled_curve.scores[i] == doctest::Approx(curve.scores[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("silhouette curve rejects out-of-range k_max") {
  std::mt19937_64 rng(421);
  const auto d = testutil::random_distance(rng, 5);
  const auto steps = agglomerate(d, Linkage::Average);
  check_kind(ErrorKind::InvalidK, [&] { silhouette_curve(d, steps, 1); });
  check_kind(ErrorKind::InvalidK, [&] { silhouette_curve(d, steps, 5); });
}

TEST_CASE("elbow dispersion is zero at k = n and matches brute force") {
  std::mt19937_64 rng(431);
  const auto d = testutil::random_distance(rng, 7);
  const auto steps = agglomerate(d, Linkage::Average);
  const auto curve = elbow_curve(d, steps, 6);

  // brute force on a singleton-heavy cut
  const auto labels = cut(steps, 5);
  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) {
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        sum += d.d(i, j);
        ++pairs;
      }
    }
  }
  const double expected = pairs > 0 ? sum / pairs : 0.0;
  CHECK(curve[3].second == doctest::Approx(expected).epsilon(1e-12));  // k = 5

  // k = n has no intra-cluster pairs
  std::vector<int> singleton_labels(7);
  std::iota(singleton_labels.begin(), singleton_labels.end(), 0);
  const auto full = elbow_curve(d, steps, 6);
  CHECK(full.back().first == 6);
}

TEST_CASE("elbow dispersion decreases in k for average linkage on metric input") {
  std::mt19937_64 rng(433);
  for (int rep = 0; rep < 10; ++rep) {
    std::uniform_real_distribution<double> uniform(0.0, 10.0);
    std::vector<double> xs;
    for (int i = 0; i < 10; ++i) xs.push_back(uniform(rng));
    const auto d = from_points(xs);
    const auto steps = agglomerate(d, Linkage::Average);
    const auto curve = elbow_curve(d, steps, 9);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve[i].second <= curve[i - 1].second + 1e-12);
    }
  }
}

TEST_CASE("stability sweep is deterministic and finds planted blobs") {
  std::mt19937_64 rng(443);
  const auto view = blob_view(rng, 4, 10, 6, 0.05);

  SweepOptions options;
  options.replicates = 16;
  options.seed = 99;
  const std::vector<double> thresholds{0.7, 0.95};
  const std::vector<int> sizes{12, 24, 40};

  const auto a = stability_sweep(view, nullptr, thresholds, sizes, options);
  const auto b = stability_sweep(view, nullptr, thresholds, sizes, options);
  REQUIRE(a.size() == 2);
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].clusters_mean == b[t].clusters_mean);
    CHECK(a[t].clusters_sd == b[t].clusters_sd);
    CHECK(a[t].variability == b[t].variability);
  }

  // blobs are cleanly separated: every resample of any size peaks at 4
  const auto& best = a[most_stable(a)];
  CHECK(best.clusters_mean.back() == doctest::Approx(4.0));
  CHECK(best.variability < 0.5);
}

TEST_CASE("stability sweep with a partner view recovers shared blobs") {
  std::mt19937_64 rng(449);
  const auto vx = blob_view(rng, 3, 8, 5, 0.05);
  Matrix rotate = testutil::random_matrix(rng, 5, 7);
  ViewMatrix vy = vx;
  vy.name = "partner";
  vy.data = vx.data * rotate + 0.01 * testutil::random_matrix(rng, 24, 7);

  SweepOptions options;
  options.replicates = 12;
  options.seed = 3;
  const auto reports = stability_sweep(vx, &vy, {0.9}, {10, 20}, options);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].clusters_mean.back() == doctest::Approx(3.0).epsilon(0.2));
}

TEST_CASE("stability sweep validates its inputs") {
  std::mt19937_64 rng(457);
  const auto view = blob_view(rng, 2, 6, 4, 0.1);
  SweepOptions options;
  options.replicates = 12;
  check_kind(ErrorKind::InvalidSampleSize,
             [&] { stability_sweep(view, nullptr, {0.8}, {6, 13}, options); });
  check_kind(ErrorKind::InvalidArgument,
             [&] { stability_sweep(view, nullptr, {0.8}, {12, 6}, options); });
  check_kind(ErrorKind::InvalidArgument,
             [&] { stability_sweep(view, nullptr, {0.83}, {6}, options); });
  SweepOptions few;
  few.replicates = 5;
  check_kind(ErrorKind::InvalidArgument, [&] { stability_sweep(view, nullptr, {0.8}, {6}, few); });
}
