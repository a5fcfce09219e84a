#include "mvlang/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "mvlang/svcca.hpp"
#include "parallel.hpp"

namespace mvlang {

namespace {

constexpr double kGridTol = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_k_range(int k_max, Eigen::Index n) {
  if (k_max < 2 || k_max > static_cast<int>(n) - 1) {
    fail(ErrorKind::InvalidK,
         "k_max must lie in [2, " + std::to_string(n - 1) + "], got " + std::to_string(k_max));
  }
}

}  // namespace

std::vector<double> silhouette_samples(const DistanceMatrix& d, const std::vector<int>& labels) {
  const Eigen::Index n = d.size();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    fail(ErrorKind::DimensionMismatch, "one label per language required");
  }
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> cluster_size(static_cast<std::size_t>(k), 0.0);
  for (int c : labels) cluster_size[static_cast<std::size_t>(c)] += 1.0;

  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  std::vector<double> mean_to(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[static_cast<std::size_t>(i)];
    if (cluster_size[static_cast<std::size_t>(own)] <= 1.0) continue;  // singleton: s = 0
    std::fill(mean_to.begin(), mean_to.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_to[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += d.d(i, j);
    }
    const double a = mean_to[static_cast<std::size_t>(own)] /
                     (cluster_size[static_cast<std::size_t>(own)] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || cluster_size[static_cast<std::size_t>(c)] == 0.0) continue;
      b = std::min(b, mean_to[static_cast<std::size_t>(c)] / cluster_size[static_cast<std::size_t>(c)]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0 && std::isfinite(b)) out[static_cast<std::size_t>(i)] = (b - a) / denom;
  }
  return out;
}

double mean_silhouette(const DistanceMatrix& d, const std::vector<int>& labels) {
  const auto samples = silhouette_samples(d, labels);
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

SilhouetteCurve silhouette_curve(const DistanceMatrix& d, const std::vector<MergeStep>& steps,
                                 int k_max) {
  check_k_range(k_max, d.size());
  SilhouetteCurve curve;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 2; k <= k_max; ++k) {
    const double score = mean_silhouette(d, cut(steps, k));
    curve.ks.push_back(k);
    curve.scores.push_back(score);
    if (score > best) {
      best = score;
      curve.best_k = k;
    }
  }
  return curve;
}

std::vector<std::pair<int, double>> elbow_curve(const DistanceMatrix& d,
                                                const std::vector<MergeStep>& steps, int k_max) {
  check_k_range(k_max, d.size());
  std::vector<std::pair<int, double>> out;
  for (int k = 2; k <= k_max; ++k) {
    const auto labels = cut(steps, k);
    double sum = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      for (Eigen::Index j = i + 1; j < d.size(); ++j) {
        if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
          sum += d.d(i, j);
          ++pairs;
        }
      }
    }
    out.emplace_back(k, pairs > 0 ? sum / static_cast<double>(pairs) : 0.0);
  }
  return out;
}

std::vector<StabilityReport> stability_sweep(const ViewMatrix& view, const ViewMatrix* partner,
                                             const std::vector<double>& thresholds,
                                             const std::vector<int>& sizes,
                                             const SweepOptions& options) {
  view.validate();
  if (thresholds.empty()) fail(ErrorKind::InvalidArgument, "no thresholds given");
  for (double t : thresholds) {
    const double steps_of_005 = (t - 0.5) / 0.05;
    if (t < 0.5 - kGridTol || t > 1.0 + kGridTol ||
        std::abs(steps_of_005 - std::round(steps_of_005)) > kGridTol) {
      fail(ErrorKind::InvalidArgument,
           "thresholds must lie on the 0.05 grid in [0.5, 1.0]; got " + std::to_string(t));
    }
  }
  if (options.replicates < 10) fail(ErrorKind::InvalidArgument, "need at least 10 replicates");
  if (!std::is_sorted(sizes.begin(), sizes.end()) ||
      std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    fail(ErrorKind::InvalidArgument, "sample sizes must be strictly increasing");
  }

  // With a partner view the sweep runs over the common languages and uses
  // the swept view's side of the fused space.
  std::optional<AlignedViews> aligned;
  const std::vector<std::string>* pool = &view.languages;
  if (partner) {
    aligned = align(view, *partner);
    pool = &aligned->common;
  }
  const int n_pool = static_cast<int>(pool->size());
  for (int s : sizes) {
    if (s > n_pool) {
      fail(ErrorKind::InvalidSampleSize, "sample size " + std::to_string(s) + " exceeds the " +
                                             std::to_string(n_pool) + " available languages");
    }
    if (s < 4) fail(ErrorKind::InvalidSampleSize, "sample size must be at least 4");
  }

  std::vector<StabilityReport> reports;
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    StabilityReport report;
    report.threshold = thresholds[ti];
    report.replicates = options.replicates;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
      std::vector<int> peaks(static_cast<std::size_t>(options.replicates), 0);
      detail::parallel_for(options.replicates, [&](int r) {
        // Per-replicate stream; identical regardless of scheduling.
        std::uint64_t mixed = options.seed;
        mixed = splitmix64(mixed ^ (0x1000003ULL * (ti + 1)));
        mixed = splitmix64(mixed ^ (0x10000019ULL * (si + 1)));
        mixed = splitmix64(mixed ^ static_cast<std::uint64_t>(r));
        std::mt19937_64 rng(mixed);
        std::uniform_int_distribution<int> pick(0, n_pool - 1);

        std::set<int> unique;
        for (int draw = 0; draw < sizes[si]; ++draw) unique.insert(pick(rng));
        while (static_cast<int>(unique.size()) < 4) unique.insert(pick(rng));
        std::vector<Eigen::Index> rows(unique.begin(), unique.end());

        Matrix reduced;
        if (partner) {
          AlignedViews sub;
          sub.x.name = aligned->x.name;
          sub.y.name = aligned->y.name;
          for (Eigen::Index i : rows) sub.common.push_back((*pool)[static_cast<std::size_t>(i)]);
          sub.x.languages = sub.common;
          sub.y.languages = sub.common;
          sub.x.data.resize(static_cast<Eigen::Index>(rows.size()), aligned->x.data.cols());
          sub.y.data.resize(static_cast<Eigen::Index>(rows.size()), aligned->y.data.cols());
          for (std::size_t i = 0; i < rows.size(); ++i) {
            sub.x.data.row(static_cast<Eigen::Index>(i)) = aligned->x.data.row(rows[i]);
            sub.y.data.row(static_cast<Eigen::Index>(i)) = aligned->y.data.row(rows[i]);
          }
          SvccaOptions svcca_options;
          svcca_options.retention_cutoff = options.retention_cutoff;
          svcca_options.ridge = options.ridge;
          const SvccaModel model =
              fit_svcca(sub, thresholds[ti], thresholds[ti], svcca_options);
          reduced = project(model, sub.x.data, ViewSide::X);
        } else {
          Matrix sub(static_cast<Eigen::Index>(rows.size()), view.data.cols());
          for (std::size_t i = 0; i < rows.size(); ++i) {
            sub.row(static_cast<Eigen::Index>(i)) = view.data.row(rows[i]);
          }
          const SvdTransform svd = fit_svd(sub, thresholds[ti]);
          reduced = transform_svd(svd, sub);
        }

        ViewMatrix reduced_view;
        reduced_view.name = view.name;
        for (Eigen::Index i : rows) {
          reduced_view.languages.push_back((*pool)[static_cast<std::size_t>(i)]);
        }
        reduced_view.data = reduced;
        const DistanceMatrix d = cosine_distance_matrix(reduced_view);
        const auto steps = agglomerate(d, options.linkage);
        const auto curve = silhouette_curve(d, steps, static_cast<int>(rows.size()) - 1);
        peaks[static_cast<std::size_t>(r)] = curve.best_k;
      });

      std::vector<int> sorted_peaks = peaks;
      std::sort(sorted_peaks.begin(), sorted_peaks.end());
      const double mean = std::accumulate(peaks.begin(), peaks.end(), 0.0) /
                          static_cast<double>(peaks.size());
      double var = 0.0;
      for (int p : peaks) var += (p - mean) * (p - mean);
      var /= static_cast<double>(peaks.size() - 1);
      const std::size_t last = sorted_peaks.size() - 1;
      const auto lo = sorted_peaks[static_cast<std::size_t>(std::floor(0.025 * static_cast<double>(last)))];
      const auto hi = sorted_peaks[static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(last)))];

      report.sample_sizes.push_back(sizes[si]);
      report.clusters_mean.push_back(mean);
      report.clusters_ci.emplace_back(lo, hi);
      report.clusters_sd.push_back(std::sqrt(var));
    }
    report.variability =
        std::accumulate(report.clusters_sd.begin(), report.clusters_sd.end(), 0.0) /
        static_cast<double>(report.clusters_sd.size());
    reports.push_back(std::move(report));
  }
  return reports;
}

std::size_t most_stable(const std::vector<StabilityReport>& reports) {
  if (reports.empty()) fail(ErrorKind::InvalidArgument, "no reports to compare");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const bool better = reports[i].variability < reports[best].variability ||
                        (reports[i].variability == reports[best].variability &&
                         reports[i].threshold < reports[best].threshold);
    if (better) best = i;
  }
  return best;
}

std::string stability_to_csv(const std::vector<StabilityReport>& reports) {
  std::string out = "threshold,size,mean_k,ci_low,ci_high,sd\n";
  char buf[160];
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.sample_sizes.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", r.threshold,
                    r.sample_sizes[i], r.clusters_mean[i], r.clusters_ci[i].first,
                    r.clusters_ci[i].second, r.clusters_sd[i]);
      out += buf;
    }
  }
  return out;
}

}  // namespace mvlang
