#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvlang/dataset.hpp"
#include "mvlang/phylo.hpp"

namespace mvlang {

struct SilhouetteCurve {
  std::vector<int> ks;         // 2..k_max
  std::vector<double> scores;  // mean silhouette per k
  int best_k = 0;              // argmax, smallest k on ties
};

// Per-sample silhouette s(i) = (b - a) / max(a, b), where a is the mean
// intra-cluster distance and b the smallest mean distance to another
// cluster; members of singleton clusters score 0 by convention.
std::vector<double> silhouette_samples(const DistanceMatrix& d, const std::vector<int>& labels);

double mean_silhouette(const DistanceMatrix& d, const std::vector<int>& labels);

SilhouetteCurve silhouette_curve(const DistanceMatrix& d, const std::vector<MergeStep>& steps,
                                 int k_max);

// Within-cluster mean pairwise distance per k, for plotting only.
std::vector<std::pair<int, double>> elbow_curve(const DistanceMatrix& d,
                                                const std::vector<MergeStep>& steps, int k_max);

/// Bootstrap stability of the silhouette-peak cluster count for one SVD
/// variance threshold across growing sample sizes.
struct StabilityReport {
  double threshold = 1.0;
  std::vector<int> sample_sizes;
  std::vector<double> clusters_mean;
  std::vector<std::pair<double, double>> clusters_ci;  // empirical 95% interval
  std::vector<double> clusters_sd;
  double variability = 0.0;  // mean over sizes of the per-size sd
  int replicates = 0;
};

struct SweepOptions {
  int replicates = 100;
  std::uint64_t seed = 1;
  double retention_cutoff = 0.5;  // used only when a partner view is given
  double ridge = 1e-8;
  Linkage linkage = Linkage::Average;
};

// For each threshold and sample size, draws bootstrap resamples of languages
// (deduplicated), reduces with SVD (SVCCA against `partner` when given),
// clusters, and records the silhouette-peak cluster count. Replicates run on
// independent seeded streams, so results do not depend on thread count.
std::vector<StabilityReport> stability_sweep(const ViewMatrix& view, const ViewMatrix* partner,
                                             const std::vector<double>& thresholds,
                                             const std::vector<int>& sizes,
                                             const SweepOptions& options = {});

// Index of the report with the least variability (smallest threshold on ties).
std::size_t most_stable(const std::vector<StabilityReport>& reports);

std::string stability_to_csv(const std::vector<StabilityReport>& reports);

}  // namespace mvlang
