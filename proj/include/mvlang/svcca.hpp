#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvlang/dataset.hpp"

namespace mvlang {

/// Centered (optionally standardized) truncated SVD of one view.
/// components has orthonormal columns; k is the smallest rank whose
/// cumulative explained variance ratio reaches variance_threshold.
struct SvdTransform {
  Vector mean;             // d
  Vector scale;            // d; all ones unless standardized
  Matrix components;       // d x k
  Vector singular_values;  // k, nonincreasing, positive
  double variance_threshold = 1.0;
  double explained_ratio = 1.0;

  Eigen::Index in_dim() const noexcept { return mean.size(); }
  Eigen::Index rank() const noexcept { return components.cols(); }
};

struct CcaTransform {
  Matrix proj_x;  // k_x x m, canonical directions as columns
  Matrix proj_y;  // k_y x m
  Vector correlations;         // m, nonincreasing, in [0, 1]
  std::vector<bool> retained;  // retained[j] <=> correlations[j] >= retention_cutoff
  double retention_cutoff = 0.5;

  Eigen::Index n_directions() const noexcept { return correlations.size(); }
  int n_retained() const noexcept;
};

enum class ViewSide { X, Y };

/// Fitted two-view fusion: per-view SVD transforms composed with CCA
/// projections, restricted to the retained (well-correlated) directions.
struct SvccaModel {
  SvdTransform svd_x;
  SvdTransform svd_y;
  CcaTransform cca;
  int shared_dim = 0;
  std::vector<std::string> train_languages;
  std::array<std::string, 2> view_names;
};

struct SvccaOptions {
  double retention_cutoff = 0.5;
  double ridge = 1e-8;
  bool standardize = false;  // center only by default
};

// threshold in [0.5, 1.0]; 1.0 keeps every positive singular value, which
// makes the transform a lossless rotation (CCA then sees the full view).
SvdTransform fit_svd(const Matrix& m, double threshold, bool standardize = false);

// (rows - mean) * components, width k.
Matrix transform_svd(const SvdTransform& t, const Matrix& rows);

// Canonical correlation via whitening + SVD of the whitened cross-covariance.
// ridge is added to both covariance diagonals before whitening.
CcaTransform fit_cca(const Matrix& x, const Matrix& y, double retention_cutoff = 0.5,
                     double ridge = 1e-8);

SvccaModel fit_svcca(const AlignedViews& av, double threshold_x, double threshold_y,
                     const SvccaOptions& options = {});

// Projects raw rows from one view into the shared space (width shared_dim).
Matrix project(const SvccaModel& model, const Matrix& rows, ViewSide side);

// Convenience wrapper keeping language codes attached.
ViewMatrix project_view(const SvccaModel& model, const ViewMatrix& view, ViewSide side);

// Row-wise concatenation of two aligned views (the baseline fusion).
ViewMatrix concat_views(const AlignedViews& av);

// JSON round trip with full numeric fidelity.
void save_model(const SvccaModel& model, const std::filesystem::path& path);
std::string model_to_json(const SvccaModel& model);
SvccaModel load_model(const std::filesystem::path& path);
SvccaModel model_from_json(const std::string& text);

}  // namespace mvlang
