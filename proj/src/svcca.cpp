#include "mvlang/svcca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>

namespace mvlang {

namespace {

using nlohmann::json;

constexpr double kRelRankTol = 1e-12;

void check_threshold(double threshold) {
  if (!(threshold >= 0.5 && threshold <= 1.0)) {
    fail(ErrorKind::InvalidArgument,
         "variance threshold must lie in [0.5, 1.0], got " + std::to_string(threshold));
  }
}

// Fixes the sign of each column so its largest-magnitude entry is positive;
// `follower` (if given) is flipped alongside to keep pairings consistent.
void fix_column_signs(Matrix& m, Matrix* follower = nullptr) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    m.col(j).cwiseAbs().maxCoeff(&imax);
    if (m(imax, j) < 0.0) {
      m.col(j) = -m.col(j);
      if (follower) follower->col(j) = -follower->col(j);
    }
  }
}

// Symmetric inverse square root of cov + ridge*I. With ridge == 0 a
// rank-deficient covariance is an error the caller must see.
Matrix inverse_sqrt(const Matrix& cov, double ridge, const char* which) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    fail(ErrorKind::SingularCovariance, std::string(which) + " covariance eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double lmax = std::max(lambda(lambda.size() - 1), 0.0) + ridge;
  const double lmin = lambda(0) + ridge;
  if (ridge == 0.0 && (lmax <= 0.0 || lmin <= lmax * 1e-13)) {
    fail(ErrorKind::SingularCovariance,
         std::string(which) + " covariance is singular; pass ridge > 0");
  }
  Vector inv_sqrt(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double v = std::max(lambda(i) + ridge, std::numeric_limits<double>::min());
    inv_sqrt(i) = 1.0 / std::sqrt(v);
  }
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::ModelFormatError, "expected a matrix");
  const std::size_t cols = j.at(0).size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || row.size() != cols) fail(ErrorKind::ModelFormatError, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row.at(c).get<double>();
  }
  return m;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorKind::ModelFormatError, "expected a vector");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

json svd_to_json(const SvdTransform& t) {
  return json{{"mean", vector_to_json(t.mean)},
              {"scale", vector_to_json(t.scale)},
              {"components", matrix_to_json(t.components)},
              {"singular_values", vector_to_json(t.singular_values)},
              {"threshold", t.variance_threshold},
              {"explained_ratio", t.explained_ratio}};
}

SvdTransform svd_from_json(const json& j) {
  SvdTransform t;
  t.mean = vector_from_json(j.at("mean"));
  t.components = matrix_from_json(j.at("components"));
  t.singular_values = vector_from_json(j.at("singular_values"));
  t.variance_threshold = j.at("threshold").get<double>();
  t.explained_ratio = j.value("explained_ratio", 1.0);
  if (j.contains("scale")) {
    t.scale = vector_from_json(j.at("scale"));
  } else {
    t.scale = Vector::Ones(t.mean.size());
  }
  if (t.components.rows() != t.mean.size() || t.components.cols() != t.singular_values.size() ||
      t.scale.size() != t.mean.size()) {
    fail(ErrorKind::ModelFormatError, "inconsistent SVD transform shapes");
  }
  return t;
}

}  // namespace

int CcaTransform::n_retained() const noexcept {
  return static_cast<int>(std::count(retained.begin(), retained.end(), true));
}

SvdTransform fit_svd(const Matrix& m, double threshold, bool standardize) {
  check_threshold(threshold);
  const Eigen::Index n = m.rows();
  const Eigen::Index d = m.cols();
  if (n < 2) fail(ErrorKind::TooFewSamples, "SVD needs at least 2 rows, got " + std::to_string(n));
  if (d < 1) fail(ErrorKind::MalformedInput, "SVD needs at least 1 column");

  SvdTransform t;
  t.variance_threshold = threshold;
  t.mean = m.colwise().mean();
  t.scale = Vector::Ones(d);
  Matrix centered = m.rowwise() - t.mean.transpose();
  if (standardize) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / double(n - 1));
      if (sd > 0.0) {
        t.scale(j) = sd;
        centered.col(j) /= sd;
      }
    }
  }

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double total_var = sv.squaredNorm();
  if (total_var <= 0.0 || sv(0) <= 0.0) {
    fail(ErrorKind::DegenerateView, "all-constant matrix has no variance to decompose");
  }
  const double rank_tol = sv(0) * static_cast<double>(std::max(n, d)) *
                          std::numeric_limits<double>::epsilon();

  Eigen::Index positive = 0;
  while (positive < sv.size() && sv(positive) > rank_tol) ++positive;

  Eigen::Index k = 0;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < positive; ++i) {
    cum += sv(i) * sv(i);
    k = i + 1;
    if (cum / total_var >= threshold - kRelRankTol) break;
  }
  // threshold 1.0 keeps the full positive spectrum (lossless transform).
  if (threshold >= 1.0 - kRelRankTol) k = positive;

  t.components = svd.matrixV().leftCols(k);
  t.singular_values = sv.head(k);
  t.explained_ratio = t.singular_values.squaredNorm() / total_var;
  fix_column_signs(t.components);
  return t;
}

Matrix transform_svd(const SvdTransform& t, const Matrix& rows) {
  if (rows.cols() != t.in_dim()) {
    fail(ErrorKind::DimensionMismatch, "rows have width " + std::to_string(rows.cols()) +
                                           ", transform expects " + std::to_string(t.in_dim()));
  }
  Matrix centered = rows.rowwise() - t.mean.transpose();
  centered = centered * t.scale.cwiseInverse().asDiagonal();
  return centered * t.components;
}

CcaTransform fit_cca(const Matrix& x, const Matrix& y, double retention_cutoff, double ridge) {
  if (x.rows() != y.rows()) {
    fail(ErrorKind::DimensionMismatch, "views have different sample counts");
  }
  const Eigen::Index n = x.rows();
  if (n < 3) fail(ErrorKind::TooFewSamples, "CCA needs n >= 3, got " + std::to_string(n));
  if (ridge < 0.0) fail(ErrorKind::InvalidArgument, "ridge must be >= 0");

  Matrix xc = x.rowwise() - x.colwise().mean();
  Matrix yc = y.rowwise() - y.colwise().mean();
  const double denom = static_cast<double>(n - 1);
  const Matrix cxx = (xc.transpose() * xc) / denom;
  const Matrix cyy = (yc.transpose() * yc) / denom;
  const Matrix cxy = (xc.transpose() * yc) / denom;

  const Matrix wx = inverse_sqrt(cxx, ridge, "x");
  const Matrix wy = inverse_sqrt(cyy, ridge, "y");
  const Matrix m = wx * cxy * wy;

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index dims = std::min(x.cols(), y.cols());

  CcaTransform cca;
  cca.retention_cutoff = retention_cutoff;
  cca.correlations = svd.singularValues().head(dims).cwiseMin(1.0).cwiseMax(0.0);
  cca.proj_x = wx * svd.matrixU().leftCols(dims);
  cca.proj_y = wy * svd.matrixV().leftCols(dims);
  fix_column_signs(cca.proj_x, &cca.proj_y);
  cca.retained.resize(dims);
  for (Eigen::Index j = 0; j < dims; ++j) {
    cca.retained[j] = cca.correlations(j) >= retention_cutoff;
  }
  return cca;
}

SvccaModel fit_svcca(const AlignedViews& av, double threshold_x, double threshold_y,
                     const SvccaOptions& options) {
  check_threshold(threshold_x);
  check_threshold(threshold_y);

  SvccaModel model;
  model.svd_x = fit_svd(av.x.data, threshold_x, options.standardize);
  model.svd_y = fit_svd(av.y.data, threshold_y, options.standardize);
  const Matrix zx = transform_svd(model.svd_x, av.x.data);
  const Matrix zy = transform_svd(model.svd_y, av.y.data);
  model.cca = fit_cca(zx, zy, options.retention_cutoff, options.ridge);
  model.shared_dim = model.cca.n_retained();
  model.train_languages = av.common;
  model.view_names = {av.x.name, av.y.name};
  if (model.shared_dim < 1) {
    std::ostringstream msg;
    msg << "no canonical dimension reached cutoff " << options.retention_cutoff
        << "; correlations:";
    for (Eigen::Index j = 0; j < model.cca.correlations.size(); ++j) {
      msg << ' ' << model.cca.correlations(j);
    }
    fail(ErrorKind::NoCorrelatedDimensions, msg.str());
  }
  return model;
}

Matrix project(const SvccaModel& model, const Matrix& rows, ViewSide side) {
  const SvdTransform& svd = side == ViewSide::X ? model.svd_x : model.svd_y;
  const Matrix& proj = side == ViewSide::X ? model.cca.proj_x : model.cca.proj_y;
  const Matrix all = transform_svd(svd, rows) * proj;

  Matrix out(rows.rows(), model.shared_dim);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < all.cols(); ++j) {
    if (model.cca.retained[static_cast<std::size_t>(j)]) out.col(c++) = all.col(j);
  }
  return out;
}

ViewMatrix project_view(const SvccaModel& model, const ViewMatrix& view, ViewSide side) {
  ViewMatrix out;
  out.name = "svcca(" + model.view_names[0] + "," + model.view_names[1] + ")";
  out.languages = view.languages;
  out.data = project(model, view.data, side);
  for (int j = 0; j < model.shared_dim; ++j) out.feature_names.push_back("cca" + std::to_string(j));
  return out;
}

ViewMatrix concat_views(const AlignedViews& av) {
  ViewMatrix out;
  out.name = av.x.name + "+" + av.y.name;
  out.languages = av.common;
  out.data.resize(av.x.data.rows(), av.x.data.cols() + av.y.data.cols());
  out.data << av.x.data, av.y.data;
  for (const auto& f : av.x.feature_names) out.feature_names.push_back(av.x.name + ":" + f);
  if (!av.x.feature_names.empty() && !av.y.feature_names.empty()) {
    for (const auto& f : av.y.feature_names) out.feature_names.push_back(av.y.name + ":" + f);
  } else {
    out.feature_names.clear();
  }
  return out;
}

std::string model_to_json(const SvccaModel& model) {
  json j{{"version", 1},
         {"view_names", model.view_names},
         {"train_languages", model.train_languages},
         {"svd_x", svd_to_json(model.svd_x)},
         {"svd_y", svd_to_json(model.svd_y)},
         {"cca",
          {{"proj_x", matrix_to_json(model.cca.proj_x)},
           {"proj_y", matrix_to_json(model.cca.proj_y)},
           {"correlations", vector_to_json(model.cca.correlations)},
           {"retained", model.cca.retained},
           {"cutoff", model.cca.retention_cutoff}}}};
  return j.dump(2);
}

void save_model(const SvccaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << model_to_json(model) << "\n";
}

SvccaModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ModelFormatError, std::string("not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("version") || !j.at("version").is_number_integer() ||
        j.at("version").get<int>() != 1) {
      fail(ErrorKind::ModelFormatError, "unsupported model version");
    }
    SvccaModel model;
    model.view_names = {j.at("view_names").at(0).get<std::string>(),
                        j.at("view_names").at(1).get<std::string>()};
    model.train_languages = j.at("train_languages").get<std::vector<std::string>>();
    model.svd_x = svd_from_json(j.at("svd_x"));
    model.svd_y = svd_from_json(j.at("svd_y"));
    const auto& cca = j.at("cca");
    model.cca.proj_x = matrix_from_json(cca.at("proj_x"));
    model.cca.proj_y = matrix_from_json(cca.at("proj_y"));
    model.cca.correlations = vector_from_json(cca.at("correlations"));
    model.cca.retained = cca.at("retained").get<std::vector<bool>>();
    model.cca.retention_cutoff = cca.at("cutoff").get<double>();
    if (model.cca.proj_x.rows() != model.svd_x.rank() ||
        model.cca.proj_y.rows() != model.svd_y.rank() ||
        model.cca.proj_x.cols() != model.cca.correlations.size() ||
        model.cca.proj_y.cols() != model.cca.correlations.size() ||
        model.cca.retained.size() != static_cast<std::size_t>(model.cca.correlations.size())) {
      fail(ErrorKind::ModelFormatError, "inconsistent projection shapes");
    }
    model.shared_dim = model.cca.n_retained();
    return model;
  } catch (const json::exception& e) {
    fail(ErrorKind::ModelFormatError, std::string("schema mismatch: ") + e.what());
  }
}

SvccaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace mvlang
