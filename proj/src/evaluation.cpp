#include "mvlang/evaluation.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "parallel.hpp"

namespace mvlang {

namespace {

// Regularized incomplete beta function I_x(a, b) via the continued fraction
// (Lentz's method), good to ~1e-14 for the arguments used here.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a t statistic with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(dof / 2.0, 0.5, x);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0.0 || db <= 0.0) {
    fail(ErrorKind::UndefinedCorrelation, "constant vector has no rank correlation");
  }
  return num / std::sqrt(da * db);
}

Vector sigmoid(const Vector& z) {
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // Numerically stable logistic.
    if (z(i) >= 0) {
      out(i) = 1.0 / (1.0 + std::exp(-z(i)));
    } else {
      const double e = std::exp(z(i));
      out(i) = e / (1.0 + e);
    }
  }
  return out;
}

struct Fold {
  std::string id;
  std::vector<Eigen::Index> held_out;
};

std::vector<Fold> make_folds(const ViewMatrix& inputs, const TypologyDataset& targets,
                             Protocol protocol) {
  std::vector<Fold> folds;
  if (protocol == Protocol::OneLanguageOut) {
    for (std::size_t i = 0; i < inputs.languages.size(); ++i) {
      folds.push_back(Fold{inputs.languages[i], {static_cast<Eigen::Index>(i)}});
    }
    return folds;
  }
  std::unordered_map<std::string, std::string> family_of;
  for (const auto& m : targets.meta) family_of[m.code] = m.family;
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < inputs.languages.size(); ++i) {
    auto it = family_of.find(inputs.languages[i]);
    if (it == family_of.end()) {
      fail(ErrorKind::MissingMetadata, "no family for '" + inputs.languages[i] + "'");
    }
    groups[it->second].push_back(static_cast<Eigen::Index>(i));
  }
  for (auto& [family, members] : groups) folds.push_back(Fold{family, std::move(members)});
  return folds;
}

}  // namespace

Protocol protocol_from_string(const std::string& name) {
  if (name == "one-language-out" || name == "one_language_out") return Protocol::OneLanguageOut;
  if (name == "one-family-out" || name == "one_family_out") return Protocol::OneFamilyOut;
  fail(ErrorKind::InvalidArgument, "unknown protocol '" + name + "'");
}

const char* to_string(Protocol protocol) noexcept {
  return protocol == Protocol::OneLanguageOut ? "one-language-out" : "one-family-out";
}

LogisticRegression LogisticRegression::fit(const Matrix& x, const Vector& y01, double l2) {
  if (x.rows() != y01.size()) fail(ErrorKind::DimensionMismatch, "label count mismatch");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();

  LogisticRegression model;
  model.l2 = l2;
  // Parameters packed as [weights; bias]; only the weights are penalized.
  Vector theta = Vector::Zero(d + 1);
  constexpr int kMaxIter = 100;
  constexpr double kTol = 1e-10;

  for (int iter = 0; iter < kMaxIter; ++iter) {
    const Vector z = x * theta.head(d) + Vector::Constant(n, theta(d));
    const Vector p = sigmoid(z);
    Vector grad(d + 1);
    grad.head(d) = x.transpose() * (p - y01) + l2 * theta.head(d);
    grad(d) = (p - y01).sum();
    if (grad.norm() < kTol) break;

    const Vector w = p.array() * (1.0 - p.array()) + 1e-12;
    Matrix h = Matrix::Zero(d + 1, d + 1);
    const Matrix xw = x.transpose() * w.asDiagonal();
    h.topLeftCorner(d, d) = xw * x + l2 * Matrix::Identity(d, d);
    h.topRightCorner(d, 1) = xw.rowwise().sum();
    h.bottomLeftCorner(1, d) = h.topRightCorner(d, 1).transpose();
    h(d, d) = w.sum();
    theta -= h.ldlt().solve(grad);
  }
  model.weights = theta.head(d);
  model.bias = theta(d);
  return model;
}

Vector LogisticRegression::predict_probability(const Matrix& x) const {
  if (x.cols() != weights.size()) {
    fail(ErrorKind::DimensionMismatch, "feature width mismatch in prediction");
  }
  return sigmoid(x * weights + Vector::Constant(x.rows(), bias));
}

std::vector<int> LogisticRegression::predict(const Matrix& x) const {
  const Vector p = predict_probability(x);
  std::vector<int> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = p(i) >= 0.5 ? 1 : 0;
  return out;
}

PredictionReport predict_features(const ViewMatrix& inputs, const TypologyDataset& targets,
                                  Protocol protocol) {
  inputs.validate();
  targets.view.validate();
  if (inputs.languages != targets.view.languages) {
    fail(ErrorKind::DimensionMismatch, "inputs and targets must list the same languages in order");
  }
  for (Eigen::Index i = 0; i < targets.view.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < targets.view.data.cols(); ++j) {
      const double v = targets.view.data(i, j);
      if (v != 0.0 && v != 1.0) {
        fail(ErrorKind::MalformedInput, "typological features must be binary (0/1)");
      }
    }
  }

  const auto folds = make_folds(inputs, targets, protocol);
  if (protocol == Protocol::OneLanguageOut && inputs.languages.size() < 3) {
    fail(ErrorKind::TooFewSamples, "need at least 3 languages");
  }
  if (protocol == Protocol::OneFamilyOut && folds.size() < 2) {
    fail(ErrorKind::TooFewSamples, "need at least 2 families");
  }

  const Eigen::Index n = inputs.data.rows();
  const Eigen::Index n_features = targets.view.data.cols();
  auto feature_name = [&](Eigen::Index f) {
    if (static_cast<std::size_t>(f) < targets.view.feature_names.size()) {
      return targets.view.feature_names[static_cast<std::size_t>(f)];
    }
    return "f" + std::to_string(f);
  };

  PredictionReport report;
  report.protocol = protocol;
  report.fold_count = static_cast<int>(folds.size());

  // Folds are independent; each slot records one (feature -> cell accuracy
  // or skip) outcome and the merge below walks slots in fold order, so the
  // report does not depend on scheduling.
  struct FoldOutcome {
    std::vector<double> cell;    // accuracy per feature, -1 when skipped
  };
  std::vector<FoldOutcome> outcomes(folds.size());
  detail::parallel_for(static_cast<int>(folds.size()), [&](int fold_index) {
    const Fold& fold = folds[static_cast<std::size_t>(fold_index)];
    FoldOutcome& outcome = outcomes[static_cast<std::size_t>(fold_index)];
    outcome.cell.assign(static_cast<std::size_t>(n_features), -1.0);

    std::vector<bool> held(static_cast<std::size_t>(n), false);
    for (auto i : fold.held_out) held[static_cast<std::size_t>(i)] = true;
    std::vector<Eigen::Index> train_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!held[static_cast<std::size_t>(i)]) train_rows.push_back(i);
    }
    Matrix x_train(static_cast<Eigen::Index>(train_rows.size()), inputs.data.cols());
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      x_train.row(static_cast<Eigen::Index>(r)) = inputs.data.row(train_rows[r]);
    }
    Matrix x_test(static_cast<Eigen::Index>(fold.held_out.size()), inputs.data.cols());
    for (std::size_t r = 0; r < fold.held_out.size(); ++r) {
      x_test.row(static_cast<Eigen::Index>(r)) = inputs.data.row(fold.held_out[r]);
    }

    for (Eigen::Index f = 0; f < n_features; ++f) {
      Vector y_train(static_cast<Eigen::Index>(train_rows.size()));
      for (std::size_t r = 0; r < train_rows.size(); ++r) {
        y_train(static_cast<Eigen::Index>(r)) = targets.view.data(train_rows[r], f);
      }
      const double first = y_train(0);
      if ((y_train.array() == first).all()) continue;  // single class: skip
      const auto model = LogisticRegression::fit(x_train, y_train, 1.0);
      const auto predicted = model.predict(x_test);
      double correct = 0.0;
      for (std::size_t r = 0; r < fold.held_out.size(); ++r) {
        const int truth = targets.view.data(fold.held_out[r], f) >= 0.5 ? 1 : 0;
        if (predicted[r] == truth) correct += 1.0;
      }
      outcome.cell[static_cast<std::size_t>(f)] =
          correct / static_cast<double>(fold.held_out.size());
    }
  });

  std::map<std::string, std::vector<double>> per_feature_cells;
  double cell_sum = 0.0;
  std::size_t cell_count = 0;
  for (std::size_t fold_index = 0; fold_index < folds.size(); ++fold_index) {
    for (Eigen::Index f = 0; f < n_features; ++f) {
      const double cell = outcomes[fold_index].cell[static_cast<std::size_t>(f)];
      if (cell < 0.0) {
        report.skipped.push_back(SkippedCell{folds[fold_index].id, feature_name(f)});
        continue;
      }
      per_feature_cells[feature_name(f)].push_back(cell);
      cell_sum += cell;
      ++cell_count;
    }
  }
  for (const auto& [feature, cells] : per_feature_cells) {
    report.per_feature_accuracy[feature] =
        std::accumulate(cells.begin(), cells.end(), 0.0) / static_cast<double>(cells.size());
  }
  report.macro_accuracy = cell_count > 0 ? cell_sum / static_cast<double>(cell_count) : 0.0;
  return report;
}

SpearmanResult spearman_vectors(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "vector length mismatch");
  if (a.size() < 3) fail(ErrorKind::TooFewSamples, "need at least 3 pairs");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  SpearmanResult out;
  out.n_pairs = static_cast<Eigen::Index>(a.size());
  out.rho = pearson(ra, rb);
  const double dof = static_cast<double>(a.size()) - 2.0;
  if (std::abs(out.rho) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.rho * std::sqrt(dof / (1.0 - out.rho * out.rho));
    out.p_value = student_t_two_sided(t, dof);
  }
  return out;
}

SpearmanResult spearman(const DistanceMatrix& d1, const DistanceMatrix& d2) {
  d1.validate();
  d2.validate();
  if (d1.size() < 4) fail(ErrorKind::TooFewSamples, "need at least 4 languages");
  std::vector<std::string> sorted1 = d1.languages;
  std::vector<std::string> sorted2 = d2.languages;
  std::sort(sorted1.begin(), sorted1.end());
  std::sort(sorted2.begin(), sorted2.end());
  if (sorted1 != sorted2) {
    fail(ErrorKind::DimensionMismatch, "distance matrices index different language sets");
  }
  auto index_in = [](const DistanceMatrix& d, const std::vector<std::string>& order) {
    std::vector<Eigen::Index> idx;
    for (const auto& code : order) {
      for (std::size_t i = 0; i < d.languages.size(); ++i) {
        if (d.languages[i] == code) {
          idx.push_back(static_cast<Eigen::Index>(i));
          break;
        }
      }
    }
    return idx;
  };
  const auto i1 = index_in(d1, sorted1);
  const auto i2 = index_in(d2, sorted1);

  std::vector<double> v1, v2;
  const std::size_t n = sorted1.size();
  v1.reserve(n * (n - 1) / 2);
  v2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      v1.push_back(d1.d(i1[i], i1[j]));
      v2.push_back(d2.d(i2[i], i2[j]));
    }
  }
  return spearman_vectors(v1, v2);
}

std::string report_to_json(const PredictionReport& report) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"fold", s.fold}, {"feature", s.feature}});
  }
  nlohmann::json j{{"schema_version", 1},
                   {"protocol", to_string(report.protocol)},
                   {"macro_accuracy", report.macro_accuracy},
                   {"fold_count", report.fold_count},
                   {"per_feature_accuracy", report.per_feature_accuracy},
                   {"skipped", skipped}};
  return j.dump(2);
}

std::string report_to_csv(const PredictionReport& report) {
  std::string out = "feature,accuracy\n";
  char buf[40];
  for (const auto& [feature, acc] : report.per_feature_accuracy) {
    std::snprintf(buf, sizeof(buf), "%.17g", acc);
    out += feature + ',' + buf + '\n';
  }
  return out;
}

}  // namespace mvlang
