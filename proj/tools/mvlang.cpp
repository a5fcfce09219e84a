// mvlang: fuse language vector views with SVCCA and run the downstream
// analyses (trees, tree distances, clustering, ranking, prediction,
// correlation, threshold sweeps) from the command line.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>

#include "mvlang/evaluation.hpp"
#include "mvlang/phylo.hpp"
#include "mvlang/plot.hpp"
#include "mvlang/ranking.hpp"
#include "mvlang/selection.hpp"
#include "mvlang/svcca.hpp"
#include "mvlang/treedist.hpp"

using namespace mvlang;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularCovariance:
    case ErrorKind::DegenerateView:
    case ErrorKind::DegenerateVector:
    case ErrorKind::UndefinedCorrelation:
      return kExitNumerical;
    default:
      return kExitInput;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
}

// Thresholds come from the 0.05 grid in [0.5, 1.0].
std::string grid_check(const std::string& value) {
  try {
    const double t = std::stod(value);
    const double steps = (t - 0.5) / 0.05;
    if (t >= 0.5 - 1e-9 && t <= 1.0 + 1e-9 && std::abs(steps - std::round(steps)) < 1e-9) {
      return "";
    }
  } catch (...) {
  }
  return "threshold must lie on the 0.05 grid between 0.50 and 1.00";
}

ViewMatrix load_view_arg(const std::string& path, const std::string& format) {
  if (format == "csv") return load_view(path, FileFormat::Csv);
  if (format == "tsv") return load_view(path, FileFormat::Tsv);
  return load_view(path);
}

// A correlate input is either a Newick tree (cophenetic distances) or a
// vector view (cosine distances).
DistanceMatrix distance_input(const std::string& path, const std::string& type) {
  std::string kind = type;
  if (kind == "auto") {
    const auto ext = std::filesystem::path(path).extension().string();
    kind = (ext == ".nwk" || ext == ".newick" || ext == ".tree") ? "tree" : "view";
  }
  if (kind == "tree") return cophenetic(newick_load(path));
  return cosine_distance_matrix(load_view(path));
}

json curve_json(const SilhouetteCurve& curve) {
  json points = json::array();
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    points.push_back({{"k", curve.ks[i]}, {"score", curve.scores[i]}});
  }
  return points;
}

std::vector<int> default_sizes(int n) {
  std::vector<int> sizes;
  int start = std::min(10, n);
  start = std::max(start, 4);
  const int step = std::max(1, (n - start + 3) / 4);
  for (int s = start; s < n; s += step) sizes.push_back(s);
  if (sizes.empty() || sizes.back() != n) sizes.push_back(n);
  return sizes;
}

struct FuseArgs {
  std::string x_path, y_path;
  std::string x_format = "auto", y_format = "auto";
  double tx = 1.0, ty = 1.0;
  double cutoff = 0.5;
  double ridge = 1e-8;
  bool standardize = false;
  std::string out;
  std::string report;
};

void run_fuse(const FuseArgs& args) {
  const auto vx = load_view_arg(args.x_path, args.x_format);
  const auto vy = load_view_arg(args.y_path, args.y_format);
  const auto av = align(vx, vy);

  SvccaOptions options;
  options.retention_cutoff = args.cutoff;
  options.ridge = args.ridge;
  options.standardize = args.standardize;
  const auto model = fit_svcca(av, args.tx, args.ty, options);
  save_model(model, args.out);

  std::cout << "fused " << av.common.size() << " common languages\n";
  std::cout << "view x (" << model.view_names[0] << "): " << model.svd_x.in_dim() << " -> "
            << model.svd_x.rank() << " dims, explained " << fmt_short(model.svd_x.explained_ratio)
            << "\n";
  std::cout << "view y (" << model.view_names[1] << "): " << model.svd_y.in_dim() << " -> "
            << model.svd_y.rank() << " dims, explained " << fmt_short(model.svd_y.explained_ratio)
            << "\n";
  std::cout << "correlations:";
  for (Eigen::Index j = 0; j < model.cca.correlations.size(); ++j) {
    std::cout << ' ' << fmt_short(model.cca.correlations(j));
  }
  std::cout << "\nshared_dim " << model.shared_dim << " (cutoff " << fmt_short(args.cutoff)
            << ")\nmodel written to " << args.out << "\n";

  if (!args.report.empty()) {
    json j{{"schema_version", 1},
           {"n_languages", av.common.size()},
           {"view_x", {{"name", model.view_names[0]},
                       {"input_dim", model.svd_x.in_dim()},
                       {"kept_dims", model.svd_x.rank()},
                       {"explained_ratio", model.svd_x.explained_ratio}}},
           {"view_y", {{"name", model.view_names[1]},
                       {"input_dim", model.svd_y.in_dim()},
                       {"kept_dims", model.svd_y.rank()},
                       {"explained_ratio", model.svd_y.explained_ratio}}},
           {"correlations", std::vector<double>(model.cca.correlations.data(),
                                                model.cca.correlations.data() +
                                                    model.cca.correlations.size())},
           {"retained", model.cca.retained},
           {"shared_dim", model.shared_dim}};
    write_text(args.report, j.dump(2) + "\n");
  }
}

struct ProjectArgs {
  std::string model_path, view_path;
  std::string format = "auto";
  std::string side = "x";
  std::string out;
};

void run_project(const ProjectArgs& args) {
  const auto model = load_model(args.model_path);
  const auto view = load_view_arg(args.view_path, args.format);
  const auto projected =
      project_view(model, view, args.side == "y" ? ViewSide::Y : ViewSide::X);
  save_view(projected, args.out, FileFormat::Csv);
  std::cout << "projected " << projected.n_languages() << " languages into " << projected.dim()
            << " shared dims -> " << args.out << "\n";
}

struct TreeArgs {
  std::string view_path;
  std::string format = "auto";
  std::string linkage = "ward";
  std::string out;
  std::string merges;
  std::string plot;
};

void run_tree(const TreeArgs& args) {
  const auto view = load_view_arg(args.view_path, args.format);
  const auto d = cosine_distance_matrix(view);
  const auto steps = agglomerate(d, linkage_from_string(args.linkage));
  int inversions = 0;
  for (std::size_t s = 1; s < steps.size(); ++s) {
    if (steps[s].height < steps[s - 1].height) ++inversions;
  }
  if (inversions > 0) {
    std::cerr << inversions
              << " height inversion(s) in the merge list; cophenetic output monotonizes them\n";
  }
  const auto tree = to_tree(steps, view.languages);
  const std::string newick = newick_write(tree);
  if (args.out.empty()) {
    std::cout << newick << "\n";
  } else {
    write_text(args.out, newick + "\n");
    std::cout << "tree with " << node_count(tree) << " nodes -> " << args.out << "\n";
  }
  if (!args.merges.empty()) write_text(args.merges, merges_to_csv(steps));
  if (!args.plot.empty()) write_text(args.plot, dendrogram_svg(steps, view.languages));
}

struct TreeDistArgs {
  std::string a_path, b_path;
  bool as_json = false;
};

void run_treedist(const TreeDistArgs& args) {
  const auto a = canonicalize(newick_load(args.a_path));
  const auto b = canonicalize(newick_load(args.b_path));
  const double distance = ted(a, b);
  const double normalized = napted(distance, a, b);
  if (args.as_json) {
    json j{{"schema_version", 1},
           {"ted", distance},
           {"napted", normalized},
           {"nodes_a", node_count(a)},
           {"nodes_b", node_count(b)}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "ted " << fmt(distance) << "\nnapted " << fmt(normalized) << "\nnodes_a "
              << node_count(a) << "\nnodes_b " << node_count(b) << "\n";
  }
}

struct ClusterArgs {
  std::string view_path;
  std::string format = "auto";
  std::string linkage = "average";
  int k = 0;
  std::string select;
  int k_max = 0;
  std::string out;
  std::string curve_csv;
  std::string elbow_csv;
  std::string plot;
};

void run_cluster(const ClusterArgs& args) {
  const auto view = load_view_arg(args.view_path, args.format);
  const auto d = cosine_distance_matrix(view);
  const auto steps = agglomerate(d, linkage_from_string(args.linkage));
  const int n = static_cast<int>(view.n_languages());
  const int k_max = args.k_max > 0 ? args.k_max : n - 1;

  int k = args.k;
  std::optional<SilhouetteCurve> curve;
  if (args.select == "silhouette") {
    curve = silhouette_curve(d, steps, k_max);
    k = curve->best_k;
    std::cout << "silhouette peak at k = " << k << " (score "
              << fmt_short(curve->scores[static_cast<std::size_t>(k - 2)]) << ")\n";
  } else if (k < 1) {
    fail(ErrorKind::InvalidArgument, "pass --k or --select silhouette");
  }

  const auto labels = cut(steps, k);
  std::vector<std::vector<std::string>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    groups[static_cast<std::size_t>(labels[i])].push_back(view.languages[i]);
  }
  for (int c = 0; c < k; ++c) {
    std::cout << "cluster " << c << ":";
    for (const auto& code : groups[static_cast<std::size_t>(c)]) std::cout << ' ' << code;
    std::cout << "\n";
  }

  if (!args.out.empty()) {
    json assignments = json::object();
    for (std::size_t i = 0; i < labels.size(); ++i) assignments[view.languages[i]] = labels[i];
    json j{{"schema_version", 1},
           {"k", k},
           {"linkage", args.linkage},
           {"assignments", assignments}};
    if (curve) j["silhouette_curve"] = curve_json(*curve);
    write_text(args.out, j.dump(2) + "\n");
  }
  if (!args.curve_csv.empty()) {
    if (!curve) curve = silhouette_curve(d, steps, k_max);
    std::string csv = "k,mean_silhouette\n";
    for (std::size_t i = 0; i < curve->ks.size(); ++i) {
      csv += std::to_string(curve->ks[i]) + ',' + fmt(curve->scores[i]) + '\n';
    }
    write_text(args.curve_csv, csv);
  }
  if (!args.elbow_csv.empty()) {
    std::string csv = "k,within_dispersion\n";
    for (const auto& [kk, disp] : elbow_curve(d, steps, k_max)) {
      csv += std::to_string(kk) + ',' + fmt(disp) + '\n';
    }
    write_text(args.elbow_csv, csv);
  }
  if (!args.plot.empty()) {
    if (!curve) curve = silhouette_curve(d, steps, k_max);
    CurveSeries sil{"silhouette", {}, {}};
    for (std::size_t i = 0; i < curve->ks.size(); ++i) {
      sil.xs.push_back(curve->ks[i]);
      sil.ys.push_back(curve->scores[i]);
    }
    CurveSeries elbow{"elbow", {}, {}};
    for (const auto& [kk, disp] : elbow_curve(d, steps, k_max)) {
      elbow.xs.push_back(kk);
      elbow.ys.push_back(disp);
    }
    write_text(args.plot, curve_svg({sil, elbow}, "k", "score"));
  }
}

struct RankArgs {
  std::string space_path, meta_path;
  std::string format = "auto";
  std::string child;
  std::int64_t budget = 0;
  std::int64_t min_size = 0;
  int max_k = 0;
  std::string out;
  std::string explain_csv;
};

void run_rank(const RankArgs& args) {
  const auto space = load_view_arg(args.space_path, args.format);
  const auto meta = load_metadata(args.meta_path);
  RankingQuery query;
  query.child = args.child;
  query.budget = args.budget;
  query.min_candidate_size = args.min_size;
  if (args.max_k > 0) query.max_k = args.max_k;

  const auto result = rank(space, meta, query);
  std::cout << "child " << result.child << ": k = " << result.k << ", accumulated "
            << result.accumulated_size << (result.budget_unmet ? " (budget unmet)" : "") << "\n";
  for (const auto& c : result.candidates) {
    std::cout << "  " << c.code << "  sim " << fmt_short(c.similarity) << "  size "
              << c.train_size << "\n";
  }
  if (!args.out.empty()) write_text(args.out, ranking_to_json(result) + "\n");
  if (!args.explain_csv.empty()) {
    write_text(args.explain_csv, explain_to_csv(explain(space, meta, query)));
  }
}

struct PredictArgs {
  std::string inputs_path, targets_path, meta_path;
  std::string format = "auto";
  std::string protocol = "one-language-out";
  std::string out;
  std::string csv;
};

void run_predict(const PredictArgs& args) {
  auto inputs = load_view_arg(args.inputs_path, args.format);
  TypologyDataset targets;
  targets.view = load_view_arg(args.targets_path, args.format);
  if (!args.meta_path.empty()) targets.meta = load_metadata(args.meta_path);

  // Input and target files may cover different language sets; evaluate on
  // the sorted intersection.
  if (inputs.languages != targets.view.languages) {
    auto av = align(inputs, targets.view);
    std::cerr << "aligned to " << av.common.size() << " common languages\n";
    inputs = std::move(av.x);
    targets.view = std::move(av.y);
  }

  const auto report = predict_features(inputs, targets, protocol_from_string(args.protocol));
  std::cout << "protocol " << to_string(report.protocol) << ", " << report.fold_count
            << " folds\nmacro accuracy " << fmt(report.macro_accuracy) << "\nskipped "
            << report.skipped.size() << " (fold, feature) cells\n";

  std::vector<std::pair<std::string, double>> ranked(report.per_feature_accuracy.begin(),
                                                     report.per_feature_accuracy.end());
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t show = std::min<std::size_t>(10, ranked.size());
  std::cout << "top features:\n";
  for (std::size_t i = 0; i < show; ++i) {
    std::cout << "  " << ranked[i].first << "  " << fmt_short(ranked[i].second) << "\n";
  }
  std::cout << "bottom features:\n";
  for (std::size_t i = ranked.size() - show; i < ranked.size(); ++i) {
    std::cout << "  " << ranked[i].first << "  " << fmt_short(ranked[i].second) << "\n";
  }

  if (!args.out.empty()) write_text(args.out, report_to_json(report) + "\n");
  if (!args.csv.empty()) write_text(args.csv, report_to_csv(report));
}

struct CorrelateArgs {
  std::string a_path, b_path;
  std::string a_type = "auto", b_type = "auto";
  bool as_json = false;
};

// Restricts a distance matrix to a language subset, keeping `order`.
DistanceMatrix restrict_distance(const DistanceMatrix& d, const std::vector<std::string>& order) {
  DistanceMatrix out;
  out.languages = order;
  out.d.setZero(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(order.size()));
  std::vector<Eigen::Index> idx;
  for (const auto& code : order) {
    for (std::size_t i = 0; i < d.languages.size(); ++i) {
      if (d.languages[i] == code) {
        idx.push_back(static_cast<Eigen::Index>(i));
        break;
      }
    }
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = 0; j < order.size(); ++j) {
      out.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.d(idx[i], idx[j]);
    }
  }
  return out;
}

void run_correlate(const CorrelateArgs& args) {
  auto da = distance_input(args.a_path, args.a_type);
  auto db = distance_input(args.b_path, args.b_type);
  // The two structures may cover different language sets (a reference tree
  // vs a full view); correlate over the sorted intersection.
  std::vector<std::string> common;
  {
    std::set<std::string> in_a(da.languages.begin(), da.languages.end());
    for (const auto& code : db.languages) {
      if (in_a.count(code)) common.push_back(code);
    }
    std::sort(common.begin(), common.end());
  }
  if (common.size() < 4) {
    fail(ErrorKind::NoCommonLanguages, "inputs share only " + std::to_string(common.size()) +
                                           " languages; need at least 4");
  }
  if (common.size() != da.languages.size() || common.size() != db.languages.size()) {
    std::cerr << "restricting to " << common.size() << " common languages\n";
    da = restrict_distance(da, common);
    db = restrict_distance(db, common);
  }
  const auto result = spearman(da, db);
  if (args.as_json) {
    json j{{"schema_version", 1},
           {"rho", result.rho},
           {"p_value", result.p_value},
           {"n_pairs", result.n_pairs}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "rho " << fmt(result.rho) << "\np " << fmt(result.p_value) << "\npairs "
              << result.n_pairs << "\n";
  }
}

struct SweepArgs {
  std::string view_path;
  std::string partner_path;
  std::string format = "auto";
  std::vector<double> thresholds;
  std::vector<int> sizes;
  int replicates = 100;
  std::uint64_t seed = 1;
  double cutoff = 0.5;
  std::string linkage = "average";
  std::string out;
  std::string csv;
};

void run_sweep(const SweepArgs& args) {
  const auto view = load_view_arg(args.view_path, args.format);
  std::optional<ViewMatrix> partner;
  if (!args.partner_path.empty()) partner = load_view_arg(args.partner_path, args.format);

  std::vector<double> thresholds = args.thresholds;
  if (thresholds.empty()) {
    for (int i = 0; i <= 10; ++i) thresholds.push_back(0.5 + 0.05 * i);
  }
  std::vector<int> sizes = args.sizes;
  if (sizes.empty()) {
    int n = static_cast<int>(view.n_languages());
    if (partner) n = static_cast<int>(align(view, *partner).common.size());
    sizes = default_sizes(n);
  }

  SweepOptions options;
  options.replicates = args.replicates;
  options.seed = args.seed;
  options.retention_cutoff = args.cutoff;
  options.linkage = linkage_from_string(args.linkage);
  const auto reports =
      stability_sweep(view, partner ? &*partner : nullptr, thresholds, sizes, options);

  for (const auto& r : reports) {
    std::cout << "threshold " << fmt_short(r.threshold) << ": variability "
              << fmt_short(r.variability) << ";";
    for (std::size_t i = 0; i < r.sample_sizes.size(); ++i) {
      std::cout << "  n=" << r.sample_sizes[i] << " k=" << fmt_short(r.clusters_mean[i]) << " ["
                << fmt_short(r.clusters_ci[i].first) << "," << fmt_short(r.clusters_ci[i].second)
                << "]";
    }
    std::cout << "\n";
  }
  const auto best = most_stable(reports);
  std::cout << "recommended threshold " << fmt_short(reports[best].threshold) << "\n";

  if (!args.out.empty()) {
    json out = json::array();
    for (const auto& r : reports) {
      json sizes_json = json::array();
      for (std::size_t i = 0; i < r.sample_sizes.size(); ++i) {
        sizes_json.push_back({{"size", r.sample_sizes[i]},
                              {"mean_k", r.clusters_mean[i]},
                              {"ci_low", r.clusters_ci[i].first},
                              {"ci_high", r.clusters_ci[i].second},
                              {"sd", r.clusters_sd[i]}});
      }
      out.push_back({{"threshold", r.threshold},
                     {"variability", r.variability},
                     {"replicates", r.replicates},
                     {"sizes", sizes_json}});
    }
    json j{{"schema_version", 1},
           {"recommended_threshold", reports[best].threshold},
           {"reports", out}};
    write_text(args.out, j.dump(2) + "\n");
  }
  if (!args.csv.empty()) write_text(args.csv, stability_to_csv(reports));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view language representations: SVCCA fusion and analyses"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");
  app.set_version_flag("--version", "mvlang 0.1.0");

  const auto format_choices = CLI::IsMember({"auto", "csv", "tsv"});
  const auto linkage_choices = CLI::IsMember({"ward", "average", "complete", "single"});
  CLI::Validator grid(grid_check, "THRESHOLD_GRID", "0.05-grid");

  FuseArgs fuse_args;
  auto* fuse = app.add_subcommand("fuse", "fit an SVCCA model from two view files");
  fuse->add_option("--x", fuse_args.x_path, "first view file")->required()->check(CLI::ExistingFile);
  fuse->add_option("--y", fuse_args.y_path, "second view file")->required()->check(CLI::ExistingFile);
  fuse->add_option("--x-format", fuse_args.x_format)->check(format_choices);
  fuse->add_option("--y-format", fuse_args.y_format)->check(format_choices);
  fuse->add_option("--tx", fuse_args.tx, "explained-variance threshold for x")->check(grid);
  fuse->add_option("--ty", fuse_args.ty, "explained-variance threshold for y")->check(grid);
  fuse->add_option("--cutoff", fuse_args.cutoff, "correlation retention cutoff (default 0.5)");
  fuse->add_option("--ridge", fuse_args.ridge, "covariance ridge (default 1e-8)");
  fuse->add_flag("--standardize", fuse_args.standardize, "scale columns to unit variance");
  fuse->add_option("--out", fuse_args.out, "model JSON output")->required();
  fuse->add_option("--report", fuse_args.report, "fusion report JSON output");
  fuse->callback([&] { run_fuse(fuse_args); });

  ProjectArgs project_args;
  auto* project_cmd = app.add_subcommand("project", "project a view file into a fitted space");
  project_cmd->add_option("--model", project_args.model_path)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--view", project_args.view_path)->required()->check(CLI::ExistingFile);
  project_cmd->add_option("--format", project_args.format)->check(format_choices);
  project_cmd->add_option("--side", project_args.side, "which view the rows come from")
      ->check(CLI::IsMember({"x", "y"}));
  project_cmd->add_option("--out", project_args.out, "projected CSV output")->required();
  project_cmd->callback([&] { run_project(project_args); });

  TreeArgs tree_args;
  auto* tree_cmd = app.add_subcommand("tree", "agglomerate a view into a Newick tree");
  tree_cmd->add_option("--view", tree_args.view_path)->required()->check(CLI::ExistingFile);
  tree_cmd->add_option("--format", tree_args.format)->check(format_choices);
  tree_cmd->add_option("--linkage", tree_args.linkage)->check(linkage_choices);
  tree_cmd->add_option("--out", tree_args.out, "Newick output (stdout when omitted)");
  tree_cmd->add_option("--merges", tree_args.merges, "merge list CSV output");
  tree_cmd->add_option("--plot", tree_args.plot, "dendrogram SVG output");
  tree_cmd->callback([&] { run_tree(tree_args); });

  TreeDistArgs treedist_args;
  auto* treedist_cmd = app.add_subcommand("treedist", "edit distance between two Newick trees");
  treedist_cmd->add_option("--a", treedist_args.a_path)->required()->check(CLI::ExistingFile);
  treedist_cmd->add_option("--b", treedist_args.b_path)->required()->check(CLI::ExistingFile);
  treedist_cmd->add_flag("--json", treedist_args.as_json, "emit JSON instead of plain text");
  treedist_cmd->callback([&] { run_treedist(treedist_args); });

  ClusterArgs cluster_args;
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster languages from a view file");
  cluster_cmd->add_option("--view", cluster_args.view_path)->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--format", cluster_args.format)->check(format_choices);
  cluster_cmd->add_option("--linkage", cluster_args.linkage)->check(linkage_choices);
  cluster_cmd->add_option("--k", cluster_args.k, "fixed number of clusters");
  cluster_cmd->add_option("--select", cluster_args.select, "selection heuristic")
      ->check(CLI::IsMember({"silhouette"}));
  cluster_cmd->add_option("--k-max", cluster_args.k_max, "largest k to score (default n-1)");
  cluster_cmd->add_option("--out", cluster_args.out, "clusters JSON output");
  cluster_cmd->add_option("--curve", cluster_args.curve_csv, "silhouette curve CSV output");
  cluster_cmd->add_option("--elbow", cluster_args.elbow_csv, "elbow curve CSV output");
  cluster_cmd->add_option("--plot", cluster_args.plot, "curves SVG output");
  cluster_cmd->callback([&] { run_cluster(cluster_args); });

  RankArgs rank_args;
  auto* rank_cmd = app.add_subcommand("rank", "rank transfer partners under a size budget");
  rank_cmd->add_option("--space", rank_args.space_path, "fused-space view file")
      ->required()
      ->check(CLI::ExistingFile);
  rank_cmd->add_option("--meta", rank_args.meta_path, "language metadata CSV")
      ->required()
      ->check(CLI::ExistingFile);
  rank_cmd->add_option("--format", rank_args.format)->check(format_choices);
  rank_cmd->add_option("--child", rank_args.child, "child language code")->required();
  rank_cmd->add_option("--budget", rank_args.budget, "accumulated sentence budget")->required();
  rank_cmd->add_option("--min-size", rank_args.min_size, "candidate training-size floor");
  rank_cmd->add_option("--max-k", rank_args.max_k, "cap on the number of candidates");
  rank_cmd->add_option("--json", rank_args.out, "ranking JSON output");
  rank_cmd->add_option("--explain", rank_args.explain_csv, "full similarity table CSV output");
  rank_cmd->callback([&] { run_rank(rank_args); });

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "held-out typological feature prediction");
  predict_cmd->add_option("--inputs", predict_args.inputs_path, "input vectors")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--targets", predict_args.targets_path, "binary feature view")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--meta", predict_args.meta_path, "metadata CSV (for one-family-out)")
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--format", predict_args.format)->check(format_choices);
  predict_cmd->add_option("--protocol", predict_args.protocol)
      ->check(CLI::IsMember({"one-language-out", "one-family-out"}));
  predict_cmd->add_option("--out", predict_args.out, "report JSON output");
  predict_cmd->add_option("--csv", predict_args.csv, "per-feature accuracy CSV output");
  predict_cmd->callback([&] { run_predict(predict_args); });

  CorrelateArgs correlate_args;
  auto* correlate_cmd =
      app.add_subcommand("correlate", "spearman correlation between two distance structures");
  correlate_cmd->add_option("--a", correlate_args.a_path)->required()->check(CLI::ExistingFile);
  correlate_cmd->add_option("--b", correlate_args.b_path)->required()->check(CLI::ExistingFile);
  correlate_cmd->add_option("--a-type", correlate_args.a_type)
      ->check(CLI::IsMember({"auto", "view", "tree"}));
  correlate_cmd->add_option("--b-type", correlate_args.b_type)
      ->check(CLI::IsMember({"auto", "view", "tree"}));
  correlate_cmd->add_flag("--json", correlate_args.as_json, "emit JSON instead of plain text");
  correlate_cmd->callback([&] { run_correlate(correlate_args); });

  SweepArgs sweep_args;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "bootstrap stability of cluster counts across thresholds");
  sweep_cmd->add_option("--view", sweep_args.view_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--partner", sweep_args.partner_path, "optional second view (SVCCA mode)")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--format", sweep_args.format)->check(format_choices);
  sweep_cmd->add_option("--thresholds", sweep_args.thresholds, "grid values (default full grid)")
      ->delimiter(',');
  sweep_cmd->add_option("--sizes", sweep_args.sizes, "bootstrap sample sizes")->delimiter(',');
  sweep_cmd->add_option("--replicates", sweep_args.replicates, "replicates per cell (>= 10)");
  sweep_cmd->add_option("--seed", sweep_args.seed, "base RNG seed");
  sweep_cmd->add_option("--cutoff", sweep_args.cutoff, "retention cutoff in SVCCA mode");
  sweep_cmd->add_option("--linkage", sweep_args.linkage)->check(linkage_choices);
  sweep_cmd->add_option("--out", sweep_args.out, "stability report JSON output");
  sweep_cmd->add_option("--csv", sweep_args.csv, "stability report CSV output");
  sweep_cmd->callback([&] { run_sweep(sweep_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
