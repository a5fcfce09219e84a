#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mvlang/evaluation.hpp"
#include "mvlang/phylo.hpp"
#include "mvlang/ranking.hpp"
#include "mvlang/selection.hpp"
#include "mvlang/svcca.hpp"
#include "mvlang/treedist.hpp"

namespace py = pybind11;
using namespace mvlang;

PYBIND11_MODULE(mvlang, m) {
  m.doc() = "multi-view language representations: SVCCA fusion and analyses";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
#if defined(PYBIND11_VERSION_HEX) && PYBIND11_VERSION_HEX >= 0x020C0000
      py::set_error(error, e.what());
#else
      error(e.what());
#endif
    }
  });

  py::class_<ViewMatrix>(m, "ViewMatrix")
      .def(py::init([](std::string name, std::vector<std::string> languages, Matrix data) {
             ViewMatrix v{std::move(name), std::move(languages), std::move(data), {}};
             v.validate();
             return v;
           }),
           py::arg("name"), py::arg("languages"), py::arg("data"))
      .def_readwrite("name", &ViewMatrix::name)
      .def_readwrite("languages", &ViewMatrix::languages)
      .def_readwrite("data", &ViewMatrix::data)
      .def_readwrite("feature_names", &ViewMatrix::feature_names)
      .def("__repr__", [](const ViewMatrix& v) {
        return "<ViewMatrix '" + v.name + "' " + std::to_string(v.n_languages()) + "x" +
               std::to_string(v.dim()) + ">";
      });

  py::class_<AlignedViews>(m, "AlignedViews")
      .def_readonly("x", &AlignedViews::x)
      .def_readonly("y", &AlignedViews::y)
      .def_readonly("common", &AlignedViews::common);

  py::class_<DistanceMatrix>(m, "DistanceMatrix")
      .def(py::init([](std::vector<std::string> languages, Matrix d) {
             DistanceMatrix out{std::move(languages), std::move(d)};
             out.validate();
             return out;
           }),
           py::arg("languages"), py::arg("d"))
      .def_readonly("languages", &DistanceMatrix::languages)
      .def_readonly("d", &DistanceMatrix::d);

  py::class_<LanguageMeta>(m, "LanguageMeta")
      .def(py::init<std::string, std::string, std::string, std::int64_t>(), py::arg("code"),
           py::arg("family"), py::arg("subfamily") = "", py::arg("train_size") = 0)
      .def_readwrite("code", &LanguageMeta::code)
      .def_readwrite("family", &LanguageMeta::family)
      .def_readwrite("subfamily", &LanguageMeta::subfamily)
      .def_readwrite("train_size", &LanguageMeta::train_size);

  m.def("load_view", [](const std::filesystem::path& p) { return load_view(p); }, py::arg("path"));
  m.def("load_metadata", &load_metadata, py::arg("path"));
  m.def("align", &align, py::arg("x"), py::arg("y"));
  m.def("cosine_distance_matrix", &cosine_distance_matrix, py::arg("view"));
  m.def("concat_views", &concat_views, py::arg("aligned"));

  py::class_<SvdTransform>(m, "SvdTransform")
      .def_readonly("mean", &SvdTransform::mean)
      .def_readonly("components", &SvdTransform::components)
      .def_readonly("singular_values", &SvdTransform::singular_values)
      .def_readonly("variance_threshold", &SvdTransform::variance_threshold)
      .def_readonly("explained_ratio", &SvdTransform::explained_ratio)
      .def_property_readonly("rank", &SvdTransform::rank);

  py::class_<CcaTransform>(m, "CcaTransform")
      .def_readonly("proj_x", &CcaTransform::proj_x)
      .def_readonly("proj_y", &CcaTransform::proj_y)
      .def_readonly("correlations", &CcaTransform::correlations)
      .def_readonly("retained", &CcaTransform::retained)
      .def_readonly("retention_cutoff", &CcaTransform::retention_cutoff);

  py::enum_<ViewSide>(m, "ViewSide").value("X", ViewSide::X).value("Y", ViewSide::Y);

  py::class_<SvccaModel>(m, "SvccaModel")
      .def_readonly("svd_x", &SvccaModel::svd_x)
      .def_readonly("svd_y", &SvccaModel::svd_y)
      .def_readonly("cca", &SvccaModel::cca)
      .def_readonly("shared_dim", &SvccaModel::shared_dim)
      .def_readonly("train_languages", &SvccaModel::train_languages)
      .def_readonly("view_names", &SvccaModel::view_names);

  m.def("fit_svd", &fit_svd, py::arg("matrix"), py::arg("threshold"),
        py::arg("standardize") = false);
  m.def("transform_svd", &transform_svd, py::arg("transform"), py::arg("rows"));
  m.def("fit_cca", &fit_cca, py::arg("x"), py::arg("y"), py::arg("retention_cutoff") = 0.5,
        py::arg("ridge") = 1e-8);
  m.def(
      "fit_svcca",
      [](const AlignedViews& av, double tx, double ty, double cutoff, double ridge,
         bool standardize) {
        return fit_svcca(av, tx, ty, SvccaOptions{cutoff, ridge, standardize});
      },
      py::arg("aligned"), py::arg("threshold_x"), py::arg("threshold_y"),
      py::arg("retention_cutoff") = 0.5, py::arg("ridge") = 1e-8, py::arg("standardize") = false);
  m.def("project", &project, py::arg("model"), py::arg("rows"), py::arg("side"));
  m.def("project_view", &project_view, py::arg("model"), py::arg("view"), py::arg("side"));
  m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
  m.def("load_model", &load_model, py::arg("path"));

  py::enum_<Linkage>(m, "Linkage")
      .value("Ward", Linkage::Ward)
      .value("Average", Linkage::Average)
      .value("Complete", Linkage::Complete)
      .value("Single", Linkage::Single);

  py::class_<MergeStep>(m, "MergeStep")
      .def_readonly("left", &MergeStep::left)
      .def_readonly("right", &MergeStep::right)
      .def_readonly("height", &MergeStep::height)
      .def_readonly("new_size", &MergeStep::new_size);

  py::class_<PhyloTree>(m, "PhyloTree")
      .def("__repr__",
           [](const PhyloTree& t) {
             return "<PhyloTree with " + std::to_string(leaf_count(t)) + " leaves>";
           })
      .def("newick", [](const PhyloTree& t) { return newick_write(t); })
      .def_property_readonly("n_nodes", [](const PhyloTree& t) { return node_count(t); })
      .def_property_readonly("leaves", [](const PhyloTree& t) { return leaf_labels(t); });

  m.def("agglomerate", &agglomerate, py::arg("distances"), py::arg("linkage") = Linkage::Average);
  m.def("to_tree", &to_tree, py::arg("steps"), py::arg("labels"));
  m.def("cophenetic", &cophenetic, py::arg("tree"));
  m.def("cut", &cut, py::arg("steps"), py::arg("k"));
  m.def("newick_read", [](const std::string& s) { return newick_read(s); }, py::arg("text"));
  m.def("newick_write", &newick_write, py::arg("tree"));
  m.def("newick_load", &newick_load, py::arg("path"));

  py::class_<EditCost>(m, "EditCost")
      .def(py::init<double, double, double>(), py::arg("insert") = 1.0, py::arg("remove") = 1.0,
           py::arg("rename") = 1.0)
      .def_readwrite("insert", &EditCost::insert)
      .def_readwrite("remove", &EditCost::remove)
      .def_readwrite("rename", &EditCost::rename);

  m.def("canonicalize", [](const PhyloTree& t) { return mvlang::canonicalize(t); },
        py::arg("tree"));
  m.def("ted", &ted, py::arg("a"), py::arg("b"), py::arg("cost") = EditCost{});
  m.def("napted", &napted, py::arg("ted_value"), py::arg("a"), py::arg("b"));

  py::enum_<Protocol>(m, "Protocol")
      .value("OneLanguageOut", Protocol::OneLanguageOut)
      .value("OneFamilyOut", Protocol::OneFamilyOut);

  py::class_<TypologyDataset>(m, "TypologyDataset")
      .def(py::init([](ViewMatrix view, std::vector<LanguageMeta> meta) {
             return TypologyDataset{std::move(view), std::move(meta)};
           }),
           py::arg("view"), py::arg("meta") = std::vector<LanguageMeta>{})
      .def_readwrite("view", &TypologyDataset::view)
      .def_readwrite("meta", &TypologyDataset::meta);

  py::class_<SkippedCell>(m, "SkippedCell")
      .def_readonly("fold", &SkippedCell::fold)
      .def_readonly("feature", &SkippedCell::feature);

  py::class_<PredictionReport>(m, "PredictionReport")
      .def_readonly("protocol", &PredictionReport::protocol)
      .def_readonly("per_feature_accuracy", &PredictionReport::per_feature_accuracy)
      .def_readonly("macro_accuracy", &PredictionReport::macro_accuracy)
      .def_readonly("fold_count", &PredictionReport::fold_count)
      .def_readonly("skipped", &PredictionReport::skipped);

  m.def("predict_features", &predict_features, py::arg("inputs"), py::arg("targets"),
        py::arg("protocol") = Protocol::OneLanguageOut);

  py::class_<SpearmanResult>(m, "SpearmanResult")
      .def_readonly("rho", &SpearmanResult::rho)
      .def_readonly("p_value", &SpearmanResult::p_value)
      .def_readonly("n_pairs", &SpearmanResult::n_pairs);

  m.def("spearman", &spearman, py::arg("d1"), py::arg("d2"));
  m.def("spearman_vectors", &spearman_vectors, py::arg("a"), py::arg("b"));

  py::class_<SilhouetteCurve>(m, "SilhouetteCurve")
      .def_readonly("ks", &SilhouetteCurve::ks)
      .def_readonly("scores", &SilhouetteCurve::scores)
      .def_readonly("best_k", &SilhouetteCurve::best_k);

  m.def("silhouette_samples", &silhouette_samples, py::arg("distances"), py::arg("labels"));
  m.def("mean_silhouette", &mean_silhouette, py::arg("distances"), py::arg("labels"));
  m.def("silhouette_curve", &silhouette_curve, py::arg("distances"), py::arg("steps"),
        py::arg("k_max"));
  m.def("elbow_curve", &elbow_curve, py::arg("distances"), py::arg("steps"), py::arg("k_max"));

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("threshold", &StabilityReport::threshold)
      .def_readonly("sample_sizes", &StabilityReport::sample_sizes)
      .def_readonly("clusters_mean", &StabilityReport::clusters_mean)
      .def_readonly("clusters_ci", &StabilityReport::clusters_ci)
      .def_readonly("clusters_sd", &StabilityReport::clusters_sd)
      .def_readonly("variability", &StabilityReport::variability)
      .def_readonly("replicates", &StabilityReport::replicates);

  m.def(
      "stability_sweep",
      [](const ViewMatrix& view, std::optional<ViewMatrix> partner,
         const std::vector<double>& thresholds, const std::vector<int>& sizes, int replicates,
         std::uint64_t seed, double cutoff, Linkage linkage) {
        SweepOptions options;
        options.replicates = replicates;
        options.seed = seed;
        options.retention_cutoff = cutoff;
        options.linkage = linkage;
        return stability_sweep(view, partner ? &*partner : nullptr, thresholds, sizes, options);
      },
      py::arg("view"), py::arg("partner") = std::nullopt, py::arg("thresholds"), py::arg("sizes"),
      py::arg("replicates") = 100, py::arg("seed") = 1, py::arg("retention_cutoff") = 0.5,
      py::arg("linkage") = Linkage::Average);
  m.def("most_stable", &most_stable, py::arg("reports"));

  py::class_<RankingQuery>(m, "RankingQuery")
      .def(py::init([](std::string child, std::int64_t budget, std::int64_t min_candidate_size,
                       std::optional<int> max_k) {
             RankingQuery q{std::move(child), budget, min_candidate_size, max_k};
             return q;
           }),
           py::arg("child"), py::arg("budget"), py::arg("min_candidate_size") = 0,
           py::arg("max_k") = std::nullopt)
      .def_readwrite("child", &RankingQuery::child)
      .def_readwrite("budget", &RankingQuery::budget)
      .def_readwrite("min_candidate_size", &RankingQuery::min_candidate_size)
      .def_readwrite("max_k", &RankingQuery::max_k);

  py::class_<RankedCandidate>(m, "RankedCandidate")
      .def_readonly("code", &RankedCandidate::code)
      .def_readonly("similarity", &RankedCandidate::similarity)
      .def_readonly("train_size", &RankedCandidate::train_size);

  py::class_<RankingResult>(m, "RankingResult")
      .def_readonly("child", &RankingResult::child)
      .def_readonly("candidates", &RankingResult::candidates)
      .def_readonly("accumulated_size", &RankingResult::accumulated_size)
      .def_readonly("k", &RankingResult::k)
      .def_readonly("budget_unmet", &RankingResult::budget_unmet);

  py::class_<ExplainRow>(m, "ExplainRow")
      .def_readonly("code", &ExplainRow::code)
      .def_readonly("similarity", &ExplainRow::similarity)
      .def_readonly("train_size", &ExplainRow::train_size)
      .def_readonly("cumulative_size", &ExplainRow::cumulative_size)
      .def_readonly("eligible", &ExplainRow::eligible);

  m.def("rank", &rank, py::arg("space"), py::arg("meta"), py::arg("query"));
  m.def("explain", &explain, py::arg("space"), py::arg("meta"), py::arg("query"));
}
