#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mvlang/error.hpp"

namespace mvlang {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ISO 639-3 style code: exactly three lowercase ASCII letters.
bool is_valid_language_code(std::string_view code) noexcept;

enum class FileFormat { Csv, Tsv };

// Guesses from the extension (.tsv/.tab -> Tsv, anything else Csv).
FileFormat format_from_path(const std::filesystem::path& path);

/// One named view: an ordered list of language codes plus an n x d matrix,
/// row i holding the vector of languages[i].
struct ViewMatrix {
  std::string name;
  std::vector<std::string> languages;
  Matrix data;
  std::vector<std::string> feature_names;  // empty when the file had no header

  Eigen::Index n_languages() const noexcept { return data.rows(); }
  Eigen::Index dim() const noexcept { return data.cols(); }
  // Index of a code, or -1.
  Eigen::Index index_of(std::string_view code) const noexcept;
  // Checks all ViewMatrix invariants (codes, uniqueness, finiteness, shape).
  void validate() const;
};

/// Two views restricted to their common languages, rows in identical
/// (lexicographic) order.
struct AlignedViews {
  ViewMatrix x;
  ViewMatrix y;
  std::vector<std::string> common;
};

struct LanguageMeta {
  std::string code;
  std::string family;
  std::string subfamily;  // may be empty
  std::int64_t train_size = 0;
};

/// Symmetric nonnegative matrix with zero diagonal, indexed by language codes.
struct DistanceMatrix {
  std::vector<std::string> languages;
  Matrix d;

  Eigen::Index size() const noexcept { return d.rows(); }
  void validate() const;
};

// Parses a CSV/TSV view file. First column holds language codes; a header row
// whose first cell is "lang" names the features. Cells must all be finite
// numbers; missing values are rejected.
ViewMatrix load_view(const std::filesystem::path& path, FileFormat format);
ViewMatrix load_view(const std::filesystem::path& path);

// Same grammar, from an in-memory string (used by tests and bindings).
ViewMatrix parse_view(const std::string& text, FileFormat format, const std::string& name);

// CSV with header lang,family,subfamily,size.
std::vector<LanguageMeta> load_metadata(const std::filesystem::path& path);
std::vector<LanguageMeta> parse_metadata(const std::string& text);

// Restricts both views to the sorted intersection of their language sets.
AlignedViews align(const ViewMatrix& x, const ViewMatrix& y);

// D[i][j] = 1 - cos(v_i, v_j). Rows with zero norm are rejected.
DistanceMatrix cosine_distance_matrix(const ViewMatrix& v);

// Writes a view back out (17 significant digits per cell).
void save_view(const ViewMatrix& v, const std::filesystem::path& path, FileFormat format);

}  // namespace mvlang
