#include "mvlang/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mvlang {

namespace {

char delimiter(FileFormat format) { return format == FileFormat::Tsv ? '\t' : ','; }

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  // Strip a trailing CR from DOS line endings.
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') {
    cells.back().pop_back();
  }
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, std::size_t line_no, std::size_t col_no) {
  const std::string value = trim(cell);
  if (value.empty()) {
    fail(ErrorKind::MalformedInput,
         "missing cell at line " + std::to_string(line_no) + ", column " + std::to_string(col_no));
  }
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || !std::isfinite(out)) {
    fail(ErrorKind::MalformedInput, "non-numeric cell '" + value + "' at line " +
                                        std::to_string(line_no) + ", column " +
                                        std::to_string(col_no));
  }
  return out;
}

std::int64_t parse_count(const std::string& cell, std::size_t line_no) {
  const std::string value = trim(cell);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || out < 0) {
    fail(ErrorKind::MalformedInput,
         "size must be a nonnegative integer at line " + std::to_string(line_no));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur)) {
    if (!trim(cur).empty()) lines.push_back(cur);
  }
  return lines;
}

}  // namespace

bool is_valid_language_code(std::string_view code) noexcept {
  if (code.size() != 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

FileFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return (ext == ".tsv" || ext == ".tab") ? FileFormat::Tsv : FileFormat::Csv;
}

Eigen::Index ViewMatrix::index_of(std::string_view code) const noexcept {
  for (std::size_t i = 0; i < languages.size(); ++i) {
    if (languages[i] == code) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

void ViewMatrix::validate() const {
  if (data.rows() < 1 || data.cols() < 1) {
    fail(ErrorKind::MalformedInput, "view '" + name + "' must have n >= 1 and d >= 1");
  }
  if (static_cast<Eigen::Index>(languages.size()) != data.rows()) {
    fail(ErrorKind::DimensionMismatch, "view '" + name + "': " + std::to_string(languages.size()) +
                                           " codes for " + std::to_string(data.rows()) + " rows");
  }
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != data.cols()) {
    fail(ErrorKind::DimensionMismatch, "view '" + name + "': feature name count mismatch");
  }
  std::unordered_set<std::string> seen;
  for (const auto& code : languages) {
    if (!is_valid_language_code(code)) {
      fail(ErrorKind::MalformedInput, "invalid language code '" + code + "'");
    }
    if (!seen.insert(code).second) {
      fail(ErrorKind::DuplicateLanguage, "duplicate language code '" + code + "'");
    }
  }
  if (!data.allFinite()) {
    fail(ErrorKind::MalformedInput, "view '" + name + "' contains NaN or Inf");
  }
}

void DistanceMatrix::validate() const {
  if (d.rows() != d.cols() || static_cast<Eigen::Index>(languages.size()) != d.rows()) {
    fail(ErrorKind::DimensionMismatch, "distance matrix must be square and fully indexed");
  }
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) fail(ErrorKind::MalformedInput, "nonzero diagonal in distance matrix");
    for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
      if (std::abs(d(i, j) - d(j, i)) > 1e-12 || d(i, j) < 0.0) {
        fail(ErrorKind::MalformedInput, "distance matrix must be symmetric and nonnegative");
      }
    }
  }
}

ViewMatrix parse_view(const std::string& text, FileFormat format, const std::string& name) {
  const char delim = delimiter(format);
  auto lines = nonempty_lines(text);
  if (lines.empty()) fail(ErrorKind::MalformedInput, "view '" + name + "' is empty");

  ViewMatrix view;
  view.name = name;

  std::size_t first_data = 0;
  auto head = split_line(lines[0], delim);
  if (!head.empty() && trim(head[0]) == "lang") {
    for (std::size_t j = 1; j < head.size(); ++j) view.feature_names.push_back(trim(head[j]));
    first_data = 1;
  }
  if (first_data == lines.size()) fail(ErrorKind::MalformedInput, "view '" + name + "' has no data rows");

  std::size_t width = 0;
  std::vector<std::vector<double>> rows;
  for (std::size_t li = first_data; li < lines.size(); ++li) {
    auto cells = split_line(lines[li], delim);
    if (cells.size() < 2) {
      fail(ErrorKind::MalformedInput, "line " + std::to_string(li + 1) + " has no feature columns");
    }
    const std::string code = trim(cells[0]);
    if (!is_valid_language_code(code)) {
      fail(ErrorKind::MalformedInput,
           "invalid language code '" + code + "' at line " + std::to_string(li + 1));
    }
    if (width == 0) {
      width = cells.size() - 1;
    } else if (cells.size() - 1 != width) {
      fail(ErrorKind::MalformedInput, "ragged row at line " + std::to_string(li + 1) + ": got " +
                                          std::to_string(cells.size() - 1) + " cells, expected " +
                                          std::to_string(width));
    }
    std::vector<double> row(width);
    for (std::size_t j = 0; j < width; ++j) row[j] = parse_number(cells[j + 1], li + 1, j + 2);
    view.languages.push_back(code);
    rows.push_back(std::move(row));
  }
  if (!view.feature_names.empty() && view.feature_names.size() != width) {
    fail(ErrorKind::MalformedInput, "header names " + std::to_string(view.feature_names.size()) +
                                        " features but rows have " + std::to_string(width));
  }

  view.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) view.data(i, j) = rows[i][j];
  }
  view.validate();
  return view;
}

ViewMatrix load_view(const std::filesystem::path& path, FileFormat format) {
  return parse_view(read_file(path), format, path.stem().string());
}

ViewMatrix load_view(const std::filesystem::path& path) {
  return load_view(path, format_from_path(path));
}

std::vector<LanguageMeta> parse_metadata(const std::string& text) {
  auto lines = nonempty_lines(text);
  if (lines.empty()) fail(ErrorKind::MalformedInput, "metadata file is empty");
  auto head = split_line(lines[0], ',');
  const std::vector<std::string> expected = {"lang", "family", "subfamily", "size"};
  if (head.size() != 4) fail(ErrorKind::MalformedInput, "metadata header must have 4 columns");
  for (std::size_t j = 0; j < 4; ++j) {
    if (trim(head[j]) != expected[j]) {
      fail(ErrorKind::MalformedInput, "metadata header must be lang,family,subfamily,size");
    }
  }

  std::vector<LanguageMeta> out;
  std::unordered_set<std::string> seen;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto cells = split_line(lines[li], ',');
    if (cells.size() != 4) {
      fail(ErrorKind::MalformedInput, "metadata line " + std::to_string(li + 1) + " malformed");
    }
    LanguageMeta m;
    m.code = trim(cells[0]);
    m.family = trim(cells[1]);
    m.subfamily = trim(cells[2]);
    m.train_size = parse_count(cells[3], li + 1);
    if (!is_valid_language_code(m.code)) {
      fail(ErrorKind::MalformedInput,
           "invalid language code '" + m.code + "' at line " + std::to_string(li + 1));
    }
    if (m.family.empty()) {
      fail(ErrorKind::MalformedInput, "empty family at line " + std::to_string(li + 1));
    }
    if (!seen.insert(m.code).second) {
      fail(ErrorKind::DuplicateLanguage, "duplicate metadata for '" + m.code + "'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LanguageMeta> load_metadata(const std::filesystem::path& path) {
  return parse_metadata(read_file(path));
}

AlignedViews align(const ViewMatrix& x, const ViewMatrix& y) {
  x.validate();
  y.validate();
  std::set<std::string> in_x(x.languages.begin(), x.languages.end());
  std::vector<std::string> common;
  for (const auto& code : y.languages) {
    if (in_x.count(code)) common.push_back(code);
  }
  std::sort(common.begin(), common.end());
  if (common.empty()) {
    fail(ErrorKind::NoCommonLanguages, "views '" + x.name + "' and '" + y.name + "' share no languages");
  }

  auto restrict = [&common](const ViewMatrix& v) {
    ViewMatrix out;
    out.name = v.name;
    out.languages = common;
    out.feature_names = v.feature_names;
    out.data.resize(static_cast<Eigen::Index>(common.size()), v.data.cols());
    for (std::size_t i = 0; i < common.size(); ++i) {
      out.data.row(static_cast<Eigen::Index>(i)) = v.data.row(v.index_of(common[i]));
    }
    return out;
  };

  return AlignedViews{restrict(x), restrict(y), common};
}

DistanceMatrix cosine_distance_matrix(const ViewMatrix& v) {
  v.validate();
  const Eigen::Index n = v.data.rows();
  Vector norms(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    norms(i) = v.data.row(i).norm();
    if (norms(i) == 0.0) {
      fail(ErrorKind::DegenerateVector, "zero-norm row for '" + v.languages[i] + "'");
    }
  }
  DistanceMatrix out;
  out.languages = v.languages;
  out.d.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double cosine = v.data.row(i).dot(v.data.row(j)) / (norms(i) * norms(j));
      cosine = std::clamp(cosine, -1.0, 1.0);
      const double dist = 1.0 - cosine;
      out.d(i, j) = dist;
      out.d(j, i) = dist;
    }
  }
  return out;
}

void save_view(const ViewMatrix& v, const std::filesystem::path& path, FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
  const char delim = delimiter(format);
  out << "lang";
  for (Eigen::Index j = 0; j < v.data.cols(); ++j) {
    out << delim;
    if (static_cast<std::size_t>(j) < v.feature_names.size()) {
      out << v.feature_names[j];
    } else {
      out << "f" << j;
    }
  }
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < v.data.rows(); ++i) {
    out << v.languages[i];
    for (Eigen::Index j = 0; j < v.data.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", v.data(i, j));
      out << delim << buf;
    }
    out << "\n";
  }
}

}  // namespace mvlang
