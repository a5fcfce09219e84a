#include "mvlang/phylo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mvlang {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Lance-Williams update for the distance from the merge of (i, j) to k.
double lw_update(Linkage linkage, double dik, double djk, double dij, double ni, double nj,
                 double nk) {
  switch (linkage) {
    case Linkage::Single:
      return std::min(dik, djk);
    case Linkage::Complete:
      return std::max(dik, djk);
    case Linkage::Average:
      return (ni * dik + nj * djk) / (ni + nj);
    case Linkage::Ward:
      return ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk);
  }
  return 0.0;
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::NewickParseError, what + " at position " + std::to_string(pos));
  }

  void skip_space() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_space();
    if (pos >= text.size()) error("unexpected end of input");
    return text[pos];
  }

  bool at_end() {
    skip_space();
    return pos >= text.size();
  }

  std::string label() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c))) {
        break;
      }
      ++pos;
    }
    return std::string(text.substr(start, pos - start));
  }

  double branch_length() {
    skip_space();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '(' || c == ')' || c == ',' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c))) {
        break;
      }
      ++pos;
    }
    double out = 0.0;
    const char* first = text.data() + start;
    const char* last = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(out)) {
      pos = start;
      error("invalid branch length");
    }
    return out;
  }

  // Subtree with the node's branch length stashed in `height` (converted to
  // real heights after the whole string is read).
  TreeNode subtree() {
    TreeNode node;
    if (peek() == '(') {
      ++pos;  // '('
      node.children.push_back(subtree());
      while (peek() == ',') {
        ++pos;
        node.children.push_back(subtree());
      }
      if (peek() != ')') error("expected ')' or ','");
      ++pos;
      label();  // internal labels are accepted and dropped
      if (node.children.size() < 2) error("internal node needs at least 2 children");
    } else {
      node.label = label();
      if (node.label.empty()) error("leaf without label");
    }
    node.height = std::numeric_limits<double>::quiet_NaN();  // no length yet
    skip_space();
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      node.height = branch_length();
    }
    return node;
  }
};

double max_depth(const TreeNode& node, double depth) {
  const double length = std::isnan(node.height) ? 1.0 : node.height;
  const double here = depth + length;
  if (node.is_leaf()) return here;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : node.children) best = std::max(best, max_depth(c, here));
  return best;
}

// Branch lengths to heights: height(node) = deepest-leaf depth minus the
// node's own depth, so the deepest leaf sits at 0.
void assign_heights(TreeNode& node, double depth, double total) {
  const double length = std::isnan(node.height) ? 1.0 : node.height;
  const double here = depth + length;
  node.height = total - here;
  for (auto& c : node.children) assign_heights(c, here, total);
}

void write_node(const TreeNode& node, double parent_height, bool is_root, std::string& out) {
  if (!node.is_leaf()) {
    out += '(';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0) out += ',';
      write_node(node.children[i], node.height, false, out);
    }
    out += ')';
  } else {
    out += node.label;
  }
  if (!is_root) {
    out += ':';
    out += format_double(parent_height - node.height);
  }
}

void collect_leaves(const TreeNode& node, std::vector<const TreeNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

// Fills the cophenetic matrix below `node`; returns the leaf indices of the
// subtree and the running-max height seen so far.
std::vector<int> fill_cophenetic(const TreeNode& node, const std::map<std::string, int>& index,
                                 Matrix& d, double& effective_height) {
  if (node.is_leaf()) {
    effective_height = 0.0;
    return {index.at(node.label)};
  }
  std::vector<std::vector<int>> groups;
  double max_child = 0.0;
  for (const auto& c : node.children) {
    double child_eff = 0.0;
    groups.push_back(fill_cophenetic(c, index, d, child_eff));
    max_child = std::max(max_child, child_eff);
  }
  effective_height = std::max(node.height, max_child);  // monotonize inversions
  std::vector<int> all;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      for (int i : groups[a]) {
        for (int j : groups[b]) {
          d(i, j) = effective_height;
          d(j, i) = effective_height;
        }
      }
    }
    all.insert(all.end(), groups[a].begin(), groups[a].end());
  }
  return all;
}

TreeNode build_subtree(int id, int n, const std::vector<MergeStep>& steps,
                       const std::vector<std::string>& labels) {
  TreeNode node;
  if (id < n) {
    node.label = labels[static_cast<std::size_t>(id)];
    node.height = 0.0;
    return node;
  }
  const MergeStep& step = steps[static_cast<std::size_t>(id - n)];
  node.height = step.height;
  node.children.push_back(build_subtree(step.left, n, steps, labels));
  node.children.push_back(build_subtree(step.right, n, steps, labels));
  return node;
}

}  // namespace

Linkage linkage_from_string(const std::string& name) {
  if (name == "ward") return Linkage::Ward;
  if (name == "average") return Linkage::Average;
  if (name == "complete") return Linkage::Complete;
  if (name == "single") return Linkage::Single;
  fail(ErrorKind::InvalidArgument, "unknown linkage '" + name + "'");
}

const char* to_string(Linkage linkage) noexcept {
  switch (linkage) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    case Linkage::Single: return "single";
  }
  return "?";
}

std::vector<MergeStep> agglomerate(const DistanceMatrix& d, Linkage linkage) {
  d.validate();
  const int n = static_cast<int>(d.size());
  if (n < 2) fail(ErrorKind::TooFewSamples, "need at least 2 languages to agglomerate");

  const int total = 2 * n - 1;
  Matrix work = Matrix::Zero(total, total);
  work.topLeftCorner(n, n) = d.d;
  std::vector<double> sizes(static_cast<std::size_t>(total), 1.0);
  std::vector<int> active;
  for (int i = 0; i < n; ++i) active.push_back(i);

  std::vector<MergeStep> steps;
  steps.reserve(static_cast<std::size_t>(n - 1));
  for (int step = 0; step < n - 1; ++step) {
    int best_i = -1, best_j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double dist = work(active[a], active[b]);
        if (dist < best) {
          best = dist;
          best_i = active[a];
          best_j = active[b];
        }
      }
    }
    const int merged = n + step;
    for (int k : active) {
      if (k == best_i || k == best_j) continue;
      work(merged, k) = work(k, merged) =
          lw_update(linkage, work(best_i, k), work(best_j, k), best,
                    sizes[static_cast<std::size_t>(best_i)],
                    sizes[static_cast<std::size_t>(best_j)], sizes[static_cast<std::size_t>(k)]);
    }
    sizes[static_cast<std::size_t>(merged)] =
        sizes[static_cast<std::size_t>(best_i)] + sizes[static_cast<std::size_t>(best_j)];
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](int id) { return id == best_i || id == best_j; }),
                 active.end());
    active.push_back(merged);
    steps.push_back(MergeStep{best_i, best_j, best,
                              static_cast<int>(sizes[static_cast<std::size_t>(merged)])});
  }
  return steps;
}

PhyloTree to_tree(const std::vector<MergeStep>& steps, const std::vector<std::string>& labels) {
  const int n = static_cast<int>(steps.size()) + 1;
  if (static_cast<int>(labels.size()) != n) {
    fail(ErrorKind::DimensionMismatch, std::to_string(labels.size()) + " labels for " +
                                           std::to_string(n) + " leaves");
  }
  PhyloTree tree;
  tree.root = build_subtree(2 * n - 2, n, steps, labels);
  return tree;
}

DistanceMatrix cophenetic(const PhyloTree& tree) {
  std::vector<const TreeNode*> leaves;
  collect_leaves(tree.root, leaves);
  std::vector<std::string> labels;
  for (const auto* leaf : leaves) labels.push_back(leaf->label);
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    fail(ErrorKind::DuplicateLanguage, "tree has duplicate leaf labels");
  }
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);

  DistanceMatrix out;
  out.languages = labels;
  out.d.setZero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(labels.size()));
  double eff = 0.0;
  fill_cophenetic(tree.root, index, out.d, eff);
  return out;
}

std::vector<int> cut(const std::vector<MergeStep>& steps, int k) {
  const int n = static_cast<int>(steps.size()) + 1;
  if (k < 1 || k > n) {
    fail(ErrorKind::InvalidK, "k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
  }
  // Union-find over cluster ids, replaying all but the last k-1 merges.
  std::vector<int> parent(static_cast<std::size_t>(2 * n - 1));
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int s = 0; s < n - k; ++s) {
    const MergeStep& step = steps[static_cast<std::size_t>(s)];
    const int target = n + s;
    parent[static_cast<std::size_t>(find(step.left))] = target;
    parent[static_cast<std::size_t>(find(step.right))] = target;
  }
  // Order clusters by smallest member index.
  std::map<int, int> cluster_of_root;
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    auto [it, inserted] = cluster_of_root.emplace(root, next);
    if (inserted) ++next;
    labels[static_cast<std::size_t>(i)] = it->second;
  }
  return labels;
}

std::size_t node_count(const PhyloTree& tree) noexcept {
  std::size_t count = 0;
  std::vector<const TreeNode*> stack{&tree.root};
  while (!stack.empty()) {
    const TreeNode* node = stack.back();
    stack.pop_back();
    ++count;
    for (const auto& c : node->children) stack.push_back(&c);
  }
  return count;
}

std::size_t leaf_count(const PhyloTree& tree) noexcept {
  return leaf_labels(tree).size();
}

std::vector<std::string> leaf_labels(const PhyloTree& tree) {
  std::vector<const TreeNode*> leaves;
  collect_leaves(tree.root, leaves);
  std::vector<std::string> labels;
  labels.reserve(leaves.size());
  for (const auto* leaf : leaves) labels.push_back(leaf->label);
  return labels;
}

std::string newick_write(const PhyloTree& tree) {
  std::string out;
  write_node(tree.root, tree.root.height, true, out);
  out += ';';
  return out;
}

PhyloTree newick_read(std::string_view text) {
  Parser p{text};
  PhyloTree tree;
  tree.root = p.subtree();
  if (p.at_end() || p.peek() != ';') p.error("expected ';'");
  ++p.pos;
  if (!p.at_end()) p.error("trailing characters after ';'");
  // The root sits at depth 0 (its own branch length, if any, is ignored);
  // node heights are measured up from the deepest leaf.
  TreeNode& root = tree.root;
  if (root.is_leaf()) {
    root.height = 0.0;
    return tree;
  }
  double root_height = 0.0;
  for (auto& c : root.children) root_height = std::max(root_height, max_depth(c, 0.0));
  for (auto& c : root.children) assign_heights(c, 0.0, root_height);
  root.height = root_height;
  return tree;
}

PhyloTree newick_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return newick_read(ss.str());
}

std::string merges_to_csv(const std::vector<MergeStep>& steps) {
  std::string out = "step,left,right,height,size\n";
  for (std::size_t s = 0; s < steps.size(); ++s) {
    out += std::to_string(s) + ',' + std::to_string(steps[s].left) + ',' +
           std::to_string(steps[s].right) + ',' + format_double(steps[s].height) + ',' +
           std::to_string(steps[s].new_size) + '\n';
  }
  return out;
}

}  // namespace mvlang
