#include "mvlang/treedist.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace mvlang {

namespace {

// Postorder flattening with leftmost-leaf-descendant indices and keyroots,
// the classic Zhang-Shasha bookkeeping.
struct FlatTree {
  std::vector<std::string> labels;  // postorder
  std::vector<int> lmd;             // leftmost leaf descendant, postorder index
  std::vector<int> keyroots;

  int size() const noexcept { return static_cast<int>(labels.size()); }
};

int flatten(const TreeNode& node, FlatTree& out) {
  int leftmost = -1;
  for (const auto& c : node.children) {
    const int child_lmd = flatten(c, out);
    if (leftmost < 0) leftmost = child_lmd;
  }
  const int id = out.size();
  if (leftmost < 0) leftmost = id;
  out.labels.push_back(node.label);
  out.lmd.push_back(leftmost);
  return leftmost;
}

FlatTree make_flat(const PhyloTree& tree) {
  FlatTree flat;
  flatten(tree.root, flat);
  // Keyroots: nodes that are not the leftmost child of their parent, i.e.
  // the highest node for each distinct leftmost leaf.
  std::vector<int> highest(flat.labels.size(), -1);
  for (int i = 0; i < flat.size(); ++i) highest[static_cast<std::size_t>(flat.lmd[i])] = i;
  for (int i : highest) {
    if (i >= 0) flat.keyroots.push_back(i);
  }
  std::sort(flat.keyroots.begin(), flat.keyroots.end());
  return flat;
}

std::string min_leaf_label(const TreeNode& node) {
  if (node.is_leaf()) return node.label;
  std::string best;
  bool first = true;
  for (const auto& c : node.children) {
    std::string leaf = min_leaf_label(c);
    if (first || leaf < best) {
      best = std::move(leaf);
      first = false;
    }
  }
  return best;
}

void sort_children(TreeNode& node) {
  for (auto& c : node.children) sort_children(c);
  std::stable_sort(node.children.begin(), node.children.end(),
                   [](const TreeNode& a, const TreeNode& b) {
                     return min_leaf_label(a) < min_leaf_label(b);
                   });
}

bool is_empty_tree(const PhyloTree& tree) noexcept {
  return tree.root.is_leaf() && tree.root.label.empty();
}

}  // namespace

PhyloTree canonicalize(const PhyloTree& tree) {
  PhyloTree out = tree;
  sort_children(out.root);
  return out;
}

double ted(const PhyloTree& a, const PhyloTree& b, const EditCost& cost) {
  if (cost.insert < 0 || cost.remove < 0 || cost.rename < 0) {
    fail(ErrorKind::InvalidArgument, "edit costs must be nonnegative");
  }
  const FlatTree ta = make_flat(a);
  const FlatTree tb = make_flat(b);
  const int na = ta.size();
  const int nb = tb.size();

  auto rename = [&](int i, int j) {
    return ta.labels[static_cast<std::size_t>(i)] == tb.labels[static_cast<std::size_t>(j)]
               ? 0.0
               : cost.rename;
  };

  Matrix tree_dist = Matrix::Zero(na, nb);
  // Forest-distance table, sized for the largest keyroot subproblem.
  Matrix fd = Matrix::Zero(na + 1, nb + 1);

  for (int i : ta.keyroots) {
    for (int j : tb.keyroots) {
      const int li = ta.lmd[static_cast<std::size_t>(i)];
      const int lj = tb.lmd[static_cast<std::size_t>(j)];
      const int m = i - li + 2;
      const int n = j - lj + 2;

      fd(0, 0) = 0.0;
      for (int x = 1; x < m; ++x) fd(x, 0) = fd(x - 1, 0) + cost.remove;
      for (int y = 1; y < n; ++y) fd(0, y) = fd(0, y - 1) + cost.insert;

      for (int x = 1; x < m; ++x) {
        const int node_a = x + li - 1;
        for (int y = 1; y < n; ++y) {
          const int node_b = y + lj - 1;
          if (ta.lmd[static_cast<std::size_t>(node_a)] == li &&
              tb.lmd[static_cast<std::size_t>(node_b)] == lj) {
            fd(x, y) = std::min({fd(x - 1, y) + cost.remove, fd(x, y - 1) + cost.insert,
                                 fd(x - 1, y - 1) + rename(node_a, node_b)});
            tree_dist(node_a, node_b) = fd(x, y);
          } else {
            const int px = ta.lmd[static_cast<std::size_t>(node_a)] - li;
            const int py = tb.lmd[static_cast<std::size_t>(node_b)] - lj;
            fd(x, y) = std::min({fd(x - 1, y) + cost.remove, fd(x, y - 1) + cost.insert,
                                 fd(px, py) + tree_dist(node_a, node_b)});
          }
        }
      }
    }
  }
  return tree_dist(na - 1, nb - 1);
}

double napted(double ted_value, const PhyloTree& a, const PhyloTree& b) {
  if (ted_value < 0) fail(ErrorKind::InvalidArgument, "edit distance cannot be negative");
  if (is_empty_tree(a) || is_empty_tree(b)) {
    fail(ErrorKind::InvalidTree, "cannot normalize against an empty tree");
  }
  const double denom = static_cast<double>(node_count(a) + node_count(b));
  return ted_value / denom;
}

}  // namespace mvlang
