#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mvlang/dataset.hpp"

namespace mvlang {

enum class Linkage { Ward, Average, Complete, Single };

Linkage linkage_from_string(const std::string& name);
const char* to_string(Linkage linkage) noexcept;

/// One agglomeration event. Cluster ids follow the usual convention:
/// leaves are 0..n-1 and the cluster created by step s gets id n+s.
struct MergeStep {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int new_size = 0;
};

struct TreeNode {
  std::string label;  // empty on internal nodes
  double height = 0.0;
  std::vector<TreeNode> children;

  bool is_leaf() const noexcept { return children.empty(); }
};

/// Rooted tree with labeled leaves and per-node merge heights.
struct PhyloTree {
  TreeNode root;
};

// Lance-Williams agglomeration over a precomputed (cosine) distance matrix.
// Ties break on the smallest (i, j) cluster-id pair.
std::vector<MergeStep> agglomerate(const DistanceMatrix& d, Linkage linkage);

// Binary dendrogram from a merge list; leaves carry the given labels.
PhyloTree to_tree(const std::vector<MergeStep>& steps, const std::vector<std::string>& labels);

// D[i][j] = height of the lowest common ancestor of leaves i and j, with
// height inversions monotonized by a running max. Output is indexed by
// sorted leaf label.
DistanceMatrix cophenetic(const PhyloTree& tree);

// Cuts the dendrogram into k clusters by undoing the last k-1 merges.
// Returns one label in [0, k) per leaf; cluster ids are ordered by each
// cluster's smallest member index.
std::vector<int> cut(const std::vector<MergeStep>& steps, int k);

std::size_t node_count(const PhyloTree& tree) noexcept;
std::size_t leaf_count(const PhyloTree& tree) noexcept;
std::vector<std::string> leaf_labels(const PhyloTree& tree);

std::string newick_write(const PhyloTree& tree);
PhyloTree newick_read(std::string_view text);
PhyloTree newick_load(const std::filesystem::path& path);

// merge list as CSV: step,left,right,height,size
std::string merges_to_csv(const std::vector<MergeStep>& steps);

}  // namespace mvlang
