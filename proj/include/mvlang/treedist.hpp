#pragma once

#include "mvlang/phylo.hpp"

namespace mvlang {

struct EditCost {
  double insert = 1.0;
  double remove = 1.0;
  double rename = 1.0;
};

// Sorts every node's children by the lexicographically smallest leaf label
// in their subtree. Idempotent; gives ordered TED a deterministic input.
PhyloTree canonicalize(const PhyloTree& tree);

// Exact ordered tree edit distance (Zhang-Shasha dynamic program over
// keyroots). Node labels: leaf label, or the shared blank internal label.
double ted(const PhyloTree& a, const PhyloTree& b, const EditCost& cost = {});

// ted_value / (|a| + |b|), the unit-cost distance normalized by its maximum.
double napted(double ted_value, const PhyloTree& a, const PhyloTree& b);

}  // namespace mvlang
