//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_BRICS_HPP_
#define RETROGRAPH_BRICS_HPP_

#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::brics {

struct Fragment {
  std::vector<int> atoms;
  std::vector<int> bonds;
};

struct FragmentEdge {
  int u;
  int v;
  int bond;
  // Endpoint of `bond` inside fragment u and inside fragment v.
  int atom_u;
  int atom_v;
};

struct BricsGraph {
  std::vector<Fragment> nodes;
  std::vector<FragmentEdge> edges;
  std::vector<int> membership;  // atom -> node

  int num_nodes() const { return static_cast<int>(nodes.size()); }
};

// Environment labels of the rule table; L7 has two halves.
enum class Env { kL1, kL3, kL4, kL5, kL6, kL7a, kL7b, kL8, kL9, kL10, kL11, kL12, kL13, kL14, kL15, kL16 };

bool matches_env(const chem::MolGraph &g, int atom, Env env);

// Bonds cleaved by the rule table, ascending.
std::vector<int> cleavable_bonds(const chem::MolGraph &g);

// Nodes are numbered by their lowest atom index.
BricsGraph fragment(const chem::MolGraph &g);

int fragment_of(const BricsGraph &bg, int atom);

}  // namespace retro::brics

#endif  // RETROGRAPH_BRICS_HPP_
