//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_FEATURES_HPP_
#define RETROGRAPH_CHEM_FEATURES_HPP_

#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::chem {

inline constexpr int kNumReactionTypes = 10;

// Row-major feature table.
struct FeatureTable {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Atom layout: element one-hot | valence | charge | H count | in ring |
// aromatic, then an optional reaction-type one-hot.
int atom_feature_base_dim();
int atom_feature_dim(bool type_known);
// Bond layout: single/double/triple/aromatic one-hot | conjugated | aromatic |
// in ring.
int bond_feature_dim();

// Column offsets within the atom layout.
int atom_valence_slot();
int atom_charge_slot();
int atom_h_slot();
int atom_ring_slot();
int atom_aromatic_slot();

// reaction_type in 1..10, or 0 when unknown.
FeatureTable atom_features(const MolGraph &g, int reaction_type = 0);
FeatureTable bond_features(const MolGraph &g);

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_FEATURES_HPP_
