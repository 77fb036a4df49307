//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/features.hpp"

#include <string>

#include "retrograph/chem/element.hpp"
#include "retrograph/error.hpp"

namespace retro::chem {

int atom_feature_base_dim() {
  return alphabet_size() + 5;
}

int atom_feature_dim(bool type_known) {
  return atom_feature_base_dim() + (type_known ? kNumReactionTypes : 0);
}

int bond_feature_dim() {
  return 7;
}

int atom_valence_slot() {
  return alphabet_size();
}
int atom_charge_slot() {
  return alphabet_size() + 1;
}
int atom_h_slot() {
  return alphabet_size() + 2;
}
int atom_ring_slot() {
  return alphabet_size() + 3;
}
int atom_aromatic_slot() {
  return alphabet_size() + 4;
}

FeatureTable atom_features(const MolGraph &g, int reaction_type) {
  if (reaction_type < 0 || reaction_type > kNumReactionTypes)
    throw OutOfRange("reaction type " + std::to_string(reaction_type) + " outside 1..10");
  FeatureTable t;
  t.rows = g.num_atoms();
  t.cols = atom_feature_dim(reaction_type > 0);
  t.data.assign(static_cast<std::size_t>(t.rows) * t.cols, 0.0);
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    int slot = alphabet_index(a.element);
    if (slot < 0)
      throw UnknownElement("element " + std::string(element_symbol(a.element)) + " outside the feature alphabet");
    double *row = t.data.data() + static_cast<std::size_t>(i) * t.cols;
    row[slot] = 1.0;
    row[atom_valence_slot()] = g.total_valence(i);
    row[atom_charge_slot()] = a.formal_charge;
    row[atom_h_slot()] = a.explicit_h;
    row[atom_ring_slot()] = a.in_ring ? 1.0 : 0.0;
    row[atom_aromatic_slot()] = a.aromatic ? 1.0 : 0.0;
    if (reaction_type > 0)
      row[atom_feature_base_dim() + reaction_type - 1] = 1.0;
  }
  return t;
}

FeatureTable bond_features(const MolGraph &g) {
  FeatureTable t;
  t.rows = g.num_bonds();
  t.cols = bond_feature_dim();
  t.data.assign(static_cast<std::size_t>(t.rows) * t.cols, 0.0);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bd = g.bond(b);
    double *row = t.data.data() + static_cast<std::size_t>(b) * t.cols;
    row[static_cast<int>(bd.order) - 1] = 1.0;
    row[4] = bd.conjugated ? 1.0 : 0.0;
    row[5] = bd.order == BondOrder::kAromatic ? 1.0 : 0.0;
    row[6] = bd.in_ring ? 1.0 : 0.0;
  }
  return t;
}

}  // namespace retro::chem
