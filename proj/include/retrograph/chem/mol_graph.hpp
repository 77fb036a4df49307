//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_MOL_GRAPH_HPP_
#define RETROGRAPH_CHEM_MOL_GRAPH_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace retro::chem {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

std::string_view bond_order_name(BondOrder order);

struct Atom {
  int element = 6;
  int formal_charge = 0;
  // Hydrogen count carried by the atom (implicit hydrogens are resolved into
  // this field at parse time).
  int explicit_h = 0;
  bool aromatic = false;
  // Atom-mapping id; 0 means unmapped.
  int map_num = 0;
  bool in_ring = false;
};

struct Bond {
  int begin = -1;
  int end = -1;
  BondOrder order = BondOrder::kSingle;
  // Localized order (1-3) used for valence bookkeeping. Equals the order for
  // non-aromatic bonds and holds one Kekule assignment for aromatic ones.
  int kekule = 1;
  bool in_ring = false;
  bool conjugated = false;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

class MolGraph {
public:
  MolGraph() = default;

  int add_atom(const Atom &atom);
  // kekule == 0 derives the localized order from `order` (aromatic -> 1).
  int add_bond(int a, int b, BondOrder order, int kekule = 0);
  void remove_bond(int bond);
  void set_bond_order(int bond, BondOrder order, int kekule = 0);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }

  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  // -1 when the atoms are not bonded.
  int find_bond(int a, int b) const;
  int find_atom_by_map(int map_num) const;

  // Sum of localized bond orders at the atom.
  int bond_valence(int i) const;
  int total_valence(int i) const { return bond_valence(i) + atoms_[i].explicit_h; }
  bool valence_ok(int i) const;
  bool all_valences_ok() const;

  // Sets the hydrogen count to the smallest allowed valence minus the bond
  // valence. Atoms without a hydrogen model are left untouched.
  void recompute_hydrogens(int i);

  // Ring membership, smallest set of smallest rings, aromaticity from the
  // localized orders, and conjugation flags.
  void perceive();
  const std::vector<std::vector<int>> &rings() const { return rings_; }

  // Component id per atom, ids assigned in order of lowest atom index.
  std::vector<int> component_labels(int *count = nullptr) const;
  int num_components() const;

  // Induced subgraph; old_to_new receives -1 for dropped atoms. Ring and
  // aromaticity data are re-perceived.
  MolGraph subgraph(std::span<const int> atoms, std::vector<int> *old_to_new = nullptr) const;
  // Graph with atom i moved to position perm[i].
  MolGraph permuted(std::span<const int> perm) const;
  // Disjoint union; returns the offset of the appended atoms.
  int append(const MolGraph &other);

  void clear_map_numbers();

private:
  void rebuild_adjacency();

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
  std::vector<std::vector<int>> rings_;
};

// Internal perception passes, exposed for tests.
namespace internal {
  std::vector<bool> find_ring_bonds(const MolGraph &g);
  std::vector<std::vector<int>> find_sssr(const MolGraph &g, const std::vector<bool> &ring_bond);
}  // namespace internal

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_MOL_GRAPH_HPP_
