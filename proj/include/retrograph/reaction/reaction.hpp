//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_REACTION_REACTION_HPP_
#define RETROGRAPH_REACTION_REACTION_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::rxn {

struct ReactionRecord {
  chem::MolGraph product;
  // All reactant molecules as one (possibly disconnected) graph. Components
  // without mapped atoms are dropped at parse time.
  chem::MolGraph reactants;
  // product atom -> reactant atom.
  std::vector<int> atom_map;
  // 1..10, or 0 when the line carries no type prefix.
  int reaction_type = 0;
  std::string text;

  bool is_leaving(int reactant_atom) const { return reactants.atom(reactant_atom).map_num == 0; }
};

// "<type>,<reactants>>><product>" with the type prefix optional.
ReactionRecord parse_reaction(std::string_view line);
std::vector<ReactionRecord> read_reactions(const std::string &path, std::vector<std::string> *errors = nullptr);

enum class CenterKind { kBF, kBC, kA, kUnsupported };
const char *center_kind_name(CenterKind kind);

struct BondChange {
  int bond;            // product bond index
  int original_order;  // 1..3 in the reactants
};

struct ChargeChange {
  int atom;   // product atom index
  int delta;  // added to the product charge to obtain the synthon charge
};

struct CenterLabel {
  CenterKind kind = CenterKind::kUnsupported;
  int bond = -1;           // BF, BC
  int atom = -1;           // A
  int original_order = 0;  // BC
  std::vector<BondChange> induced;   // BF only
  std::vector<ChargeChange> charges;  // nonzero deltas only
  std::string reason;                 // why a record is unsupported
};

CenterLabel extract_center_label(const ReactionRecord &r);

// Product atoms forming the center (bond endpoints or the single atom).
std::vector<int> center_atoms(const chem::MolGraph &product, const CenterLabel &label);
// Atoms that receive a charge prediction: center atoms plus endpoints of the
// changed neighbor bonds, ascending and unique.
std::vector<int> charge_candidates(const chem::MolGraph &product, const CenterLabel &label);
// Bonds sharing an atom with `bond`, ascending.
std::vector<int> neighbor_bonds(const chem::MolGraph &g, int bond);

// Applies the label to the product. Atom indices are preserved.
chem::MolGraph derive_synthons(const chem::MolGraph &product, const CenterLabel &label);

struct CoverageStats {
  int bf = 0, bc = 0, a = 0, unsupported = 0;
  int total() const { return bf + bc + a + unsupported; }
  double fraction(CenterKind kind) const;
  double supported_fraction() const;
};

CoverageStats coverage_stats(const std::vector<ReactionRecord> &records);
std::string coverage_csv(const CoverageStats &stats);

}  // namespace retro::rxn

#endif  // RETROGRAPH_REACTION_REACTION_HPP_
