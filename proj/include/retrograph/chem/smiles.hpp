//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_SMILES_HPP_
#define RETROGRAPH_CHEM_SMILES_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::chem {

// Parses the supported SMILES subset. Stereo marks and isotopes are accepted
// and dropped; a note is appended to `warnings` when it is non-null.
MolGraph parse_smiles(std::string_view text, std::vector<std::string> *warnings = nullptr);

// Canonical SMILES. Map numbers are written when present.
std::string write_smiles(const MolGraph &g);

// Canonical atom ranks (a permutation of 0..n-1). Equal graphs get equal rank
// assignments up to automorphism.
std::vector<int> canonical_ranks(const MolGraph &g, bool use_map_nums = true);

// Hydrogen count a bare (unbracketed) atom would receive when parsed back,
// together with whether it would be assigned a pi bond. Returns false when the
// atom cannot be written bare.
bool bare_atom_matches(const MolGraph &g, int atom);

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_SMILES_HPP_
