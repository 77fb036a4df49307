//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_ISOMORPHISM_HPP_
#define RETROGRAPH_CHEM_ISOMORPHISM_HPP_

#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::chem {

struct MatchOptions {
  bool compare_map_nums = false;
  bool compare_hydrogens = true;
};

// Backtracking graph isomorphism over element, charge, aromaticity, hydrogen
// count and bond order. Independent of the canonicalizer.
bool isomorphic(const MolGraph &a, const MolGraph &b, const MatchOptions &opts = {});

// Same as isomorphic(); on success `mapping[i]` is the atom of `b` matched to
// atom i of `a`.
bool find_isomorphism(const MolGraph &a, const MolGraph &b, std::vector<int> *mapping,
                      const MatchOptions &opts = {});

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_ISOMORPHISM_HPP_
