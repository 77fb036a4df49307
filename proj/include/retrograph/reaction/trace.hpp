//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_REACTION_TRACE_HPP_
#define RETROGRAPH_REACTION_TRACE_HPP_

#include <string>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"
#include "retrograph/reaction/reaction.hpp"

namespace retro::rxn {

// A bond or ring unit that can be grafted onto an atom. The anchor atom is
// shared with the host graph; all other atoms are new.
struct Unit {
  std::string encoding;  // canonical SMILES, anchor carries map number 1
  chem::MolGraph graph;  // parsed encoding, map numbers cleared
  int anchor = -1;
  int anchor_valence = 0;  // localized bond valence of the anchor inside the unit
  // Non-anchor atoms in the order they are pushed on the frontier (the last
  // entry ends up on top).
  std::vector<int> push_order;
};

Unit make_unit(const std::string &encoding);

// Graph under completion with its pending attachment atoms. The back of
// `frontier` is the current attachment point.
struct IntermediateGraph {
  chem::MolGraph graph;
  std::vector<int> frontier;
  double score = 0.0;
  int step = 0;
  int synthon_index = 0;

  bool complete() const { return frontier.empty(); }
  int current() const { return frontier.back(); }
};

// Initial frontier: center atoms with the lowest canonical product rank on top.
std::vector<int> initial_frontier(const chem::MolGraph &product, const std::vector<int> &center);

IntermediateGraph start_completion(const chem::MolGraph &synthons, const chem::MolGraph &product,
                                   const std::vector<int> &center);

// True when `unit` can be grafted on `atom` without breaking valence rules.
bool can_attach(const chem::MolGraph &g, int atom, const Unit &unit);

// Grafts the unit on the current frontier atom and pushes its new atoms.
// Returns the index of the first new atom.
int attach(IntermediateGraph &ig, const Unit &unit);
void stop(IntermediateGraph &ig);

struct TraceStep {
  bool attach = false;
  int atom = -1;         // index in the intermediate graph at that step
  std::string encoding;  // attach steps only
};

struct Trace {
  chem::MolGraph synthons;
  std::vector<int> center;
  std::vector<TraceStep> steps;
};

// Ground-truth attachment sequence. Throws DecompositionError when the
// leaving atoms cannot be tiled by bond and ring units.
Trace extract_trace(const ReactionRecord &r, const CenterLabel &label);

// Applies the steps to the synthon graph.
chem::MolGraph replay_trace(const Trace &trace, const chem::MolGraph &product);

}  // namespace retro::rxn

#endif  // RETROGRAPH_REACTION_TRACE_HPP_
