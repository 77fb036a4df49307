//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/reaction/trace.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "retrograph/chem/element.hpp"
#include "retrograph/chem/isomorphism.hpp"
#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"

namespace retro::rxn {

using chem::BondOrder;
using chem::MolGraph;

Unit make_unit(const std::string &encoding) {
  Unit u;
  u.encoding = encoding;
  MolGraph g = chem::parse_smiles(encoding);
  std::vector<int> ranks = chem::canonical_ranks(g, true);
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (g.atom(i).map_num == 1) {
      if (u.anchor >= 0)
        throw SyntaxError("unit has two anchors: " + encoding);
      u.anchor = i;
    } else if (g.atom(i).map_num != 0) {
      throw SyntaxError("unit map numbers other than the anchor: " + encoding);
    }
  }
  if (u.anchor < 0 || g.num_atoms() < 2 || g.num_components() != 1)
    throw SyntaxError("malformed unit: " + encoding);
  u.anchor_valence = g.bond_valence(u.anchor);
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (i != u.anchor)
      u.push_order.push_back(i);
  }
  // Highest rank first so the lowest rank is pushed last and visited next.
  std::sort(u.push_order.begin(), u.push_order.end(), [&](int a, int b) { return ranks[a] > ranks[b]; });
  g.clear_map_numbers();
  u.graph = std::move(g);
  return u;
}

std::vector<int> initial_frontier(const MolGraph &product, const std::vector<int> &center) {
  std::vector<int> ranks = chem::canonical_ranks(product, false);
  std::vector<int> out = center;
  std::sort(out.begin(), out.end(), [&](int a, int b) { return ranks[a] > ranks[b]; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IntermediateGraph start_completion(const MolGraph &synthons, const MolGraph &product,
                                   const std::vector<int> &center) {
  IntermediateGraph ig;
  ig.graph = synthons;
  ig.frontier = initial_frontier(product, center);
  return ig;
}

bool can_attach(const MolGraph &g, int atom, const Unit &unit) {
  const chem::Atom &host = g.atom(atom);
  if (host.element != unit.graph.atom(unit.anchor).element)
    return false;
  int used = g.bond_valence(atom) + unit.anchor_valence;
  if (!chem::has_hydrogen_model(host.element))
    return true;
  return chem::smallest_valence_at_least(host.element, host.formal_charge, used) >= 0;
}

int attach(IntermediateGraph &ig, const Unit &unit) {
  if (ig.complete())
    throw InvalidLabel("attach on a completed graph");
  int host = ig.current();
  if (!can_attach(ig.graph, host, unit))
    throw ValenceError("unit " + unit.encoding + " cannot be attached here");
  const MolGraph &ug = unit.graph;
  std::vector<int> where(ug.num_atoms(), -1);
  where[unit.anchor] = host;
  int first = ig.graph.num_atoms();
  for (int i = 0; i < ug.num_atoms(); ++i) {
    if (i == unit.anchor)
      continue;
    chem::Atom a = ug.atom(i);
    a.map_num = 0;
    where[i] = ig.graph.add_atom(a);
  }
  for (const chem::Bond &b: ug.bonds())
    ig.graph.add_bond(where[b.begin], where[b.end], static_cast<BondOrder>(b.kekule), b.kekule);
  ig.graph.recompute_hydrogens(host);
  for (int i = first; i < ig.graph.num_atoms(); ++i)
    ig.graph.recompute_hydrogens(i);
  ig.graph.perceive();
  for (int i: unit.push_order)
    ig.frontier.push_back(where[i]);
  ++ig.step;
  return first;
}

void stop(IntermediateGraph &ig) {
  if (ig.complete())
    throw InvalidLabel("stop on a completed graph");
  ig.frontier.pop_back();
  ++ig.step;
}

namespace {

struct Candidate {
  bool bond_only = false;  // ring units go first
  std::string encoding;
  int min_rank;
  std::vector<int> atoms;  // reactant atoms, anchor first
};

// Leaving atoms reachable from `seeds` through ring bonds between leaving
// atoms. A ring bond into a mapped atom other than `anchor` means the
// leaving group is fused to the synthon at two points.
std::vector<int> ring_system(const ReactionRecord &r, std::vector<int> seeds, int anchor) {
  const MolGraph &re = r.reactants;
  std::vector<bool> seen(re.num_atoms(), false);
  for (int s: seeds)
    seen[s] = true;
  std::vector<int> out = seeds;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (const chem::Neighbor &nb: re.neighbors(out[k])) {
      if (!re.bond(nb.bond).in_ring || seen[nb.atom] || nb.atom == anchor)
        continue;
      if (!r.is_leaving(nb.atom))
        throw DecompositionError("leaving ring fused to the synthon at several atoms");
      seen[nb.atom] = true;
      out.push_back(nb.atom);
    }
  }
  return out;
}

Candidate make_candidate(const ReactionRecord &r, int anchor, std::vector<int> members,
                         const std::vector<int> &reactant_ranks) {
  const MolGraph &re = r.reactants;
  Candidate c;
  c.atoms.push_back(anchor);
  c.atoms.insert(c.atoms.end(), members.begin(), members.end());
  c.min_rank = re.num_atoms();
  for (int m: members)
    c.min_rank = std::min(c.min_rank, reactant_ranks[m]);

  std::vector<int> old_to_new;
  MolGraph u = re.subgraph(c.atoms, &old_to_new);
  for (int i = 0; i < u.num_atoms(); ++i)
    u.atom(i).map_num = 0;
  chem::Atom &a = u.atom(old_to_new[anchor]);
  a.map_num = 1;
  a.formal_charge = 0;
  for (int i = 0; i < u.num_atoms(); ++i)
    u.recompute_hydrogens(i);
  u.perceive();
  c.encoding = chem::write_smiles(u);
  return c;
}

}  // namespace

Trace extract_trace(const ReactionRecord &r, const CenterLabel &label) {
  if (label.kind == CenterKind::kUnsupported)
    throw InvalidLabel("no trace for an unsupported center");
  const MolGraph &re = r.reactants;
  Trace trace;
  trace.synthons = derive_synthons(r.product, label);
  trace.center = center_atoms(r.product, label);

  IntermediateGraph ig = start_completion(trace.synthons, r.product, trace.center);
  std::vector<int> to_reactant = r.atom_map;  // intermediate atom -> reactant atom
  std::vector<bool> added(re.num_atoms(), false);
  for (int ra: r.atom_map)
    added[ra] = true;
  std::vector<int> ranks = chem::canonical_ranks(re, true);
  std::map<std::string, Unit> cache;

  // Each leaving atom is added exactly once and each frontier atom is
  // stopped once, so the loop is bounded.
  int guard = 4 * (re.num_atoms() + 1) + 4;
  while (!ig.complete()) {
    if (--guard < 0)
      throw DecompositionError("trace extraction did not terminate");
    int x = ig.current();
    int rx = to_reactant[x];
    std::vector<Candidate> cands;
    std::vector<bool> claimed(re.num_atoms(), false);
    for (const chem::Neighbor &nb: re.neighbors(rx)) {
      int y = nb.atom;
      if (!r.is_leaving(y) || added[y] || claimed[y])
        continue;
      std::vector<int> members;
      if (re.bond(nb.bond).in_ring) {
        std::vector<int> seeds;
        for (const chem::Neighbor &nb2: re.neighbors(rx)) {
          if (re.bond(nb2.bond).in_ring && r.is_leaving(nb2.atom) && !added[nb2.atom])
            seeds.push_back(nb2.atom);
        }
        members = ring_system(r, seeds, rx);
      } else if (re.atom(y).in_ring) {
        members = ring_system(r, { y }, rx);
      } else {
        members = { y };
      }
      for (int m: members) {
        if (added[m])
          throw DecompositionError("leaving atoms reached twice");
        claimed[m] = true;
      }
      cands.push_back(make_candidate(r, rx, members, ranks));
      cands.back().bond_only = members.size() == 1 && !re.atom(members[0]).in_ring;
    }
    if (cands.empty()) {
      trace.steps.push_back({ false, x, {} });
      stop(ig);
      continue;
    }
    const Candidate &best = *std::min_element(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
      return std::tie(a.bond_only, a.encoding, a.min_rank) < std::tie(b.bond_only, b.encoding, b.min_rank);
    });
    auto it = cache.find(best.encoding);
    if (it == cache.end())
      it = cache.emplace(best.encoding, make_unit(best.encoding)).first;
    const Unit &unit = it->second;

    // Locate the parsed unit atoms in the reactants.
    MolGraph target = re.subgraph(best.atoms);
    for (int i = 0; i < target.num_atoms(); ++i) {
      target.atom(i).map_num = i == 0 ? 1 : 0;
      target.atom(i).formal_charge = i == 0 ? 0 : target.atom(i).formal_charge;
    }
    MolGraph probe = unit.graph;
    probe.atom(unit.anchor).map_num = 1;
    std::vector<int> match;
    chem::MatchOptions opts;
    opts.compare_map_nums = true;
    opts.compare_hydrogens = false;
    if (!chem::find_isomorphism(probe, target, &match, opts))
      throw DecompositionError("unit " + best.encoding + " does not match its source atoms");

    if (!can_attach(ig.graph, x, unit))
      throw DecompositionError("unit " + best.encoding + " violates valence at its anchor");
    trace.steps.push_back({ true, x, best.encoding });
    // attach() appends the non-anchor atoms in unit index order.
    attach(ig, unit);
    for (int i = 0; i < unit.graph.num_atoms(); ++i) {
      if (i == unit.anchor)
        continue;
      int ra = best.atoms[match[i]];
      to_reactant.push_back(ra);
      added[ra] = true;
    }
  }

  for (int i = 0; i < re.num_atoms(); ++i) {
    if (!added[i])
      throw DecompositionError("leaving atoms not reachable from the center");
  }
  chem::MatchOptions strict;
  strict.compare_map_nums = true;
  if (!chem::isomorphic(ig.graph, re, strict))
    throw DecompositionError("replayed graph differs from the reactants");
  return trace;
}

MolGraph replay_trace(const Trace &trace, const MolGraph &product) {
  IntermediateGraph ig = start_completion(trace.synthons, product, trace.center);
  std::map<std::string, Unit> cache;
  for (const TraceStep &s: trace.steps) {
    if (ig.complete() || ig.current() != s.atom)
      throw InvalidLabel("trace step does not follow the frontier");
    if (!s.attach) {
      stop(ig);
      continue;
    }
    auto it = cache.find(s.encoding);
    if (it == cache.end())
      it = cache.emplace(s.encoding, make_unit(s.encoding)).first;
    attach(ig, it->second);
  }
  if (!ig.complete())
    throw InvalidLabel("trace ends before the frontier is empty");
  return ig.graph;
}

}  // namespace retro::rxn
