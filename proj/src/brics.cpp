//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/brics.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "retrograph/error.hpp"

namespace retro::brics {

using chem::BondOrder;
using chem::MolGraph;
using chem::Neighbor;

namespace {

bool aliphatic(const MolGraph &g, int a, int element) {
  return g.atom(a).element == element && !g.atom(a).aromatic;
}
bool aromatic(const MolGraph &g, int a, int element) {
  return g.atom(a).element == element && g.atom(a).aromatic;
}
bool one_of(int element, std::initializer_list<int> set) {
  return std::find(set.begin(), set.end(), element) != set.end();
}

BondOrder order_of(const MolGraph &g, const Neighbor &nb) {
  return g.bond(nb.bond).order;
}
bool single_or_aromatic(const MolGraph &g, const Neighbor &nb) {
  BondOrder o = order_of(g, nb);
  return o == BondOrder::kSingle || o == BondOrder::kAromatic;
}
bool has_double(const MolGraph &g, int a) {
  for (const Neighbor &nb: g.neighbors(a)) {
    if (order_of(g, nb) == BondOrder::kDouble)
      return true;
  }
  return false;
}
int double_o_count(const MolGraph &g, int a) {
  int n = 0;
  for (const Neighbor &nb: g.neighbors(a))
    n += order_of(g, nb) == BondOrder::kDouble && aliphatic(g, nb.atom, 8);
  return n;
}

// True when two distinct neighbors of `a` satisfy p and q respectively.
template <class P, class Q>
bool two_distinct(const MolGraph &g, int a, P p, Q q) {
  for (const Neighbor &x: g.neighbors(a)) {
    if (!p(x))
      continue;
    for (const Neighbor &y: g.neighbors(a)) {
      if (y.atom != x.atom && q(y))
        return true;
    }
  }
  return false;
}

}  // namespace

bool matches_env(const MolGraph &g, int a, Env env) {
  const chem::Atom &at = g.atom(a);
  if (at.formal_charge != 0)
    return false;
  const int deg = g.degree(a);
  auto nbrs = g.neighbors(a);
  switch (env) {
  case Env::kL1:
    if (!aliphatic(g, a, 6) || deg != 3)
      return false;
    return two_distinct(
        g, a, [&](const Neighbor &x) { return order_of(g, x) == BondOrder::kDouble && aliphatic(g, x.atom, 8); },
        [&](const Neighbor &y) { return single_or_aromatic(g, y) && one_of(g.atom(y.atom).element, { 6, 7, 8 }); });
  case Env::kL3:
    if (!aliphatic(g, a, 8) || deg != 2)
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && !g.bond(x.bond).in_ring && g.atom(x.atom).element == 6;
    });
  case Env::kL4:
    if (!aliphatic(g, a, 6) || deg == 1 || has_double(g, a))
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && !g.bond(x.bond).in_ring && g.atom(x.atom).element == 6;
    });
  case Env::kL5: {
    if (!aliphatic(g, a, 7) || deg == 1 || has_double(g, a))
      return false;
    for (const Neighbor &x: nbrs) {
      int e = g.atom(x.atom).element;
      if (order_of(g, x) == BondOrder::kSingle && e != 6 && e != 16)
        return false;
      if (at.in_ring && g.bond(x.bond).in_ring && aliphatic(g, x.atom, 6) && g.atom(x.atom).in_ring
          && double_o_count(g, x.atom) > 0)
        return false;
    }
    return true;
  }
  case Env::kL6:
    if (!aliphatic(g, a, 6) || deg != 3 || at.in_ring || double_o_count(g, a) == 0)
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && !g.bond(x.bond).in_ring
             && one_of(g.atom(x.atom).element, { 6, 7, 8 });
    });
  case Env::kL7a:
  case Env::kL7b:
    if (!aliphatic(g, a, 6) || (deg != 2 && deg != 3))
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && g.atom(x.atom).element == 6;
    });
  case Env::kL8:
    if (!aliphatic(g, a, 6) || at.in_ring || deg == 1)
      return false;
    return std::all_of(nbrs.begin(), nbrs.end(),
                       [&](const Neighbor &x) { return order_of(g, x) == BondOrder::kSingle; });
  case Env::kL9: {
    if (!aromatic(g, a, 7))
      return false;
    auto arom_cnos = [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kAromatic && g.atom(x.atom).aromatic
             && one_of(g.atom(x.atom).element, { 6, 7, 8, 16 });
    };
    return two_distinct(g, a, arom_cnos, arom_cnos);
  }
  case Env::kL10:
    if (!aliphatic(g, a, 7) || !at.in_ring)
      return false;
    return two_distinct(
        g, a,
        [&](const Neighbor &x) {
          return g.bond(x.bond).in_ring && aliphatic(g, x.atom, 6) && double_o_count(g, x.atom) > 0;
        },
        [&](const Neighbor &y) {
          return g.bond(y.bond).in_ring && !g.atom(y.atom).aromatic
                 && one_of(g.atom(y.atom).element, { 6, 7, 8, 16 });
        });
  case Env::kL11:
    if (!aliphatic(g, a, 16) || deg != 2)
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && !g.bond(x.bond).in_ring && g.atom(x.atom).element == 6;
    });
  case Env::kL12:
    if (!aliphatic(g, a, 16) || deg != 4 || double_o_count(g, a) < 2)
      return false;
    return std::any_of(nbrs.begin(), nbrs.end(), [&](const Neighbor &x) {
      return single_or_aromatic(g, x) && g.atom(x.atom).element == 6;
    });
  case Env::kL13: {
    if (!aliphatic(g, a, 6))
      return false;
    auto ring_single = [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && g.bond(x.bond).in_ring && !g.atom(x.atom).aromatic;
    };
    return two_distinct(
        g, a, [&](const Neighbor &x) { return ring_single(x) && one_of(g.atom(x.atom).element, { 6, 7, 8, 16 }); },
        [&](const Neighbor &y) { return ring_single(y) && one_of(g.atom(y.atom).element, { 7, 8, 16 }); });
  }
  case Env::kL14: {
    if (!aromatic(g, a, 6))
      return false;
    auto arom = [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kAromatic && g.atom(x.atom).aromatic;
    };
    return two_distinct(
        g, a, [&](const Neighbor &x) { return arom(x) && one_of(g.atom(x.atom).element, { 6, 7, 8, 16 }); },
        [&](const Neighbor &y) { return arom(y) && one_of(g.atom(y.atom).element, { 7, 8, 16 }); });
  }
  case Env::kL15: {
    if (!aliphatic(g, a, 6))
      return false;
    auto ring_c = [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kSingle && g.bond(x.bond).in_ring && aliphatic(g, x.atom, 6);
    };
    return two_distinct(g, a, ring_c, ring_c);
  }
  case Env::kL16: {
    if (!aromatic(g, a, 6))
      return false;
    auto arom_c = [&](const Neighbor &x) {
      return order_of(g, x) == BondOrder::kAromatic && aromatic(g, x.atom, 6);
    };
    return two_distinct(g, a, arom_c, arom_c);
  }
  }
  return false;
}

namespace {

struct Rule {
  Env a;
  Env b;
  BondOrder order;
};

const std::vector<Rule> &rules() {
  using E = Env;
  constexpr BondOrder S = BondOrder::kSingle;
  static const std::vector<Rule> kRules = {
    { E::kL1, E::kL3, S },    { E::kL1, E::kL5, S },    { E::kL1, E::kL10, S },   { E::kL3, E::kL4, S },
    { E::kL3, E::kL13, S },   { E::kL3, E::kL14, S },   { E::kL3, E::kL15, S },   { E::kL3, E::kL16, S },
    { E::kL4, E::kL5, S },    { E::kL4, E::kL11, S },   { E::kL5, E::kL12, S },   { E::kL5, E::kL14, S },
    { E::kL5, E::kL16, S },   { E::kL5, E::kL13, S },   { E::kL5, E::kL15, S },   { E::kL6, E::kL13, S },
    { E::kL6, E::kL14, S },   { E::kL6, E::kL15, S },   { E::kL6, E::kL16, S },
    { E::kL7a, E::kL7b, BondOrder::kDouble },
    { E::kL8, E::kL9, S },    { E::kL8, E::kL10, S },   { E::kL8, E::kL13, S },   { E::kL8, E::kL14, S },
    { E::kL8, E::kL15, S },   { E::kL8, E::kL16, S },   { E::kL9, E::kL13, S },   { E::kL9, E::kL14, S },
    { E::kL9, E::kL15, S },   { E::kL9, E::kL16, S },   { E::kL10, E::kL13, S },  { E::kL10, E::kL14, S },
    { E::kL10, E::kL15, S },  { E::kL10, E::kL16, S },  { E::kL11, E::kL13, S },  { E::kL11, E::kL14, S },
    { E::kL11, E::kL15, S },  { E::kL11, E::kL16, S },  { E::kL13, E::kL14, S },  { E::kL13, E::kL15, S },
    { E::kL13, E::kL16, S },  { E::kL14, E::kL14, S },  { E::kL14, E::kL15, S },  { E::kL14, E::kL16, S },
    { E::kL15, E::kL16, S },  { E::kL16, E::kL16, S },
  };
  return kRules;
}

}  // namespace

std::vector<int> cleavable_bonds(const MolGraph &g) {
  std::vector<int> out;
  for (int b = 0; b < g.num_bonds(); ++b) {
    const chem::Bond &bd = g.bond(b);
    if (bd.in_ring)
      continue;
    for (const Rule &r: rules()) {
      if (bd.order != r.order)
        continue;
      bool hit = (matches_env(g, bd.begin, r.a) && matches_env(g, bd.end, r.b))
                 || (matches_env(g, bd.begin, r.b) && matches_env(g, bd.end, r.a));
      if (hit) {
        out.push_back(b);
        break;
      }
    }
  }
  return out;
}

BricsGraph fragment(const MolGraph &g) {
  std::vector<int> cut = cleavable_bonds(g);
  std::vector<bool> is_cut(g.num_bonds(), false);
  for (int b: cut)
    is_cut[b] = true;

  BricsGraph bg;
  bg.membership.assign(g.num_atoms(), -1);
  std::vector<int> stack;
  for (int s = 0; s < g.num_atoms(); ++s) {
    if (bg.membership[s] >= 0)
      continue;
    int id = bg.num_nodes();
    bg.nodes.emplace_back();
    bg.membership[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: g.neighbors(u)) {
        if (is_cut[nb.bond] || bg.membership[nb.atom] >= 0)
          continue;
        bg.membership[nb.atom] = id;
        stack.push_back(nb.atom);
      }
    }
  }
  for (int a = 0; a < g.num_atoms(); ++a)
    bg.nodes[bg.membership[a]].atoms.push_back(a);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const chem::Bond &bd = g.bond(b);
    if (is_cut[b]) {
      int u = bg.membership[bd.begin], v = bg.membership[bd.end];
      int au = bd.begin, av = bd.end;
      if (u > v) {
        std::swap(u, v);
        std::swap(au, av);
      }
      bg.edges.push_back({ u, v, b, au, av });
    } else {
      bg.nodes[bg.membership[bd.begin]].bonds.push_back(b);
    }
  }
  return bg;
}

int fragment_of(const BricsGraph &bg, int atom) {
  if (atom < 0 || atom >= static_cast<int>(bg.membership.size()))
    throw OutOfRange("atom " + std::to_string(atom) + " outside the fragmented graph");
  return bg.membership[atom];
}

}  // namespace retro::brics
