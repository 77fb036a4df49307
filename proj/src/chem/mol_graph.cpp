//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/mol_graph.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

#include "retrograph/chem/element.hpp"
#include "retrograph/error.hpp"

namespace retro::chem {

std::string_view bond_order_name(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return "single";
  case BondOrder::kDouble:
    return "double";
  case BondOrder::kTriple:
    return "triple";
  case BondOrder::kAromatic:
    return "aromatic";
  }
  return "?";
}

int MolGraph::add_atom(const Atom &atom) {
  atoms_.push_back(atom);
  adj_.emplace_back();
  return num_atoms() - 1;
}

int MolGraph::add_bond(int a, int b, BondOrder order, int kekule) {
  if (a == b || a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms())
    throw std::invalid_argument("invalid bond endpoints");
  if (find_bond(a, b) >= 0)
    throw std::invalid_argument("duplicate bond");
  Bond bond;
  bond.begin = a;
  bond.end = b;
  bond.order = order;
  bond.kekule = kekule > 0 ? kekule : (order == BondOrder::kAromatic ? 1 : static_cast<int>(order));
  bonds_.push_back(bond);
  int idx = num_bonds() - 1;
  adj_[a].push_back({ b, idx });
  adj_[b].push_back({ a, idx });
  return idx;
}

void MolGraph::remove_bond(int bond) {
  bonds_.erase(bonds_.begin() + bond);
  rebuild_adjacency();
}

void MolGraph::set_bond_order(int bond, BondOrder order, int kekule) {
  Bond &b = bonds_[bond];
  b.order = order;
  b.kekule = kekule > 0 ? kekule : (order == BondOrder::kAromatic ? 1 : static_cast<int>(order));
}

void MolGraph::rebuild_adjacency() {
  adj_.assign(atoms_.size(), {});
  for (int i = 0; i < num_bonds(); ++i) {
    adj_[bonds_[i].begin].push_back({ bonds_[i].end, i });
    adj_[bonds_[i].end].push_back({ bonds_[i].begin, i });
  }
}

int MolGraph::find_bond(int a, int b) const {
  for (const Neighbor &n: adj_[a]) {
    if (n.atom == b)
      return n.bond;
  }
  return -1;
}

int MolGraph::find_atom_by_map(int map_num) const {
  for (int i = 0; i < num_atoms(); ++i) {
    if (atoms_[i].map_num == map_num)
      return i;
  }
  return -1;
}

int MolGraph::bond_valence(int i) const {
  int sum = 0;
  for (const Neighbor &n: adj_[i])
    sum += bonds_[n.bond].kekule;
  return sum;
}

bool MolGraph::valence_ok(int i) const {
  const Atom &a = atoms_[i];
  if (a.explicit_h < 0)
    return false;
  if (!has_hydrogen_model(a.element))
    return true;
  int maxv = max_valence(a.element, a.formal_charge);
  return maxv >= 0 && total_valence(i) <= maxv;
}

bool MolGraph::all_valences_ok() const {
  for (int i = 0; i < num_atoms(); ++i) {
    if (!valence_ok(i))
      return false;
  }
  return true;
}

void MolGraph::recompute_hydrogens(int i) {
  Atom &a = atoms_[i];
  if (!has_hydrogen_model(a.element))
    return;
  int used = bond_valence(i);
  int v = smallest_valence_at_least(a.element, a.formal_charge, used);
  if (v < 0) {
    throw ValenceError("valence " + std::to_string(used) + " exceeds limit for "
                       + std::string(element_symbol(a.element)));
  }
  a.explicit_h = v - used;
}

std::vector<int> MolGraph::component_labels(int *count) const {
  std::vector<int> label(atoms_.size(), -1);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < num_atoms(); ++s) {
    if (label[s] >= 0)
      continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (const Neighbor &n: adj_[u]) {
        if (label[n.atom] < 0) {
          label[n.atom] = next;
          stack.push_back(n.atom);
        }
      }
    }
    ++next;
  }
  if (count != nullptr)
    *count = next;
  return label;
}

int MolGraph::num_components() const {
  int count = 0;
  component_labels(&count);
  return count;
}

MolGraph MolGraph::subgraph(std::span<const int> atoms, std::vector<int> *old_to_new) const {
  std::vector<int> map(atoms_.size(), -1);
  MolGraph out;
  for (int a: atoms) {
    if (map[a] < 0)
      map[a] = out.add_atom(atoms_[a]);
  }
  for (const Bond &b: bonds_) {
    if (map[b.begin] >= 0 && map[b.end] >= 0)
      out.add_bond(map[b.begin], map[b.end], b.order, b.kekule);
  }
  out.perceive();
  if (old_to_new != nullptr)
    *old_to_new = std::move(map);
  return out;
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  MolGraph out;
  out.atoms_.resize(atoms_.size());
  out.adj_.resize(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    out.atoms_[perm[i]] = atoms_[i];
  for (const Bond &b: bonds_)
    out.add_bond(perm[b.begin], perm[b.end], b.order, b.kekule);
  out.perceive();
  return out;
}

int MolGraph::append(const MolGraph &other) {
  int offset = num_atoms();
  for (const Atom &a: other.atoms_)
    add_atom(a);
  for (const Bond &b: other.bonds_)
    add_bond(b.begin + offset, b.end + offset, b.order, b.kekule);
  for (const auto &ring: other.rings_) {
    std::vector<int> shifted(ring);
    for (int &x: shifted)
      x += offset;
    rings_.push_back(std::move(shifted));
  }
  return offset;
}

void MolGraph::clear_map_numbers() {
  for (Atom &a: atoms_)
    a.map_num = 0;
}

namespace internal {

std::vector<bool> find_ring_bonds(const MolGraph &g) {
  // Bridges via iterative lowlink; every non-bridge bond lies on a cycle.
  const int n = g.num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> ring(g.num_bonds(), true);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int s = 0; s < n; ++s) {
    if (disc[s] >= 0)
      continue;
    disc[s] = low[s] = timer++;
    stack.push_back({ s, -1, 0 });
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto nbrs = g.neighbors(f.atom);
      if (f.next < nbrs.size()) {
        Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond)
          continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({ nb.atom, nb.bond, 0 });
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          int parent = stack.back().atom;
          low[parent] = std::min(low[parent], low[done.atom]);
          if (low[done.atom] > disc[parent])
            ring[done.parent_bond] = false;
        }
      }
    }
  }
  return ring;
}

std::vector<std::vector<int>> find_sssr(const MolGraph &g, const std::vector<bool> &ring_bond) {
  const int n = g.num_atoms();
  std::vector<int> ring_bond_index(g.num_bonds(), -1);
  int num_ring_bonds = 0;
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (ring_bond[b])
      ring_bond_index[b] = num_ring_bonds++;
  }
  if (num_ring_bonds == 0)
    return {};

  std::vector<std::vector<Neighbor>> radj(n);
  std::vector<bool> ring_atom(n, false);
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!ring_bond[b])
      continue;
    const Bond &bd = g.bond(b);
    radj[bd.begin].push_back({ bd.end, b });
    radj[bd.end].push_back({ bd.begin, b });
    ring_atom[bd.begin] = ring_atom[bd.end] = true;
  }

  // Cyclomatic number of the ring subgraph.
  int num_ring_atoms = 0, num_comp = 0;
  {
    std::vector<bool> seen(n, false);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
      if (!ring_atom[s] || seen[s])
        continue;
      ++num_comp;
      seen[s] = true;
      stack.push_back(s);
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++num_ring_atoms;
        for (const Neighbor &nb: radj[u]) {
          if (!seen[nb.atom]) {
            seen[nb.atom] = true;
            stack.push_back(nb.atom);
          }
        }
      }
    }
  }
  const int target = num_ring_bonds - num_ring_atoms + num_comp;

  const int words = (num_ring_bonds + 63) / 64;
  struct Candidate {
    std::vector<int> atoms;
    std::vector<std::uint64_t> edges;
    std::vector<int> key;
  };
  std::vector<Candidate> candidates;

  std::vector<int> dist(n), parent(n), parent_bond(n);
  std::vector<int> mark(n, -1);
  for (int v = 0; v < n; ++v) {
    if (!ring_atom[v])
      continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue { v };
    dist[v] = 0;
    parent[v] = -1;
    parent_bond[v] = -1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (const Neighbor &nb: radj[u]) {
        if (dist[nb.atom] < 0) {
          dist[nb.atom] = dist[u] + 1;
          parent[nb.atom] = u;
          parent_bond[nb.atom] = nb.bond;
          queue.push_back(nb.atom);
        }
      }
    }
    for (int b = 0; b < g.num_bonds(); ++b) {
      if (!ring_bond[b])
        continue;
      int x = g.bond(b).begin, y = g.bond(b).end;
      if (dist[x] < 0 || dist[y] < 0)
        continue;
      if (parent_bond[x] == b || parent_bond[y] == b)
        continue;
      // Paths v->x and v->y must only share v.
      std::vector<int> px, py;
      for (int u = x; u >= 0; u = parent[u])
        px.push_back(u);
      for (int u = y; u >= 0; u = parent[u])
        py.push_back(u);
      bool disjoint = true;
      for (int u: px)
        mark[u] = v * 2 + 1;
      for (int u: py) {
        if (u != v && mark[u] == v * 2 + 1) {
          disjoint = false;
          break;
        }
      }
      for (int u: px)
        mark[u] = -1;
      if (!disjoint)
        continue;

      Candidate c;
      c.atoms.assign(px.rbegin(), px.rend());  // v ... x
      for (std::size_t k = 0; k + 1 < py.size(); ++k)  // y ... (before v)
        c.atoms.push_back(py[k]);
      c.edges.assign(words, 0);
      auto set_edge = [&](int bond) {
        int idx = ring_bond_index[bond];
        c.edges[idx / 64] |= (std::uint64_t { 1 } << (idx % 64));
      };
      for (std::size_t k = 0; k + 1 < px.size(); ++k)
        set_edge(parent_bond[px[k]]);
      for (std::size_t k = 0; k + 1 < py.size(); ++k)
        set_edge(parent_bond[py[k]]);
      set_edge(b);
      c.key = c.atoms;
      std::sort(c.key.begin(), c.key.end());
      candidates.push_back(std::move(c));
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate &a, const Candidate &b) {
    if (a.atoms.size() != b.atoms.size())
      return a.atoms.size() < b.atoms.size();
    if (a.key != b.key)
      return a.key < b.key;
    return a.edges < b.edges;
  });

  // Greedy independent selection over GF(2).
  std::vector<std::vector<std::uint64_t>> basis;
  std::vector<int> pivots;
  std::vector<std::vector<int>> rings;
  const std::vector<std::uint64_t> *prev = nullptr;
  for (const Candidate &c: candidates) {
    if (static_cast<int>(rings.size()) >= target)
      break;
    if (prev != nullptr && *prev == c.edges)
      continue;
    prev = &c.edges;
    std::vector<std::uint64_t> row = c.edges;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      int p = pivots[k];
      if (row[p / 64] >> (p % 64) & 1) {
        for (int w = 0; w < words; ++w)
          row[w] ^= basis[k][w];
      }
    }
    int pivot = -1;
    for (int w = 0; w < words && pivot < 0; ++w) {
      if (row[w] != 0)
        pivot = w * 64 + __builtin_ctzll(row[w]);
    }
    if (pivot < 0)
      continue;
    // Keep the basis reduced with respect to the new pivot.
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (basis[k][pivot / 64] >> (pivot % 64) & 1) {
        for (int w = 0; w < words; ++w)
          basis[k][w] ^= row[w];
      }
    }
    basis.push_back(std::move(row));
    pivots.push_back(pivot);
    rings.push_back(c.atoms);
  }
  return rings;
}

namespace {

  bool is_lone_pair_heteroatom(int element) {
    return element == 7 || element == 8 || element == 16 || element == 15 || element == 34;
  }

  // Pi electrons an atom donates to a ring, or -1 when the atom cannot be part
  // of an aromatic ring.
  int ring_pi_electrons(const MolGraph &g, int i) {
    const Atom &a = g.atom(i);
    switch (a.element) {
    case 5:
    case 6:
    case 7:
    case 8:
    case 15:
    case 16:
    case 33:
    case 34:
    case 52:
      break;
    default:
      return -1;
    }
    int num_double = 0, double_bond = -1;
    for (const Neighbor &nb: g.neighbors(i)) {
      int k = g.bond(nb.bond).kekule;
      if (k == 3)
        return -1;
      if (k == 2) {
        ++num_double;
        double_bond = nb.bond;
      }
    }
    if (num_double > 1)
      return -1;
    if (num_double == 1) {
      const Bond &b = g.bond(double_bond);
      if (b.in_ring)
        return 1;
      int partner = b.other(i);
      return (a.element == 6 && is_lone_pair_heteroatom(g.atom(partner).element)) ? 0 : -1;
    }
    int connections = g.degree(i) + a.explicit_h;
    switch (a.element) {
    case 6:
      if (a.formal_charge == -1)
        return 2;
      if (a.formal_charge == 1)
        return 0;
      return -1;
    case 7:
    case 15:
    case 33:
      if (a.formal_charge == 0 && connections == 3)
        return 2;
      if (a.formal_charge == -1 && connections == 2)
        return 2;
      return -1;
    case 8:
    case 16:
    case 34:
    case 52:
      if (a.formal_charge == 0 && connections == 2)
        return 2;
      return -1;
    case 5:
      if (a.formal_charge == 0 && connections == 3)
        return 0;
      return -1;
    default:
      return -1;
    }
  }

  bool unsaturated_via_other(const MolGraph &g, int atom, int except_bond) {
    for (const Neighbor &nb: g.neighbors(atom)) {
      if (nb.bond == except_bond)
        continue;
      const Bond &b = g.bond(nb.bond);
      if (b.order != BondOrder::kSingle)
        return true;
    }
    return false;
  }

  bool has_lone_pair(const MolGraph &g, int atom) {
    const Atom &a = g.atom(atom);
    if (a.formal_charge > 0)
      return false;
    if (a.element == 7 || a.element == 8 || a.element == 16)
      return g.bond_valence(atom) == g.degree(atom);
    return false;
  }

}  // namespace
}  // namespace internal

void MolGraph::perceive() {
  std::vector<bool> ring_bond = internal::find_ring_bonds(*this);
  for (Atom &a: atoms_) {
    a.in_ring = false;
    a.aromatic = false;
  }
  for (int b = 0; b < num_bonds(); ++b) {
    Bond &bd = bonds_[b];
    bd.in_ring = ring_bond[b];
    if (bd.in_ring) {
      atoms_[bd.begin].in_ring = true;
      atoms_[bd.end].in_ring = true;
    }
    bd.order = static_cast<BondOrder>(bd.kekule);
  }
  rings_ = internal::find_sssr(*this, ring_bond);

  std::vector<int> electrons(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i)
    electrons[i] = atoms_[i].in_ring ? internal::ring_pi_electrons(*this, i) : -1;

  for (const auto &ring: rings_) {
    int total = 0;
    bool ok = true;
    for (int a: ring) {
      if (electrons[a] < 0) {
        ok = false;
        break;
      }
      total += electrons[a];
    }
    if (!ok || total < 2 || (total - 2) % 4 != 0)
      continue;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      int a = ring[k], b = ring[(k + 1) % ring.size()];
      atoms_[a].aromatic = true;
      bonds_[find_bond(a, b)].order = BondOrder::kAromatic;
    }
  }

  // Single bonds first: a single bond between two unsaturated atoms, or
  // between an unsaturated atom and a lone pair, is conjugated. A multiple
  // bond is conjugated when it touches a conjugated single bond.
  for (int b = 0; b < num_bonds(); ++b) {
    Bond &bd = bonds_[b];
    bd.conjugated = bd.order == BondOrder::kAromatic;
    if (bd.order != BondOrder::kSingle)
      continue;
    bool u1 = internal::unsaturated_via_other(*this, bd.begin, b);
    bool u2 = internal::unsaturated_via_other(*this, bd.end, b);
    bd.conjugated = (u1 && u2) || (u1 && internal::has_lone_pair(*this, bd.end))
                    || (u2 && internal::has_lone_pair(*this, bd.begin));
  }
  for (int b = 0; b < num_bonds(); ++b) {
    Bond &bd = bonds_[b];
    if (bd.order != BondOrder::kDouble && bd.order != BondOrder::kTriple)
      continue;
    for (int end: { bd.begin, bd.end }) {
      for (const Neighbor &nb: adj_[end]) {
        const Bond &o = bonds_[nb.bond];
        if (nb.bond != b && o.order == BondOrder::kSingle && o.conjugated)
          bd.conjugated = true;
      }
    }
  }
}

}  // namespace retro::chem
