//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/isomorphism.hpp"

#include <algorithm>
#include <deque>

namespace retro::chem {
namespace {

class Matcher {
public:
  Matcher(const MolGraph &a, const MolGraph &b, const MatchOptions &opts) :
      a_(a), b_(b), opts_(opts), map_a_(a.num_atoms(), -1), map_b_(b.num_atoms(), -1) {}

  bool run() {
    // BFS order per component keeps each new atom adjacent to matched ones.
    std::vector<bool> seen(a_.num_atoms(), false);
    for (int s = 0; s < a_.num_atoms(); ++s) {
      if (seen[s])
        continue;
      std::deque<int> queue { s };
      seen[s] = true;
      while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        order_.push_back(u);
        for (const Neighbor &nb: a_.neighbors(u)) {
          if (!seen[nb.atom]) {
            seen[nb.atom] = true;
            queue.push_back(nb.atom);
          }
        }
      }
    }
    return extend(0);
  }

  const std::vector<int> &mapping() const { return map_a_; }

private:
  bool atoms_compatible(int x, int y) const {
    const Atom &p = a_.atom(x);
    const Atom &q = b_.atom(y);
    if (p.element != q.element || p.formal_charge != q.formal_charge || p.aromatic != q.aromatic)
      return false;
    if (a_.degree(x) != b_.degree(y))
      return false;
    if (opts_.compare_hydrogens && p.explicit_h != q.explicit_h)
      return false;
    if (opts_.compare_map_nums && p.map_num != q.map_num)
      return false;
    return true;
  }

  bool consistent(int x, int y) const {
    for (const Neighbor &nb: a_.neighbors(x)) {
      int my = map_a_[nb.atom];
      if (my < 0)
        continue;
      int bb = b_.find_bond(y, my);
      if (bb < 0 || b_.bond(bb).order != a_.bond(nb.bond).order)
        return false;
    }
    int mapped_a = 0, mapped_b = 0;
    for (const Neighbor &nb: a_.neighbors(x))
      mapped_a += map_a_[nb.atom] >= 0;
    for (const Neighbor &nb: b_.neighbors(y))
      mapped_b += map_b_[nb.atom] >= 0;
    return mapped_a == mapped_b;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size())
      return true;
    int x = order_[depth];
    // Candidates: neighbors of the image of a matched neighbor, else all atoms.
    int anchor = -1;
    for (const Neighbor &nb: a_.neighbors(x)) {
      if (map_a_[nb.atom] >= 0) {
        anchor = map_a_[nb.atom];
        break;
      }
    }
    auto try_candidate = [&](int y) {
      if (map_b_[y] >= 0 || !atoms_compatible(x, y) || !consistent(x, y))
        return false;
      map_a_[x] = y;
      map_b_[y] = x;
      if (extend(depth + 1))
        return true;
      map_a_[x] = -1;
      map_b_[y] = -1;
      return false;
    };
    if (anchor >= 0) {
      for (const Neighbor &nb: b_.neighbors(anchor)) {
        if (try_candidate(nb.atom))
          return true;
      }
      return false;
    }
    for (int y = 0; y < b_.num_atoms(); ++y) {
      if (try_candidate(y))
        return true;
    }
    return false;
  }

  const MolGraph &a_;
  const MolGraph &b_;
  MatchOptions opts_;
  std::vector<int> map_a_, map_b_;
  std::vector<int> order_;
};

bool quick_reject(const MolGraph &a, const MolGraph &b) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds())
    return true;
  auto signature = [](const MolGraph &g) {
    std::vector<std::pair<int, int>> sig;
    for (int i = 0; i < g.num_atoms(); ++i)
      sig.push_back({ g.atom(i).element * 16 + g.degree(i), g.atom(i).formal_charge });
    std::sort(sig.begin(), sig.end());
    return sig;
  };
  return signature(a) != signature(b);
}

}  // namespace

bool find_isomorphism(const MolGraph &a, const MolGraph &b, std::vector<int> *mapping,
                      const MatchOptions &opts) {
  if (quick_reject(a, b))
    return false;
  Matcher m(a, b, opts);
  if (!m.run())
    return false;
  if (mapping != nullptr)
    *mapping = m.mapping();
  return true;
}

bool isomorphic(const MolGraph &a, const MolGraph &b, const MatchOptions &opts) {
  return find_isomorphism(a, b, nullptr, opts);
}

}  // namespace retro::chem
