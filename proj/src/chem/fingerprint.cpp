//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "retrograph/error.hpp"

namespace retro::chem {
namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finalizer folded into a running hash.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

}  // namespace

MorganFingerprint::MorganFingerprint(int width, int radius) : width_(width), radius_(radius) {
  if (width < 1 || radius < 0)
    throw std::invalid_argument("fingerprint width must be >= 1 and radius >= 0");
  words_.assign((width + 63) / 64, 0);
}

int MorganFingerprint::popcount() const {
  int n = 0;
  for (std::uint64_t w: words_)
    n += std::popcount(w);
  return n;
}

std::vector<int> MorganFingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < width_; ++i) {
    if (test(i))
      out.push_back(i);
  }
  return out;
}

std::uint64_t atom_invariant_hash(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  std::uint64_t h = 0x51ed270b27a4f3c5ULL;
  h = mix(h, static_cast<std::uint64_t>(a.element));
  h = mix(h, static_cast<std::uint64_t>(g.degree(i)));
  h = mix(h, static_cast<std::uint64_t>(a.explicit_h));
  h = mix(h, static_cast<std::uint64_t>(a.formal_charge + 8));
  h = mix(h, a.in_ring ? 1 : 0);
  h = mix(h, a.aromatic ? 1 : 0);
  return h;
}

std::uint64_t environment_hash(std::uint64_t self, std::vector<std::pair<int, std::uint64_t>> neighbors) {
  std::sort(neighbors.begin(), neighbors.end());
  std::uint64_t h = mix(0x2545f4914f6cdd1dULL, self);
  for (auto [bond, id]: neighbors) {
    h = mix(h, static_cast<std::uint64_t>(bond));
    h = mix(h, id);
  }
  return h;
}

MorganFingerprint morgan_fingerprint(const MolGraph &g, int radius, int width) {
  MorganFingerprint fp(width, radius);
  const int n = g.num_atoms();
  std::vector<std::uint64_t> ids(n), next(n);
  for (int i = 0; i < n; ++i) {
    ids[i] = atom_invariant_hash(g, i);
    fp.set(static_cast<int>(ids[i] % static_cast<std::uint64_t>(width)));
  }
  std::vector<std::pair<int, std::uint64_t>> nbrs;
  for (int r = 1; r <= radius; ++r) {
    for (int i = 0; i < n; ++i) {
      nbrs.clear();
      for (const Neighbor &nb: g.neighbors(i))
        nbrs.push_back({ static_cast<int>(g.bond(nb.bond).order), ids[nb.atom] });
      next[i] = environment_hash(ids[i], nbrs);
    }
    ids.swap(next);
    for (int i = 0; i < n; ++i)
      fp.set(static_cast<int>(ids[i] % static_cast<std::uint64_t>(width)));
  }
  return fp;
}

double tanimoto(const MorganFingerprint &a, const MorganFingerprint &b) {
  if (a.width() != b.width())
    throw WidthMismatch("fingerprint widths differ: " + std::to_string(a.width()) + " vs "
                        + std::to_string(b.width()));
  int inter = 0, uni = 0;
  for (std::size_t k = 0; k < a.words().size(); ++k) {
    inter += std::popcount(a.words()[k] & b.words()[k]);
    uni += std::popcount(a.words()[k] | b.words()[k]);
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace retro::chem
