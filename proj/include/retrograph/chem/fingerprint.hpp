//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_FINGERPRINT_HPP_
#define RETROGRAPH_CHEM_FINGERPRINT_HPP_

#include <cstdint>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"

namespace retro::chem {

class MorganFingerprint {
public:
  MorganFingerprint(int width, int radius);

  int width() const { return width_; }
  int radius() const { return radius_; }
  void set(int bit) { words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64); }
  bool test(int bit) const { return (words_[bit / 64] >> (bit % 64)) & 1; }
  int popcount() const;
  std::vector<int> on_bits() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  bool operator==(const MorganFingerprint &o) const = default;

private:
  int width_;
  int radius_;
  std::vector<std::uint64_t> words_;
};

// Identifier of an atom's radius-0 environment.
std::uint64_t atom_invariant_hash(const MolGraph &g, int atom);
// Identifier update from the previous-radius id and its neighbor (bond, id)
// pairs; the pairs are sorted internally.
std::uint64_t environment_hash(std::uint64_t self, std::vector<std::pair<int, std::uint64_t>> neighbors);

MorganFingerprint morgan_fingerprint(const MolGraph &g, int radius = 2, int width = 2048);

// |a & b| / |a | b|; 1.0 when both are empty.
double tanimoto(const MorganFingerprint &a, const MorganFingerprint &b);

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_FINGERPRINT_HPP_
