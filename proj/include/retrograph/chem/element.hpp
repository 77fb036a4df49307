//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_CHEM_ELEMENT_HPP_
#define RETROGRAPH_CHEM_ELEMENT_HPP_

#include <string_view>
#include <vector>

namespace retro::chem {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  // Valence electrons for main-group elements; 0 marks a metal without an
  // implicit-hydrogen model.
  int valence_electrons;
  bool organic_subset;
  bool hypervalent;
};

const ElementInfo *find_element(std::string_view symbol);
const ElementInfo &element(int atomic_number);
std::string_view element_symbol(int atomic_number);

// Position in the fixed featurization alphabet, or -1 when the element is
// outside it.
int alphabet_index(int atomic_number);
int alphabet_size();

// Allowed total valences (bond orders + hydrogens) for an element in the
// given formal charge, ascending. Empty when the charge is impossible.
// Metals report {0..8}.
std::vector<int> allowed_valences(int atomic_number, int formal_charge);

// Smallest allowed valence >= used, or -1 when none exists.
int smallest_valence_at_least(int atomic_number, int formal_charge, int used);

int max_valence(int atomic_number, int formal_charge);

bool has_hydrogen_model(int atomic_number);

}  // namespace retro::chem

#endif  // RETROGRAPH_CHEM_ELEMENT_HPP_
