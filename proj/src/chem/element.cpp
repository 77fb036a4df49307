//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/element.hpp"

#include <algorithm>
#include <array>

#include "retrograph/error.hpp"

namespace retro::chem {
namespace {

constexpr std::array kElements {
  ElementInfo { 1, "H", 1, false, false },
  ElementInfo { 3, "Li", 1, false, false },
  ElementInfo { 5, "B", 3, true, false },
  ElementInfo { 6, "C", 4, true, false },
  ElementInfo { 7, "N", 5, true, false },
  ElementInfo { 8, "O", 6, true, false },
  ElementInfo { 9, "F", 7, true, false },
  ElementInfo { 11, "Na", 1, false, false },
  ElementInfo { 12, "Mg", 2, false, false },
  ElementInfo { 13, "Al", 3, false, false },
  ElementInfo { 14, "Si", 4, false, false },
  ElementInfo { 15, "P", 5, true, true },
  ElementInfo { 16, "S", 6, true, true },
  ElementInfo { 17, "Cl", 7, true, true },
  ElementInfo { 19, "K", 1, false, false },
  ElementInfo { 20, "Ca", 2, false, false },
  ElementInfo { 22, "Ti", 0, false, false },
  ElementInfo { 24, "Cr", 0, false, false },
  ElementInfo { 25, "Mn", 0, false, false },
  ElementInfo { 26, "Fe", 0, false, false },
  ElementInfo { 27, "Co", 0, false, false },
  ElementInfo { 28, "Ni", 0, false, false },
  ElementInfo { 29, "Cu", 0, false, false },
  ElementInfo { 30, "Zn", 2, false, false },
  ElementInfo { 32, "Ge", 4, false, false },
  ElementInfo { 33, "As", 5, false, true },
  ElementInfo { 34, "Se", 6, false, true },
  ElementInfo { 35, "Br", 7, true, true },
  ElementInfo { 46, "Pd", 0, false, false },
  ElementInfo { 47, "Ag", 0, false, false },
  ElementInfo { 50, "Sn", 4, false, false },
  ElementInfo { 52, "Te", 6, false, true },
  ElementInfo { 53, "I", 7, true, true },
  ElementInfo { 54, "Xe", 8, false, false },
  ElementInfo { 78, "Pt", 0, false, false },
  ElementInfo { 79, "Au", 0, false, false },
  ElementInfo { 80, "Hg", 0, false, false },
};

// Elements observed in USPTO-style reactant/product sets.
constexpr std::array kAlphabet {
  6, 7, 8, 16, 9, 14, 15, 17, 35, 12, 11, 20, 26, 13, 53,
  5, 19, 34, 30, 1, 29, 25, 50, 3, 46, 24, 32, 33, 52, 47,
};

}  // namespace

const ElementInfo *find_element(std::string_view symbol) {
  auto it = std::find_if(kElements.begin(), kElements.end(),
                         [&](const ElementInfo &e) { return e.symbol == symbol; });
  return it == kElements.end() ? nullptr : &*it;
}

const ElementInfo &element(int atomic_number) {
  auto it = std::find_if(kElements.begin(), kElements.end(), [&](const ElementInfo &e) {
    return e.atomic_number == atomic_number;
  });
  if (it == kElements.end())
    throw UnknownElement("unknown atomic number " + std::to_string(atomic_number));
  return *it;
}

std::string_view element_symbol(int atomic_number) {
  return element(atomic_number).symbol;
}

int alphabet_index(int atomic_number) {
  auto it = std::find(kAlphabet.begin(), kAlphabet.end(), atomic_number);
  return it == kAlphabet.end() ? -1 : static_cast<int>(it - kAlphabet.begin());
}

int alphabet_size() {
  return static_cast<int>(kAlphabet.size());
}

bool has_hydrogen_model(int atomic_number) {
  const ElementInfo &e = element(atomic_number);
  return e.valence_electrons > 0 && e.valence_electrons < 8;
}

std::vector<int> allowed_valences(int atomic_number, int formal_charge) {
  const ElementInfo &e = element(atomic_number);
  if (!has_hydrogen_model(atomic_number))
    return { 0, 1, 2, 3, 4, 5, 6, 7, 8 };

  // Isoelectronic shift: a cation behaves like the element to its left.
  int ve = e.valence_electrons - formal_charge;
  if (ve < 0 || ve > 8)
    return {};
  int base = ve <= 4 ? ve : 8 - ve;
  std::vector<int> out { base };
  if (e.hypervalent && ve >= 5) {
    for (int v = base + 2; v <= ve; v += 2)
      out.push_back(v);
  }
  return out;
}

int smallest_valence_at_least(int atomic_number, int formal_charge, int used) {
  for (int v: allowed_valences(atomic_number, formal_charge)) {
    if (v >= used)
      return v;
  }
  return -1;
}

int max_valence(int atomic_number, int formal_charge) {
  auto vs = allowed_valences(atomic_number, formal_charge);
  return vs.empty() ? -1 : vs.back();
}

}  // namespace retro::chem
