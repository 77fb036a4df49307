//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/reaction/reaction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"

namespace retro::rxn {

using chem::BondOrder;
using chem::MolGraph;

ReactionRecord parse_reaction(std::string_view line) {
  ReactionRecord rec;
  rec.text = std::string(line);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
    line.remove_suffix(1);
  std::size_t arrow = line.find(">>");
  if (arrow == std::string_view::npos)
    throw SyntaxError("reaction line lacks '>>'");
  std::string_view lhs = line.substr(0, arrow);
  std::string_view rhs = line.substr(arrow + 2);
  std::size_t comma = lhs.find(',');
  if (comma != std::string_view::npos) {
    std::string_view prefix = lhs.substr(0, comma);
    if (prefix.empty() || !std::all_of(prefix.begin(), prefix.end(), [](char c) { return std::isdigit(c); }))
      throw SyntaxError("bad reaction type prefix");
    rec.reaction_type = std::stoi(std::string(prefix));
    if (rec.reaction_type < 1 || rec.reaction_type > 10)
      throw SyntaxError("reaction type outside 1..10");
    lhs = lhs.substr(comma + 1);
  }
  if (lhs.empty() || rhs.empty())
    throw SyntaxError("empty reactant or product side");

  rec.product = chem::parse_smiles(rhs);
  MolGraph all = chem::parse_smiles(lhs);

  std::set<int> product_maps;
  for (int i = 0; i < rec.product.num_atoms(); ++i) {
    int m = rec.product.atom(i).map_num;
    if (m <= 0)
      throw MappingError("unmapped product atom " + std::to_string(i));
    product_maps.insert(m);
  }

  // Keep reactant components that contribute at least one mapped atom; map
  // numbers absent from the product mark leaving atoms.
  int ncomp = 0;
  std::vector<int> comp = all.component_labels(&ncomp);
  std::vector<bool> keep(ncomp, false);
  for (int i = 0; i < all.num_atoms(); ++i) {
    chem::Atom &a = all.atom(i);
    if (a.map_num > 0 && !product_maps.count(a.map_num))
      a.map_num = 0;
    if (a.map_num > 0)
      keep[comp[i]] = true;
  }
  std::vector<int> kept;
  for (int i = 0; i < all.num_atoms(); ++i) {
    if (keep[comp[i]])
      kept.push_back(i);
  }
  rec.reactants = all.subgraph(kept);

  std::map<int, int> reactant_by_map;
  for (int i = 0; i < rec.reactants.num_atoms(); ++i) {
    int m = rec.reactants.atom(i).map_num;
    if (m > 0)
      reactant_by_map[m] = i;
  }
  rec.atom_map.resize(rec.product.num_atoms());
  for (int i = 0; i < rec.product.num_atoms(); ++i) {
    auto it = reactant_by_map.find(rec.product.atom(i).map_num);
    if (it == reactant_by_map.end())
      throw MappingError("product map number " + std::to_string(rec.product.atom(i).map_num)
                         + " missing from reactants");
    if (rec.reactants.atom(it->second).element != rec.product.atom(i).element)
      throw MappingError("mapped atoms differ in element");
    rec.atom_map[i] = it->second;
  }
  return rec;
}

std::vector<ReactionRecord> read_reactions(const std::string &path, std::vector<std::string> *errors) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::vector<ReactionRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#')
      continue;
    try {
      out.push_back(parse_reaction(line));
    } catch (const Error &e) {
      if (errors == nullptr)
        throw;
      errors->push_back(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

const char *center_kind_name(CenterKind kind) {
  switch (kind) {
  case CenterKind::kBF:
    return "BF";
  case CenterKind::kBC:
    return "BC";
  case CenterKind::kA:
    return "A";
  case CenterKind::kUnsupported:
    return "Unsupported";
  }
  return "?";
}

std::vector<int> neighbor_bonds(const MolGraph &g, int bond) {
  const chem::Bond &b = g.bond(bond);
  std::vector<int> out;
  for (int end: { b.begin, b.end }) {
    for (const chem::Neighbor &nb: g.neighbors(end)) {
      if (nb.bond != bond)
        out.push_back(nb.bond);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> center_atoms(const MolGraph &product, const CenterLabel &label) {
  switch (label.kind) {
  case CenterKind::kBF:
  case CenterKind::kBC: {
    const chem::Bond &b = product.bond(label.bond);
    return { std::min(b.begin, b.end), std::max(b.begin, b.end) };
  }
  case CenterKind::kA:
    return { label.atom };
  case CenterKind::kUnsupported:
    break;
  }
  return {};
}

std::vector<int> charge_candidates(const MolGraph &product, const CenterLabel &label) {
  std::vector<int> out = center_atoms(product, label);
  for (const BondChange &c: label.induced) {
    out.push_back(product.bond(c.bond).begin);
    out.push_back(product.bond(c.bond).end);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

CenterLabel unsupported(std::string reason) {
  CenterLabel l;
  l.kind = CenterKind::kUnsupported;
  l.reason = std::move(reason);
  return l;
}

}  // namespace

CenterLabel extract_center_label(const ReactionRecord &r) {
  const MolGraph &p = r.product;
  const MolGraph &re = r.reactants;

  std::vector<int> formed, changed;
  for (int b = 0; b < p.num_bonds(); ++b) {
    const chem::Bond &pb = p.bond(b);
    int rb = re.find_bond(r.atom_map[pb.begin], r.atom_map[pb.end]);
    if (rb < 0)
      formed.push_back(b);
    else if (re.bond(rb).order != pb.order)
      changed.push_back(b);
  }
  // Bonds between mapped atoms that exist only in the reactants.
  std::vector<int> product_of(re.num_atoms(), -1);
  for (int i = 0; i < p.num_atoms(); ++i)
    product_of[r.atom_map[i]] = i;
  for (int b = 0; b < re.num_bonds(); ++b) {
    const chem::Bond &rb = re.bond(b);
    int pa = product_of[rb.begin], pc = product_of[rb.end];
    if (pa >= 0 && pc >= 0 && p.find_bond(pa, pc) < 0)
      return unsupported("bond broken between mapped atoms");
  }

  auto original_order = [&](int product_bond, int *out) {
    const chem::Bond &pb = p.bond(product_bond);
    const chem::Bond &rb = re.bond(re.find_bond(r.atom_map[pb.begin], r.atom_map[pb.end]));
    if (rb.order == BondOrder::kAromatic || pb.order == BondOrder::kAromatic)
      return false;
    *out = static_cast<int>(rb.order);
    return true;
  };

  CenterLabel label;
  if (formed.size() == 1) {
    label.kind = CenterKind::kBF;
    label.bond = formed[0];
    std::vector<int> nbrs = neighbor_bonds(p, label.bond);
    for (int b: changed) {
      if (!std::binary_search(nbrs.begin(), nbrs.end(), b))
        return unsupported("bond change away from the formed bond");
      int order = 0;
      if (!original_order(b, &order))
        return unsupported("aromaticity change");
      label.induced.push_back({ b, order });
    }
  } else if (formed.empty() && changed.size() == 1) {
    label.kind = CenterKind::kBC;
    label.bond = changed[0];
    if (!original_order(label.bond, &label.original_order))
      return unsupported("aromaticity change");
    if (label.original_order == p.bond(label.bond).kekule)
      return unsupported("bond change keeps the localized order");
  } else if (formed.empty() && changed.empty()) {
    std::vector<int> with_leaving;
    for (int i = 0; i < p.num_atoms(); ++i) {
      for (const chem::Neighbor &nb: re.neighbors(r.atom_map[i])) {
        if (r.is_leaving(nb.atom)) {
          with_leaving.push_back(i);
          break;
        }
      }
    }
    if (with_leaving.size() != 1)
      return unsupported(with_leaving.empty() ? "no edit found" : "leaving groups at several atoms");
    label.kind = CenterKind::kA;
    label.atom = with_leaving[0];
  } else {
    return unsupported(formed.size() > 1 ? "several bonds formed" : "several bond changes");
  }

  std::vector<int> allowed = charge_candidates(p, label);
  for (int i = 0; i < p.num_atoms(); ++i) {
    int delta = re.atom(r.atom_map[i]).formal_charge - p.atom(i).formal_charge;
    if (delta == 0)
      continue;
    if (!std::binary_search(allowed.begin(), allowed.end(), i))
      return unsupported("charge change away from the center");
    label.charges.push_back({ i, std::clamp(delta, -1, 1) });
  }
  return label;
}

MolGraph derive_synthons(const MolGraph &product, const CenterLabel &label) {
  if (label.kind == CenterKind::kUnsupported)
    throw InvalidLabel("cannot derive synthons for an unsupported center");
  auto check_bond = [&](int b) {
    if (b < 0 || b >= product.num_bonds())
      throw InvalidLabel("center bond " + std::to_string(b) + " not in graph");
  };
  MolGraph s = product;
  std::vector<int> touched;
  switch (label.kind) {
  case CenterKind::kBF: {
    check_bond(label.bond);
    for (const BondChange &c: label.induced) {
      check_bond(c.bond);
      if (c.original_order < 1 || c.original_order > 3)
        throw InvalidLabel("bad original order");
      s.set_bond_order(c.bond, static_cast<BondOrder>(c.original_order));
      touched.push_back(product.bond(c.bond).begin);
      touched.push_back(product.bond(c.bond).end);
    }
    touched.push_back(product.bond(label.bond).begin);
    touched.push_back(product.bond(label.bond).end);
    s.remove_bond(label.bond);
    break;
  }
  case CenterKind::kBC:
    check_bond(label.bond);
    if (label.original_order < 1 || label.original_order > 3)
      throw InvalidLabel("bad original order");
    s.set_bond_order(label.bond, static_cast<BondOrder>(label.original_order));
    touched.push_back(product.bond(label.bond).begin);
    touched.push_back(product.bond(label.bond).end);
    break;
  case CenterKind::kA:
    if (label.atom < 0 || label.atom >= product.num_atoms())
      throw InvalidLabel("center atom not in graph");
    break;
  case CenterKind::kUnsupported:
    break;
  }
  for (const ChargeChange &c: label.charges) {
    if (c.atom < 0 || c.atom >= product.num_atoms())
      throw InvalidLabel("charge change atom not in graph");
    s.atom(c.atom).formal_charge += c.delta;
    touched.push_back(c.atom);
  }
  for (int a: touched)
    s.recompute_hydrogens(a);
  s.perceive();
  return s;
}

double CoverageStats::fraction(CenterKind kind) const {
  if (total() == 0)
    return 0.0;
  int n = kind == CenterKind::kBF ? bf : kind == CenterKind::kBC ? bc : kind == CenterKind::kA ? a : unsupported;
  return static_cast<double>(n) / total();
}

double CoverageStats::supported_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(bf + bc + a) / total();
}

CoverageStats coverage_stats(const std::vector<ReactionRecord> &records) {
  CoverageStats st;
  for (const ReactionRecord &r: records) {
    switch (extract_center_label(r).kind) {
    case CenterKind::kBF:
      ++st.bf;
      break;
    case CenterKind::kBC:
      ++st.bc;
      break;
    case CenterKind::kA:
      ++st.a;
      break;
    case CenterKind::kUnsupported:
      ++st.unsupported;
      break;
    }
  }
  return st;
}

std::string coverage_csv(const CoverageStats &st) {
  std::ostringstream os;
  os << "kind,count,fraction\n";
  for (CenterKind k: { CenterKind::kBF, CenterKind::kBC, CenterKind::kA, CenterKind::kUnsupported }) {
    int n = k == CenterKind::kBF ? st.bf : k == CenterKind::kBC ? st.bc : k == CenterKind::kA ? st.a : st.unsupported;
    os << center_kind_name(k) << "," << n << "," << st.fraction(k) << "\n";
  }
  os << "supported," << (st.bf + st.bc + st.a) << "," << st.supported_fraction() << "\n";
  return os.str();
}

}  // namespace retro::rxn
