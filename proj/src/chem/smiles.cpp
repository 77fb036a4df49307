//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>

#include "retrograph/chem/element.hpp"
#include "retrograph/error.hpp"

namespace retro::chem {
namespace {

enum class BondSym { kNone, kSingle, kDouble, kTriple, kAromatic };

struct ParsedAtom {
  Atom atom;
  bool bracket = false;
};

struct ParsedBond {
  int a, b;
  BondSym sym;
};

bool is_organic_symbol(std::string_view s) {
  static constexpr std::string_view kOrganic[] = { "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I" };
  return std::find(std::begin(kOrganic), std::end(kOrganic), s) != std::end(kOrganic);
}

bool is_aromatic_organic(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

class Parser {
public:
  Parser(std::string_view text, std::vector<std::string> *warnings) : s_(text), warnings_(warnings) {}

  MolGraph run();

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw SyntaxError(msg + " at position " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }
  void warn(const std::string &msg) {
    if (warnings_ != nullptr)
      warnings_->push_back(msg);
  }
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }

  int parse_bracket();
  int parse_organic();
  void add_bond(int a, int b, BondSym sym);

  std::string_view s_;
  std::vector<std::string> *warnings_;
  std::size_t pos_ = 0;
  std::vector<ParsedAtom> atoms_;
  std::vector<ParsedBond> bonds_;
};

int Parser::parse_organic() {
  char c = peek();
  ParsedAtom pa;
  if (is_aromatic_organic(c)) {
    pa.atom.element = find_element(std::string(1, static_cast<char>(std::toupper(c))))->atomic_number;
    pa.atom.aromatic = true;
    ++pos_;
  } else {
    std::string sym(1, c);
    if (pos_ + 1 < s_.size() && ((c == 'C' && s_[pos_ + 1] == 'l') || (c == 'B' && s_[pos_ + 1] == 'r')))
      sym.push_back(s_[pos_ + 1]);
    if (!is_organic_symbol(sym))
      fail("unexpected character '" + std::string(1, c) + "'");
    pa.atom.element = find_element(sym)->atomic_number;
    pos_ += sym.size();
  }
  atoms_.push_back(pa);
  return static_cast<int>(atoms_.size()) - 1;
}

int Parser::parse_bracket() {
  ++pos_;  // '['
  ParsedAtom pa;
  pa.bracket = true;
  if (std::isdigit(static_cast<unsigned char>(peek()))) {
    while (std::isdigit(static_cast<unsigned char>(peek())))
      ++pos_;
    warn("isotope label dropped");
  }
  if (done())
    fail("unterminated bracket atom");
  std::string sym;
  char c = peek();
  if (std::islower(static_cast<unsigned char>(c))) {
    // Aromatic bracket symbols: b c n o p s se as te.
    std::string two = std::string(s_.substr(pos_, 2));
    if (two == "se" || two == "as" || two == "te") {
      sym = std::string(1, static_cast<char>(std::toupper(two[0]))) + two[1];
      pos_ += 2;
    } else if (is_aromatic_organic(c)) {
      sym = std::string(1, static_cast<char>(std::toupper(c)));
      ++pos_;
    } else {
      fail("bad aromatic symbol");
    }
    pa.atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(c))) {
    sym.push_back(c);
    ++pos_;
    if (std::islower(static_cast<unsigned char>(peek()))) {
      std::string cand = sym + peek();
      if (find_element(cand) != nullptr) {
        sym = cand;
        ++pos_;
      }
    }
  } else {
    fail("expected element symbol");
  }
  const ElementInfo *info = find_element(sym);
  if (info == nullptr)
    throw UnknownElement("unknown element '" + sym + "'");
  pa.atom.element = info->atomic_number;

  if (peek() == '@') {
    while (peek() == '@')
      ++pos_;
    warn("chirality dropped");
  }
  pa.atom.explicit_h = 0;
  if (peek() == 'H') {
    ++pos_;
    int h = 1;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      h = peek() - '0';
      ++pos_;
    }
    pa.atom.explicit_h = h;
  }
  if (peek() == '+' || peek() == '-') {
    char sign = peek();
    int mag = 0;
    while (peek() == sign) {
      ++mag;
      ++pos_;
    }
    if (mag == 1 && std::isdigit(static_cast<unsigned char>(peek()))) {
      mag = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        mag = mag * 10 + (peek() - '0');
        ++pos_;
      }
    }
    int charge = sign == '+' ? mag : -mag;
    if (charge < -2 || charge > 2)
      fail("formal charge out of range");
    pa.atom.formal_charge = charge;
  }
  if (peek() == ':') {
    ++pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      fail("bad atom map");
    int m = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      m = m * 10 + (peek() - '0');
      ++pos_;
    }
    pa.atom.map_num = m;
  }
  if (peek() != ']')
    fail("expected ']'");
  ++pos_;
  atoms_.push_back(pa);
  return static_cast<int>(atoms_.size()) - 1;
}

void Parser::add_bond(int a, int b, BondSym sym) {
  if (a == b)
    fail("self bond");
  for (const ParsedBond &pb: bonds_) {
    if ((pb.a == a && pb.b == b) || (pb.a == b && pb.b == a))
      fail("duplicate bond");
  }
  bonds_.push_back({ a, b, sym });
}

// Pi bond requirement and hydrogen count for an aromatic atom given the sum of
// its bond orders with aromatic bonds counted as one.
void aromatic_h_and_pi(const Atom &a, bool bracket, int s, int *h, bool *pi) {
  if (bracket) {
    int v = smallest_valence_at_least(a.element, a.formal_charge, s + a.explicit_h);
    *h = a.explicit_h;
    *pi = v >= 0 && v - s - a.explicit_h >= 1;
    return;
  }
  int v = smallest_valence_at_least(a.element, a.formal_charge, s);
  if (v < 0)
    throw ValenceError("aromatic atom over valence");
  if (v - s >= 1) {
    *pi = true;
    *h = v - s - 1;
  } else {
    *pi = false;
    *h = 0;
  }
}

bool match_pi(const std::vector<std::vector<std::pair<int, int>>> &cand, std::vector<int> &mate,
              std::vector<int> &mate_bond, const std::vector<int> &need) {
  // Pick the unmatched atom with the fewest free partners.
  int best = -1, best_count = 1 << 30;
  for (int a: need) {
    if (mate[a] >= 0)
      continue;
    int count = 0;
    for (auto [b, bond]: cand[a]) {
      if (mate[b] < 0)
        ++count;
    }
    if (count < best_count) {
      best = a;
      best_count = count;
    }
  }
  if (best < 0)
    return true;
  if (best_count == 0)
    return false;
  for (auto [b, bond]: cand[best]) {
    if (mate[b] >= 0)
      continue;
    mate[best] = b;
    mate[b] = best;
    mate_bond[best] = mate_bond[b] = bond;
    if (match_pi(cand, mate, mate_bond, need))
      return true;
    mate[best] = mate[b] = -1;
  }
  return false;
}

MolGraph Parser::run() {
  if (s_.empty())
    throw SyntaxError("empty SMILES");
  int prev = -1;
  BondSym pending = BondSym::kNone;
  bool pending_set = false;
  std::vector<int> branch_stack;
  struct Open {
    int atom;
    BondSym sym;
  };
  std::map<int, Open> rings;

  while (!done()) {
    char c = peek();
    if (c == '(') {
      if (prev < 0)
        fail("branch without atom");
      branch_stack.push_back(prev);
      ++pos_;
    } else if (c == ')') {
      if (branch_stack.empty())
        fail("unbalanced ')'");
      if (pending_set)
        fail("dangling bond");
      prev = branch_stack.back();
      branch_stack.pop_back();
      ++pos_;
    } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
      if (pending_set)
        fail("consecutive bond symbols");
      if (c == '/' || c == '\\') {
        warn("bond direction dropped");
        pending = BondSym::kSingle;
      } else {
        pending = c == '-' ? BondSym::kSingle
                           : c == '=' ? BondSym::kDouble : c == '#' ? BondSym::kTriple : BondSym::kAromatic;
      }
      pending_set = true;
      ++pos_;
    } else if (c == '.') {
      if (pending_set || prev < 0)
        fail("misplaced '.'");
      prev = -1;
      ++pos_;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      if (prev < 0)
        fail("ring closure without atom");
      int num;
      if (c == '%') {
        if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))
            || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])))
          fail("bad %nn ring closure");
        num = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
        pos_ += 3;
      } else {
        num = c - '0';
        ++pos_;
      }
      auto it = rings.find(num);
      if (it == rings.end()) {
        rings[num] = { prev, pending_set ? pending : BondSym::kNone };
      } else {
        BondSym sym = it->second.sym;
        if (pending_set) {
          if (sym != BondSym::kNone && sym != pending)
            fail("conflicting ring bond symbols");
          sym = pending;
        }
        add_bond(it->second.atom, prev, sym);
        rings.erase(it);
      }
      pending_set = false;
      pending = BondSym::kNone;
    } else {
      int idx;
      if (c == '[')
        idx = parse_bracket();
      else
        idx = parse_organic();
      if (prev >= 0)
        add_bond(prev, idx, pending_set ? pending : BondSym::kNone);
      else if (pending_set)
        fail("bond without preceding atom");
      pending_set = false;
      pending = BondSym::kNone;
      prev = idx;
    }
  }
  if (!branch_stack.empty())
    fail("unbalanced '('");
  if (!rings.empty())
    fail("unclosed ring bond");
  if (pending_set)
    fail("dangling bond");
  if (atoms_.empty())
    fail("no atoms");

  std::map<int, int> seen_maps;
  for (const ParsedAtom &pa: atoms_) {
    if (pa.atom.map_num > 0 && seen_maps[pa.atom.map_num]++ > 0)
      throw MappingError("duplicate atom map number " + std::to_string(pa.atom.map_num));
  }

  MolGraph g;
  for (const ParsedAtom &pa: atoms_)
    g.add_atom(pa.atom);
  std::vector<bool> implicit_aromatic(bonds_.size(), false);
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const ParsedBond &pb = bonds_[i];
    BondOrder order = BondOrder::kSingle;
    switch (pb.sym) {
    case BondSym::kNone:
      if (atoms_[pb.a].atom.aromatic && atoms_[pb.b].atom.aromatic) {
        order = BondOrder::kAromatic;
        implicit_aromatic[i] = true;
      }
      break;
    case BondSym::kSingle:
      break;
    case BondSym::kDouble:
      order = BondOrder::kDouble;
      break;
    case BondSym::kTriple:
      order = BondOrder::kTriple;
      break;
    case BondSym::kAromatic:
      order = BondOrder::kAromatic;
      break;
    }
    g.add_bond(pb.a, pb.b, order, order == BondOrder::kAromatic ? 1 : 0);
  }

  // An implicit bond between aromatic atoms outside any ring is single.
  std::vector<bool> ring = internal::find_ring_bonds(g);
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (implicit_aromatic[b] && !ring[b])
      g.set_bond_order(b, BondOrder::kSingle, 1);
  }

  // Kekulize: aromatic atoms that need a pi bond are perfectly matched over
  // aromatic bonds.
  const int n = g.num_atoms();
  std::vector<bool> needs_pi(n, false);
  std::vector<int> need;
  for (int i = 0; i < n; ++i) {
    Atom &a = g.atom(i);
    if (!a.aromatic)
      continue;
    int s = 0, n_arom = 0;
    for (const Neighbor &nb: g.neighbors(i)) {
      const Bond &bd = g.bond(nb.bond);
      if (bd.order == BondOrder::kAromatic) {
        s += 1;
        ++n_arom;
      } else {
        s += static_cast<int>(bd.order);
      }
    }
    int h = 0;
    bool pi = false;
    aromatic_h_and_pi(a, atoms_[i].bracket, s, &h, &pi);
    if (n_arom == 0)
      pi = false;
    a.explicit_h = h;
    needs_pi[i] = pi;
    if (pi)
      need.push_back(i);
  }
  std::vector<std::vector<std::pair<int, int>>> cand(n);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bd = g.bond(b);
    if (bd.order == BondOrder::kAromatic && needs_pi[bd.begin] && needs_pi[bd.end]) {
      cand[bd.begin].push_back({ bd.end, b });
      cand[bd.end].push_back({ bd.begin, b });
    }
  }
  std::vector<int> mate(n, -1), mate_bond(n, -1);
  if (!match_pi(cand, mate, mate_bond, need))
    throw ValenceError("cannot kekulize '" + std::string(s_) + "'");
  for (int i: need) {
    int b = mate_bond[i];
    g.set_bond_order(b, BondOrder::kAromatic, 2);
  }

  for (int i = 0; i < n; ++i) {
    Atom &a = g.atom(i);
    if (a.aromatic) {
      if (!g.valence_ok(i))
        throw ValenceError("valence violation at atom " + std::to_string(i));
      continue;
    }
    if (!atoms_[i].bracket) {
      int used = g.bond_valence(i);
      int v = smallest_valence_at_least(a.element, 0, used);
      if (v < 0) {
        throw ValenceError("valence " + std::to_string(used) + " exceeds limit for "
                           + std::string(element_symbol(a.element)));
      }
      a.explicit_h = v - used;
    } else if (!g.valence_ok(i)) {
      throw ValenceError("valence violation at atom " + std::to_string(i));
    }
  }
  g.perceive();
  return g;
}

int bond_code(const Bond &b) {
  return static_cast<int>(b.order);
}

}  // namespace

MolGraph parse_smiles(std::string_view text, std::vector<std::string> *warnings) {
  Parser p(text, warnings);
  return p.run();
}

bool bare_atom_matches(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  const ElementInfo &info = element(a.element);
  if (!info.organic_subset || a.formal_charge != 0 || a.map_num != 0)
    return false;
  if (a.aromatic) {
    if (a.element != 5 && a.element != 6 && a.element != 7 && a.element != 8 && a.element != 15
        && a.element != 16)
      return false;
    int s = 0;
    bool actual_pi = false;
    for (const Neighbor &nb: g.neighbors(i)) {
      const Bond &bd = g.bond(nb.bond);
      if (bd.order == BondOrder::kAromatic) {
        s += 1;
        actual_pi = actual_pi || bd.kekule == 2;
      } else {
        s += static_cast<int>(bd.order);
      }
    }
    int v = smallest_valence_at_least(a.element, 0, s);
    if (v < 0)
      return false;
    bool pi = v - s >= 1;
    int h = pi ? v - s - 1 : 0;
    return pi == actual_pi && h == a.explicit_h;
  }
  int used = g.bond_valence(i);
  int v = smallest_valence_at_least(a.element, 0, used);
  return v >= 0 && v - used == a.explicit_h;
}

std::vector<int> canonical_ranks(const MolGraph &g, bool use_map_nums) {
  const int n = g.num_atoms();
  using Key = std::tuple<int, int, int, int, int, int, int>;
  std::vector<Key> inv(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = g.atom(i);
    inv[i] = { a.element, a.formal_charge, g.degree(i), a.explicit_h, a.aromatic ? 1 : 0,
               a.in_ring ? 1 : 0, use_map_nums ? a.map_num : 0 };
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return inv[x] < inv[y]; });
  std::vector<int> rank(n);
  for (int k = 0; k < n; ++k)
    rank[order[k]] = (k > 0 && inv[order[k]] == inv[order[k - 1]]) ? rank[order[k - 1]] : k;

  auto count_classes = [&](const std::vector<int> &r) {
    std::vector<int> tmp(r);
    std::sort(tmp.begin(), tmp.end());
    return static_cast<int>(std::unique(tmp.begin(), tmp.end()) - tmp.begin());
  };

  auto refine = [&]() {
    int classes = count_classes(rank);
    std::vector<std::vector<std::pair<int, int>>> sig(n);
    while (true) {
      for (int i = 0; i < n; ++i) {
        sig[i].clear();
        for (const Neighbor &nb: g.neighbors(i))
          sig[i].push_back({ rank[nb.atom], bond_code(g.bond(nb.bond)) });
        std::sort(sig[i].begin(), sig[i].end());
      }
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        if (rank[x] != rank[y])
          return rank[x] < rank[y];
        return sig[x] < sig[y];
      });
      std::vector<int> next(n);
      for (int k = 0; k < n; ++k) {
        bool same = k > 0 && rank[order[k]] == rank[order[k - 1]] && sig[order[k]] == sig[order[k - 1]];
        next[order[k]] = same ? next[order[k - 1]] : k;
      }
      rank.swap(next);
      int c = count_classes(rank);
      if (c == classes)
        break;
      classes = c;
    }
  };

  refine();
  while (count_classes(rank) < n) {
    // Break the smallest tied class at its lowest-index atom.
    std::vector<int> count(n, 0);
    for (int r: rank)
      ++count[r];
    int tied = -1;
    for (int r = 0; r < n; ++r) {
      if (count[r] > 1) {
        tied = r;
        break;
      }
    }
    int chosen = -1;
    for (int i = 0; i < n; ++i) {
      if (rank[i] == tied) {
        if (chosen < 0)
          chosen = i;
        else
          rank[i] = tied + 1;
      }
    }
    refine();
  }
  return rank;
}

namespace {

std::string atom_token(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  std::string sym(element_symbol(a.element));
  if (a.aromatic) {
    for (char &ch: sym)
      ch = static_cast<char>(std::tolower(ch));
  }
  if (bare_atom_matches(g, i))
    return sym;
  std::string out = "[" + sym;
  if (a.explicit_h == 1)
    out += "H";
  else if (a.explicit_h > 1)
    out += "H" + std::to_string(a.explicit_h);
  if (a.formal_charge == 1)
    out += "+";
  else if (a.formal_charge == -1)
    out += "-";
  else if (a.formal_charge > 1)
    out += "+" + std::to_string(a.formal_charge);
  else if (a.formal_charge < -1)
    out += "-" + std::to_string(-a.formal_charge);
  if (a.map_num > 0)
    out += ":" + std::to_string(a.map_num);
  out += "]";
  return out;
}

std::string bond_token(const MolGraph &g, const Bond &b) {
  switch (b.order) {
  case BondOrder::kAromatic:
    return "";
  case BondOrder::kDouble:
    return "=";
  case BondOrder::kTriple:
    return "#";
  case BondOrder::kSingle:
    return (g.atom(b.begin).aromatic && g.atom(b.end).aromatic) ? "-" : "";
  }
  return "";
}

std::string ring_label(int d) {
  return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
}

class Writer {
public:
  Writer(const MolGraph &g, const std::vector<int> &rank) :
      g_(g), rank_(rank), visited_(g.num_atoms(), false), tree_(g.num_bonds(), false),
      closures_(g.num_atoms()) {}

  std::string component(int start) {
    mark(start, -1);
    std::string out;
    emit(start, -1, out);
    return out;
  }

private:
  std::vector<Neighbor> sorted_neighbors(int u) const {
    std::vector<Neighbor> nbrs(g_.neighbors(u).begin(), g_.neighbors(u).end());
    std::sort(nbrs.begin(), nbrs.end(), [&](const Neighbor &x, const Neighbor &y) {
      return rank_[x.atom] < rank_[y.atom];
    });
    return nbrs;
  }

  void mark(int u, int parent_bond) {
    visited_[u] = true;
    for (const Neighbor &nb: sorted_neighbors(u)) {
      if (nb.bond == parent_bond)
        continue;
      if (!visited_[nb.atom]) {
        tree_[nb.bond] = true;
        mark(nb.atom, nb.bond);
      } else if (!tree_[nb.bond] && !closure_seen(nb.bond)) {
        closures_[u].push_back(nb.bond);
        closures_[nb.atom].push_back(nb.bond);
        closure_set_.push_back(nb.bond);
      }
    }
  }

  bool closure_seen(int bond) const {
    return std::find(closure_set_.begin(), closure_set_.end(), bond) != closure_set_.end();
  }

  void emit(int u, int parent_bond, std::string &out) {
    out += atom_token(g_, u);
    auto cl = closures_[u];
    std::sort(cl.begin(), cl.end(), [&](int x, int y) {
      return rank_[g_.bond(x).other(u)] < rank_[g_.bond(y).other(u)];
    });
    for (int b: cl) {
      auto it = digit_of_.find(b);
      if (it != digit_of_.end()) {
        out += ring_label(it->second);
        free_digit(it->second);
        digit_of_.erase(it);
      } else {
        int d = take_digit();
        digit_of_[b] = d;
        out += bond_token(g_, g_.bond(b)) + ring_label(d);
      }
    }
    std::vector<Neighbor> children;
    for (const Neighbor &nb: sorted_neighbors(u)) {
      if (nb.bond != parent_bond && tree_[nb.bond])
        children.push_back(nb);
    }
    for (std::size_t k = 0; k < children.size(); ++k) {
      bool branch = k + 1 < children.size();
      if (branch)
        out += "(";
      out += bond_token(g_, g_.bond(children[k].bond));
      emit(children[k].atom, children[k].bond, out);
      if (branch)
        out += ")";
    }
  }

  int take_digit() {
    int d = 1;
    while (std::find(used_digits_.begin(), used_digits_.end(), d) != used_digits_.end())
      ++d;
    used_digits_.push_back(d);
    return d;
  }
  void free_digit(int d) {
    used_digits_.erase(std::find(used_digits_.begin(), used_digits_.end(), d));
  }

  const MolGraph &g_;
  const std::vector<int> &rank_;
  std::vector<bool> visited_;
  std::vector<bool> tree_;
  std::vector<std::vector<int>> closures_;
  std::vector<int> closure_set_;
  std::map<int, int> digit_of_;
  std::vector<int> used_digits_;
};

}  // namespace

std::string write_smiles(const MolGraph &g) {
  if (g.num_atoms() == 0)
    return "";
  std::vector<int> rank = canonical_ranks(g);
  int ncomp = 0;
  std::vector<int> comp = g.component_labels(&ncomp);
  std::vector<int> start(ncomp, -1);
  for (int i = 0; i < g.num_atoms(); ++i) {
    int c = comp[i];
    if (start[c] < 0 || rank[i] < rank[start[c]])
      start[c] = i;
  }
  Writer w(g, rank);
  std::vector<std::string> parts;
  for (int c = 0; c < ncomp; ++c)
    parts.push_back(w.component(start[c]));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k > 0)
      out += ".";
    out += parts[k];
  }
  return out;
}

}  // namespace retro::chem
