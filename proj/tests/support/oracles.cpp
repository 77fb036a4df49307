//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "retrograph/chem/smiles.hpp"

namespace retro::testing {

std::string data_path(const std::string &name) { return std::string(RETROGRAPH_DATA_DIR) + "/" + name; }

std::string test_data_path(const std::string &name) { return std::string(RETROGRAPH_TEST_DATA_DIR) + "/" + name; }

std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!line.empty() && line[0] != '#')
      out.push_back(line);
  }
  return out;
}

GradCheck check_gradients(nn::ParamStore &store, const std::function<nn::Var(nn::Tape &)> &loss, double h,
                          int max_entries, double floor) {
  GradCheck out;
  store.zero_grad();
  {
    nn::Tape tape;
    nn::Var l = loss(tape);
    tape.backward(l, &store);
  }
  double base = 0.0;
  {
    nn::Tape tape;
    base = loss(tape).scalar();
    tape.clear();
  }
  auto evaluate = [&] {
    nn::Tape tape;
    double v = loss(tape).scalar();
    tape.clear();
    return v;
  };
  for (auto &[name, param]: store.all()) {
    long size = param.value.size();
    std::vector<long> entries;
    if (max_entries <= 0 || size <= max_entries) {
      entries.resize(size);
      std::iota(entries.begin(), entries.end(), 0L);
    } else {
      for (int i = 0; i < max_entries; ++i)
        entries.push_back(i * size / max_entries);
    }
    for (long e: entries) {
      nn::Real &x = param.value.data()[e];
      nn::Real saved = x;
      x = saved + 2 * h;
      double up2 = evaluate();
      x = saved + h;
      double up = evaluate();
      x = saved - h;
      double down = evaluate();
      x = saved - 2 * h;
      double down2 = evaluate();
      x = saved;
      double numeric = (up - down) / (2 * h);
      double analytic = param.grad.size() == 0 ? 0.0 : param.grad.data()[e];
      ++out.probed;
      // Consecutive slope changes agree for a smooth function; a kink puts
      // its jump into one or two of them.
      double d1 = ((down - down2) - (base - down)) / h;
      double d2 = ((base - down) - (up - base)) / h;
      double d3 = ((up - base) - (up2 - up)) / h;
      double spread = std::max({ d1, d2, d3 }) - std::min({ d1, d2, d3 });
      if (spread > 1e-7 + 0.5 * std::max({ std::abs(d1), std::abs(d2), std::abs(d3) })) {
        ++out.kinks;
        continue;
      }
      double rel = std::abs(analytic - numeric) / std::max({ std::abs(analytic), std::abs(numeric), floor });
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = name + "[" + std::to_string(e) + "]";
      }
    }
  }
  return out;
}

namespace {

// Identifier of `atom` at `radius`, recomputed from scratch at every level.
std::uint64_t environment_id(const chem::MolGraph &g, int atom, int radius) {
  if (radius == 0)
    return chem::atom_invariant_hash(g, atom);
  std::vector<std::pair<int, std::uint64_t>> nbrs;
  for (const chem::Neighbor &n: g.neighbors(atom)) {
    nbrs.emplace_back(static_cast<int>(g.bond(n.bond).order), environment_id(g, n.atom, radius - 1));
  }
  return chem::environment_hash(environment_id(g, atom, radius - 1), nbrs);
}

}  // namespace

std::set<int> brute_force_morgan_bits(const chem::MolGraph &g, int radius, int width) {
  std::set<int> bits;
  for (int a = 0; a < g.num_atoms(); ++a) {
    for (int r = 0; r <= radius; ++r)
      bits.insert(static_cast<int>(environment_id(g, a, r) % static_cast<std::uint64_t>(width)));
  }
  return bits;
}

namespace {

struct Partial {
  rxn::IntermediateGraph ig;
  std::vector<int> actions;
};

void enumerate(const Partial &p, const rxn::SubstructureVocab &vocab, const model::StepScorer &scorer, int max_steps,
               std::vector<model::CompletedPath> &out) {
  if (p.ig.complete()) {
    model::CompletedPath c;
    c.graph = p.ig.graph;
    c.graph.clear_map_numbers();
    if (!c.graph.all_valences_ok())
      return;
    c.smiles = chem::write_smiles(c.graph);
    c.score = p.ig.score;
    c.synthon_index = p.ig.synthon_index;
    c.actions = p.actions;
    out.push_back(std::move(c));
    return;
  }
  if (static_cast<int>(p.actions.size()) >= max_steps)
    return;
  model::StepScores sc = scorer(p.ig);
  {
    Partial c = p;
    rxn::stop(c.ig);
    c.ig.score += sc.stop;
    c.ig.step += 1;
    c.actions.push_back(-1);
    enumerate(c, vocab, scorer, max_steps, out);
  }
  for (int u = 0; u < static_cast<int>(sc.unit.size()); ++u) {
    if (sc.unit[u] == -std::numeric_limits<double>::infinity())
      continue;
    Partial c = p;
    rxn::attach(c.ig, vocab.unit(u));
    c.ig.score += sc.unit[u];
    c.ig.step += 1;
    c.actions.push_back(u);
    enumerate(c, vocab, scorer, max_steps, out);
  }
}

}  // namespace

std::vector<model::CompletedPath> exhaustive_completions(const std::vector<rxn::IntermediateGraph> &starts,
                                                         const rxn::SubstructureVocab &vocab,
                                                         const model::StepScorer &scorer, int max_steps, int n,
                                                         long *enumerated) {
  std::vector<model::CompletedPath> all;
  for (const rxn::IntermediateGraph &s: starts)
    enumerate(Partial{ s, {} }, vocab, scorer, max_steps, all);
  if (enumerated != nullptr)
    *enumerated = static_cast<long>(all.size());
  std::sort(all.begin(), all.end(), model::path_before);
  if (static_cast<int>(all.size()) > n)
    all.resize(n);
  return all;
}

std::string marked_center_key(const chem::MolGraph &product, const model::CenterCandidate &c) {
  chem::MolGraph g = product;
  g.clear_map_numbers();
  std::string tag = rxn::center_kind_name(c.kind);
  if (c.kind == rxn::CenterKind::kA) {
    g.atom(c.atom).map_num = 1;
  } else {
    g.atom(g.bond(c.bond).begin).map_num = 1;
    g.atom(g.bond(c.bond).end).map_num = 1;
    if (c.kind == rxn::CenterKind::kBC)
      tag += std::to_string(c.bc_original_order);
  }
  return tag + ":" + chem::write_smiles(g);
}

std::vector<int> random_permutation(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

}  // namespace retro::testing
