//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/model/center.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "retrograph/chem/features.hpp"
#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"

namespace retro::model {

using chem::MolGraph;
using nn::Matrix;
using nn::Real;
using nn::Tape;
using nn::Var;
using rxn::CenterKind;

int acp_class(int delta) {
  if (delta < 0)
    return kAcpAccept;
  if (delta > 0)
    return kAcpDonate;
  return kAcpNone;
}

int acp_delta(int cls) {
  switch (cls) {
  case kAcpAccept:
    return -1;
  case kAcpDonate:
    return 1;
  default:
    return 0;
  }
}

std::vector<std::uint8_t> joint_mask(const MolGraph &product) {
  CandidateIndex idx{ product.num_atoms(), product.num_bonds() };
  std::vector<std::uint8_t> mask(idx.size(), 1);
  for (int b = 0; b < product.num_bonds(); ++b)
    mask[idx.bc(b, product.bond(b).kekule)] = 0;
  return mask;
}

int label_joint_index(const MolGraph &product, const rxn::CenterLabel &label) {
  CandidateIndex idx{ product.num_atoms(), product.num_bonds() };
  switch (label.kind) {
  case CenterKind::kBF:
    return idx.bf(label.bond);
  case CenterKind::kBC:
    return idx.bc(label.bond, label.original_order);
  case CenterKind::kA:
    return idx.atom(label.atom);
  case CenterKind::kUnsupported:
    break;
  }
  throw InvalidLabel("unsupported center has no candidate index");
}

namespace {

std::string synthon_key(MolGraph g) {
  g.clear_map_numbers();
  return chem::write_smiles(g);
}

// Transform-embedding terms of a label: (bond, x' code).
void transform_inputs(const rxn::CenterLabel &label, std::vector<int> *bonds, std::vector<int> *codes) {
  if (label.kind == CenterKind::kBF) {
    bonds->push_back(label.bond);
    codes->push_back(0);
    for (const rxn::BondChange &c: label.induced) {
      bonds->push_back(c.bond);
      codes->push_back(c.original_order);
    }
  } else if (label.kind == CenterKind::kBC) {
    bonds->push_back(label.bond);
    codes->push_back(label.original_order);
  }
}

// Index of the largest entry; ties go to `preferred` when it is among the
// maxima, otherwise to the lowest index.
int argmax_row(const Matrix &m, int row, int preferred = -1) {
  int best = 0;
  for (int c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best))
      best = c;
  }
  if (preferred >= 0 && m(row, preferred) == m(row, best))
    return preferred;
  return best;
}

std::vector<int> repeat(int value, std::size_t n) { return std::vector<int>(n, value); }

}  // namespace

CenterExample make_center_example(const MolGraph &product, const rxn::CenterLabel &label, int reaction_type,
                                  const EncoderConfig &config) {
  CenterExample ex;
  ex.product = product;
  ex.label = label;
  ex.input = prepare_graph(product, reaction_type, config.type_known, config.use_brics);
  ex.joint_target = label_joint_index(product, label);
  if (label.kind == CenterKind::kBF) {
    ex.neighbor_bonds = rxn::neighbor_bonds(product, label.bond);
    for (int b: ex.neighbor_bonds) {
      int cls = 0;
      for (const rxn::BondChange &c: label.induced) {
        if (c.bond == b)
          cls = c.original_order;
      }
      ex.neighbor_targets.push_back(cls);
    }
  }
  transform_inputs(label, &ex.transform_bonds, &ex.transform_codes);
  ex.acp_atoms = rxn::charge_candidates(product, label);
  for (int a: ex.acp_atoms) {
    int delta = 0;
    for (const rxn::ChargeChange &c: label.charges) {
      if (c.atom == a)
        delta = c.delta;
    }
    ex.acp_targets.push_back(acp_class(delta));
  }
  ex.synthon_smiles = synthon_key(rxn::derive_synthons(product, label));
  return ex;
}

std::string SynthonPrediction::description() const {
  std::ostringstream os;
  os << rxn::center_kind_name(label.kind);
  if (label.kind == CenterKind::kA) {
    os << ":" << label.atom;
  } else {
    os << ":bond" << label.bond;
    if (label.kind == CenterKind::kBC)
      os << "=" << label.original_order;
  }
  for (const rxn::BondChange &c: label.induced)
    os << ";bond" << c.bond << "=" << c.original_order;
  for (const rxn::ChargeChange &c: label.charges)
    os << ";atom" << c.atom << (c.delta > 0 ? "+" : "-");
  return os.str();
}

CenterModel::CenterModel(EncoderConfig config)
  : config_(config),
    encoder_("enc/", config, chem::atom_feature_dim(config.type_known), chem::bond_feature_dim()) {}

void CenterModel::init(nn::ParamStore &store, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  encoder_.init(store, rng);
  int h = config_.hidden;
  store.add("head/q_b", h, 1, rng);
  store.add("head/Q_b1", h, h, rng);
  store.add("head/Q_b2", h, h, rng);
  store.add("head/Q_c1", h, 3, rng);
  store.add("head/Q_c2", h, h, rng);
  store.add("head/Q_c3", h, h, rng);
  store.add("head/q_a", h, 1, rng);
  store.add("head/Q_a1", h, h, rng);
  store.add("head/Q_a2", h, h, rng);
  store.add("head/V_b1", h, kBtcpClasses, rng);
  store.add("head/V_b2", h, kBtcpClasses, rng);
  store.add("head/V_b3", h, kBtcpClasses, rng);
  store.add("head/W_c1", h, h, rng);
  store.add("head/W_c2", kBtcpClasses, h, rng);
  store.add("head/W_c3", h, h, rng);
  store.add("head/V_c1", h, kAcpClasses, rng);
  store.add("head/V_c2", h, kAcpClasses, rng);
}

Var CenterModel::score_bf(Tape &t, nn::ParamStore &s, Var bonds, Var hp) const {
  Var z = nn::add(nn::matmul(bonds, t.param(s, "head/Q_b1")), nn::matmul(hp, t.param(s, "head/Q_b2")));
  return nn::matmul(nn::relu(z), t.param(s, "head/q_b"));
}

Var CenterModel::score_bc(Tape &t, nn::ParamStore &s, Var bonds, Var hp) const {
  Var z = nn::add(nn::matmul(bonds, t.param(s, "head/Q_c2")), nn::matmul(hp, t.param(s, "head/Q_c3")));
  return nn::matmul(nn::relu(z), t.param(s, "head/Q_c1"));
}

Var CenterModel::score_a(Tape &t, nn::ParamStore &s, Var atoms, Var hp) const {
  Var z = nn::add(nn::matmul(atoms, t.param(s, "head/Q_a1")), nn::matmul(hp, t.param(s, "head/Q_a2")));
  return nn::matmul(nn::relu(z), t.param(s, "head/q_a"));
}

Var CenterModel::btcp_logits(Tape &t, nn::ParamStore &s, Var neighbor, Var center, Var hp) const {
  return nn::add({ nn::matmul(neighbor, t.param(s, "head/V_b1")), nn::matmul(center, t.param(s, "head/V_b2")),
                   nn::matmul(hp, t.param(s, "head/V_b3")) });
}

Var CenterModel::transform_terms(Tape &t, nn::ParamStore &s, Var bonds, const std::vector<int> &codes) const {
  Matrix onehot = Matrix::Zero(static_cast<Eigen::Index>(codes.size()), kBtcpClasses);
  for (std::size_t i = 0; i < codes.size(); ++i)
    onehot(static_cast<Eigen::Index>(i), codes[i]) = 1;
  Var z = nn::add(nn::matmul(t.constant(std::move(onehot)), t.param(s, "head/W_c2")),
                  nn::matmul(bonds, t.param(s, "head/W_c3")));
  return nn::matmul(nn::relu(z), t.param(s, "head/W_c1"));
}

Var CenterModel::acp_logits(Tape &t, nn::ParamStore &s, Var atoms, Var c) const {
  return nn::add(nn::matmul(atoms, t.param(s, "head/V_c1")), nn::matmul(c, t.param(s, "head/V_c2")));
}

CenterModel::Forward CenterModel::forward(Tape &t, nn::ParamStore &s, const GraphBatch &batch,
                                          const std::vector<const MolGraph *> &products) const {
  Forward f;
  f.emb = encoder_.encode(t, s, batch, true);
  int nb = batch.num_bonds();
  std::vector<int> atom_graph = batch.atom_graph;
  Var sa = score_a(t, s, f.emb.atoms, nn::gather_rows(f.emb.graphs, atom_graph));
  Var all = sa;
  if (nb > 0) {
    std::vector<int> bond_graph(nb);
    for (int k = 0; k < nb; ++k)
      bond_graph[k] = batch.atom_graph[batch.bond_begin[k]];
    Var hp_b = nn::gather_rows(f.emb.graphs, bond_graph);
    Var sb = score_bf(t, s, f.emb.bonds, hp_b);
    Var sc = nn::reshape(score_bc(t, s, f.emb.bonds, hp_b), 3 * nb, 1);
    all = nn::concat_rows({ sb, sc, sa });
  }
  std::vector<int> order;
  std::vector<std::uint8_t> mask;
  f.starts.push_back(0);
  for (int p = 0; p < batch.num_graphs; ++p) {
    int ao = batch.atom_offset[p], bo = batch.bond_offset[p];
    int pa = batch.atom_offset[p + 1] - ao, pb = batch.bond_offset[p + 1] - bo;
    for (int k = 0; k < pb; ++k)
      order.push_back(bo + k);
    for (int k = 0; k < pb; ++k) {
      for (int j = 0; j < 3; ++j)
        order.push_back(nb + 3 * (bo + k) + j);
    }
    for (int i = 0; i < pa; ++i)
      order.push_back(4 * nb + ao + i);
    std::vector<std::uint8_t> m = joint_mask(*products[p]);
    mask.insert(mask.end(), m.begin(), m.end());
    f.starts.push_back(static_cast<int>(order.size()));
  }
  f.joint = nn::log_softmax_segments(nn::gather_rows(all, std::move(order)), f.starts, &mask);
  return f;
}

Var CenterModel::loss(Tape &t, nn::ParamStore &s, const std::vector<const CenterExample *> &batch) const {
  if (batch.empty())
    throw EmptyBatch("center loss over an empty batch");
  std::vector<const GraphInput *> inputs;
  std::vector<const MolGraph *> products;
  for (const CenterExample *ex: batch) {
    inputs.push_back(&ex->input);
    products.push_back(&ex->product);
  }
  GraphBatch gb = make_batch(inputs);
  Forward f = forward(t, s, gb, products);

  std::vector<std::pair<int, int>> targets;
  std::vector<int> nb_rows, center_rows, nb_graph, nb_targets;
  std::vector<int> tf_rows, tf_codes, tf_graph;
  std::vector<int> acp_rows, acp_graph, acp_targets;
  for (int p = 0; p < gb.num_graphs; ++p) {
    const CenterExample &ex = *batch[p];
    int ao = gb.atom_offset[p], bo = gb.bond_offset[p];
    targets.emplace_back(f.starts[p] + ex.joint_target, 0);
    for (std::size_t k = 0; k < ex.neighbor_bonds.size(); ++k) {
      nb_rows.push_back(bo + ex.neighbor_bonds[k]);
      center_rows.push_back(bo + ex.label.bond);
      nb_graph.push_back(p);
      nb_targets.push_back(ex.neighbor_targets[k]);
    }
    for (std::size_t k = 0; k < ex.transform_bonds.size(); ++k) {
      tf_rows.push_back(bo + ex.transform_bonds[k]);
      tf_codes.push_back(ex.transform_codes[k]);
      tf_graph.push_back(p);
    }
    for (std::size_t k = 0; k < ex.acp_atoms.size(); ++k) {
      acp_rows.push_back(ao + ex.acp_atoms[k]);
      acp_graph.push_back(p);
      acp_targets.push_back(ex.acp_targets[k]);
    }
  }
  std::vector<Var> terms;
  terms.push_back(nn::scale(nn::sum_all(nn::pick(f.joint, std::move(targets))), Real(-1)));
  if (!nb_rows.empty()) {
    Var logits = btcp_logits(t, s, nn::gather_rows(f.emb.bonds, nb_rows), nn::gather_rows(f.emb.bonds, center_rows),
                             nn::gather_rows(f.emb.graphs, nb_graph));
    terms.push_back(nn::nll_rows(nn::log_softmax_rows(logits), nb_targets));
  }
  if (!acp_rows.empty()) {
    Var c;
    if (!tf_rows.empty()) {
      Var rows = transform_terms(t, s, nn::gather_rows(f.emb.bonds, tf_rows), tf_codes);
      c = nn::scatter_add_rows(rows, tf_graph, gb.num_graphs);
    } else {
      c = t.constant(Matrix::Zero(gb.num_graphs, config_.hidden));
    }
    Var logits = acp_logits(t, s, nn::gather_rows(f.emb.atoms, acp_rows), nn::gather_rows(c, acp_graph));
    terms.push_back(nn::nll_rows(nn::log_softmax_rows(logits), acp_targets));
  }
  Var total = terms[0];
  for (std::size_t k = 1; k < terms.size(); ++k)
    total = nn::add(total, terms[k]);
  return nn::scale(total, Real(1) / static_cast<Real>(batch.size()));
}

std::vector<CenterCandidate> CenterModel::ranked(const MolGraph &product, const Forward &f) const {
  CandidateIndex idx{ product.num_atoms(), product.num_bonds() };
  const Matrix &lp = f.joint.value();
  std::vector<CenterCandidate> out;
  auto push = [&](CenterCandidate c) {
    double v = static_cast<double>(lp(c.joint_index, 0));
    if (std::isinf(v))
      return;
    c.log_prob = v;
    out.push_back(c);
  };
  for (int b = 0; b < idx.num_bonds; ++b) {
    CenterCandidate c;
    c.kind = CenterKind::kBF;
    c.bond = b;
    c.joint_index = idx.bf(b);
    push(c);
  }
  for (int b = 0; b < idx.num_bonds; ++b) {
    for (int order = 1; order <= 3; ++order) {
      CenterCandidate c;
      c.kind = CenterKind::kBC;
      c.bond = b;
      c.bc_original_order = order;
      c.joint_index = idx.bc(b, order);
      push(c);
    }
  }
  for (int a = 0; a < idx.num_atoms; ++a) {
    CenterCandidate c;
    c.kind = CenterKind::kA;
    c.atom = a;
    c.joint_index = idx.atom(a);
    push(c);
  }
  std::stable_sort(out.begin(), out.end(), [](const CenterCandidate &a, const CenterCandidate &b) {
    return a.log_prob > b.log_prob;
  });
  return out;
}

std::vector<CenterCandidate> CenterModel::rank_candidates(nn::ParamStore &s, const MolGraph &product,
                                                          const GraphInput &input) const {
  Tape t;
  Forward f = forward(t, s, make_batch({ &input }), { &product });
  return ranked(product, f);
}

SynthonPrediction CenterModel::p2s(Tape &t, nn::ParamStore &s, const MolGraph &product, const Forward &f,
                                   const CenterCandidate &cand) const {
  SynthonPrediction out;
  out.center = cand;
  out.score = cand.log_prob;
  rxn::CenterLabel &label = out.label;
  label.kind = cand.kind;
  label.bond = cand.bond;
  label.atom = cand.atom;
  label.original_order = cand.bc_original_order;

  if (cand.kind == CenterKind::kBF) {
    std::vector<int> nbs = rxn::neighbor_bonds(product, cand.bond);
    if (!nbs.empty()) {
      Var logits = btcp_logits(t, s, nn::gather_rows(f.emb.bonds, nbs),
                               nn::gather_rows(f.emb.bonds, repeat(cand.bond, nbs.size())),
                               nn::gather_rows(f.emb.graphs, repeat(0, nbs.size())));
      const Matrix &lp = nn::log_softmax_rows(logits).value();
      for (std::size_t k = 0; k < nbs.size(); ++k) {
        int cls = argmax_row(lp, static_cast<int>(k), 0);
        out.score += static_cast<double>(lp(static_cast<Eigen::Index>(k), cls));
        if (cls != 0)
          label.induced.push_back({ nbs[k], cls });
      }
    }
  }

  std::vector<int> acp_atoms = rxn::charge_candidates(product, label);
  std::vector<int> tf_bonds, tf_codes;
  transform_inputs(label, &tf_bonds, &tf_codes);
  Var c;
  if (tf_bonds.empty()) {
    c = t.constant(Matrix::Zero(1, config_.hidden));
  } else {
    c = nn::sum_rows(transform_terms(t, s, nn::gather_rows(f.emb.bonds, tf_bonds), tf_codes));
  }
  Var logits = acp_logits(t, s, nn::gather_rows(f.emb.atoms, acp_atoms), nn::gather_rows(c, repeat(0, acp_atoms.size())));
  const Matrix &lp = nn::log_softmax_rows(logits).value();
  for (std::size_t k = 0; k < acp_atoms.size(); ++k) {
    int cls = argmax_row(lp, static_cast<int>(k), kAcpNone);
    out.score += static_cast<double>(lp(static_cast<Eigen::Index>(k), cls));
    int delta = acp_delta(cls);
    if (delta != 0)
      label.charges.push_back({ acp_atoms[k], delta });
  }

  for (const rxn::ChargeChange &ch: label.charges) {
    int q = product.atom(ch.atom).formal_charge + ch.delta;
    if (q < -2 || q > 2)
      throw ChemicallyInvalid("charge outside the supported range");
  }
  try {
    out.synthons = rxn::derive_synthons(product, label);
  } catch (const ValenceError &e) {
    throw ChemicallyInvalid(std::string("p2s: ") + e.what());
  }
  if (!out.synthons.all_valences_ok())
    throw ChemicallyInvalid("p2s left an atom over its valence");
  return out;
}

SynthonPrediction CenterModel::apply_p2s(nn::ParamStore &s, const MolGraph &product, const GraphInput &input,
                                         const CenterCandidate &cand) const {
  Tape t;
  Forward f = forward(t, s, make_batch({ &input }), { &product });
  return p2s(t, s, product, f, cand);
}

std::vector<SynthonPrediction> CenterModel::top_k(nn::ParamStore &s, const MolGraph &product, const GraphInput &input,
                                                  int k) const {
  if (k < 1)
    throw ConfigError("K must be positive");
  Tape t;
  Forward f = forward(t, s, make_batch({ &input }), { &product });
  std::vector<CenterCandidate> all = ranked(product, f);
  std::vector<CenterCandidate> pool;
  for (CenterKind kind: { CenterKind::kBF, CenterKind::kBC, CenterKind::kA }) {
    int taken = 0;
    for (const CenterCandidate &c: all) {
      if (c.kind == kind && taken < k) {
        pool.push_back(c);
        ++taken;
      }
    }
  }
  std::stable_sort(pool.begin(), pool.end(), [](const CenterCandidate &a, const CenterCandidate &b) {
    if (a.log_prob != b.log_prob)
      return a.log_prob > b.log_prob;
    return a.joint_index < b.joint_index;
  });
  if (static_cast<int>(pool.size()) > k)
    pool.resize(k);
  std::vector<SynthonPrediction> out;
  for (const CenterCandidate &c: pool) {
    try {
      out.push_back(p2s(t, s, product, f, c));
    } catch (const ChemicallyInvalid &) {
    } catch (const ValenceError &) {
    }
  }
  if (out.empty())
    throw NoValidCenter("no chemically valid center among the top candidates");
  return out;
}

}  // namespace retro::model
