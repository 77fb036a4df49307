//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/model/encoder.hpp"

#include "retrograph/brics.hpp"
#include "retrograph/chem/features.hpp"
#include "retrograph/error.hpp"

namespace retro::model {

using nn::Matrix;
using nn::Real;
using nn::Tape;
using nn::Var;

namespace {

Matrix to_matrix(const chem::FeatureTable &t) {
  Matrix m(t.rows, t.cols);
  for (int r = 0; r < t.rows; ++r) {
    for (int c = 0; c < t.cols; ++c)
      m(r, c) = static_cast<Real>(t.at(r, c));
  }
  return m;
}

// Message passing shared by GMPN and FMPN. `pre` holds the per-edge input
// term (node and edge features already projected). Returns the concatenated
// per-node incoming sums over all iterations.
Var pass_messages(Tape &tape, Var pre, Var w4, Var w1, const std::vector<int> &src, const std::vector<int> &dst,
                  const std::vector<int> &rev, int nodes, int iterations) {
  std::vector<Var> incoming;
  Var m;
  for (int t = 0; t < iterations; ++t) {
    Var z = pre;
    if (t > 0) {
      Var in = nn::scatter_add_rows(m, dst, nodes);
      Var agg = nn::sub(nn::gather_rows(in, src), nn::gather_rows(m, rev));
      z = nn::add(pre, nn::matmul(agg, w4));
    }
    m = nn::matmul(nn::relu(z), w1);
    incoming.push_back(nn::scatter_add_rows(m, dst, nodes));
  }
  (void)tape;
  return nn::concat_cols(incoming);
}

}  // namespace

GraphInput prepare_graph(const chem::MolGraph &g, int reaction_type, bool type_known, bool with_brics) {
  if (type_known && (reaction_type < 1 || reaction_type > chem::kNumReactionTypes))
    throw OutOfRange("reaction type required when the type is known");
  GraphInput in;
  in.atom_x = to_matrix(chem::atom_features(g, type_known ? reaction_type : 0));
  in.bond_x = to_matrix(chem::bond_features(g));
  if (in.bond_x.rows() == 0)
    in.bond_x.resize(0, chem::bond_feature_dim());
  for (const chem::Bond &b: g.bonds()) {
    in.bond_begin.push_back(b.begin);
    in.bond_end.push_back(b.end);
  }
  if (with_brics) {
    brics::BricsGraph bg = brics::fragment(g);
    in.membership = bg.membership;
    in.num_fragments = bg.num_nodes();
    for (const brics::FragmentEdge &e: bg.edges) {
      in.frag_u.push_back(e.u);
      in.frag_v.push_back(e.v);
      in.frag_atom_u.push_back(e.atom_u);
      in.frag_atom_v.push_back(e.atom_v);
    }
  }
  return in;
}

GraphBatch make_batch(const std::vector<const GraphInput *> &graphs) {
  if (graphs.empty())
    throw EmptyBatch("no graphs to batch");
  GraphBatch b;
  b.num_graphs = static_cast<int>(graphs.size());
  int na = 0, nb = 0;
  b.has_brics = true;
  for (const GraphInput *g: graphs) {
    na += g->num_atoms();
    nb += g->num_bonds();
    b.has_brics = b.has_brics && (g->num_fragments > 0 || g->num_atoms() == 0);
  }
  int adim = static_cast<int>(graphs[0]->atom_x.cols());
  int bdim = static_cast<int>(graphs[0]->bond_x.cols());
  b.atom_x.resize(na, adim);
  b.bond_x.resize(nb, bdim);
  int ao = 0, bo = 0, fo = 0;
  for (int gi = 0; gi < b.num_graphs; ++gi) {
    const GraphInput &g = *graphs[gi];
    if (g.atom_x.cols() != adim || g.bond_x.cols() != bdim)
      throw ShapeMismatch("graphs with different feature widths in one batch");
    b.atom_offset.push_back(ao);
    b.bond_offset.push_back(bo);
    if (g.num_atoms() > 0)
      b.atom_x.middleRows(ao, g.num_atoms()) = g.atom_x;
    if (g.num_bonds() > 0)
      b.bond_x.middleRows(bo, g.num_bonds()) = g.bond_x;
    for (int i = 0; i < g.num_atoms(); ++i)
      b.atom_graph.push_back(gi);
    for (int k = 0; k < g.num_bonds(); ++k) {
      int u = ao + g.bond_begin[k], v = ao + g.bond_end[k];
      int e = static_cast<int>(b.src.size());
      b.bond_begin.push_back(u);
      b.bond_end.push_back(v);
      b.src.insert(b.src.end(), { u, v });
      b.dst.insert(b.dst.end(), { v, u });
      b.rev.insert(b.rev.end(), { e + 1, e });
      b.edge_bond.insert(b.edge_bond.end(), { bo + k, bo + k });
    }
    if (b.has_brics) {
      for (int m: g.membership)
        b.membership.push_back(fo + m);
      for (std::size_t k = 0; k < g.frag_u.size(); ++k) {
        int e = static_cast<int>(b.fsrc.size());
        b.fsrc.insert(b.fsrc.end(), { fo + g.frag_u[k], fo + g.frag_v[k] });
        b.fdst.insert(b.fdst.end(), { fo + g.frag_v[k], fo + g.frag_u[k] });
        b.frev.insert(b.frev.end(), { e + 1, e });
        // The edge atom lies in the source fragment of each direction.
        b.fedge_atom.insert(b.fedge_atom.end(), { ao + g.frag_atom_u[k], ao + g.frag_atom_v[k] });
      }
      fo += g.num_fragments;
    }
    ao += g.num_atoms();
    bo += g.num_bonds();
  }
  b.atom_offset.push_back(ao);
  b.bond_offset.push_back(bo);
  b.num_fragments = fo;
  return b;
}

Encoder::Encoder(std::string prefix, EncoderConfig config, int atom_dim, int bond_dim)
  : prefix_(std::move(prefix)), config_(config), atom_dim_(atom_dim), bond_dim_(bond_dim) {
  if (config_.hidden < 1 || config_.t_a < 0 || (config_.use_brics && config_.t_e < 1))
    throw ConfigError("invalid encoder configuration");
}

void Encoder::init(nn::ParamStore &store, std::mt19937_64 &rng) const {
  int h = config_.hidden;
  auto add = [&](const char *name, int r, int c) { store.add(prefix_ + name, r, c, rng); };
  add("W_a1", h, h);
  add("W_a2", atom_dim_, h);
  add("W_a3", bond_dim_, h);
  add("W_a4", h, h);
  add("U_a1", h, h);
  add("U_a2", atom_dim_, h);
  if (config_.t_a > 0)
    add("U_a3", h * config_.t_a, h);
  add("U_b1", h, h);
  add("U_b2", bond_dim_, h);
  add("U_b3", h, h);
  add("U_b4", h, h);
  if (config_.use_brics) {
    add("W_e1", h, h);
    add("W_e2", h, h);
    add("W_e3", h, h);
    add("W_e4", h, h);
    add("U_e1", h, h);
    add("U_e2", h, h);
    add("U_e3", h * config_.t_e, h);
    add("V", 2 * h, h);
  }
}

Var Encoder::p(Tape &tape, nn::ParamStore &store, const char *name) const {
  return tape.param(store, prefix_ + name);
}

Var Encoder::gmpn(Tape &tape, nn::ParamStore &store, const GraphBatch &batch) const {
  Var x = tape.constant(batch.atom_x);
  Var self = nn::matmul(x, p(tape, store, "U_a2"));
  if (config_.t_a == 0 || batch.num_bonds() == 0) {
    // No messages: the neighbor term vanishes.
    return nn::matmul(nn::relu(self), p(tape, store, "U_a1"));
  }
  Var xb = tape.constant(batch.bond_x);
  Var pre = nn::add(nn::gather_rows(nn::matmul(x, p(tape, store, "W_a2")), batch.src),
                    nn::gather_rows(nn::matmul(xb, p(tape, store, "W_a3")), batch.edge_bond));
  Var msgs = pass_messages(tape, pre, p(tape, store, "W_a4"), p(tape, store, "W_a1"), batch.src, batch.dst,
                           batch.rev, batch.num_atoms(), config_.t_a);
  Var z = nn::add(self, nn::matmul(msgs, p(tape, store, "U_a3")));
  return nn::matmul(nn::relu(z), p(tape, store, "U_a1"));
}

Var Encoder::fmpn(Tape &tape, nn::ParamStore &store, const GraphBatch &batch, Var atoms) const {
  if (!batch.has_brics)
    throw ConfigError("batch was prepared without BRICS data");
  Var s = nn::scatter_add_rows(atoms, batch.membership, batch.num_fragments);
  Var self = nn::matmul(s, p(tape, store, "U_e2"));
  if (batch.fsrc.empty()) {
    // Zero neighbor contribution.
    return nn::matmul(nn::relu(self), p(tape, store, "U_e1"));
  }
  Var pre = nn::add(nn::gather_rows(nn::matmul(s, p(tape, store, "W_e2")), batch.fsrc),
                    nn::matmul(nn::gather_rows(atoms, batch.fedge_atom), p(tape, store, "W_e3")));
  Var msgs = pass_messages(tape, pre, p(tape, store, "W_e4"), p(tape, store, "W_e1"), batch.fsrc, batch.fdst,
                           batch.frev, batch.num_fragments, config_.t_e);
  Var z = nn::add(self, nn::matmul(msgs, p(tape, store, "U_e3")));
  return nn::matmul(nn::relu(z), p(tape, store, "U_e1"));
}

Var Encoder::enrich(Tape &tape, nn::ParamStore &store, const GraphBatch &batch, Var atoms, Var frags) const {
  Var per_atom = nn::gather_rows(frags, batch.membership);
  return nn::matmul(nn::concat_cols({ atoms, per_atom }), p(tape, store, "V"));
}

Var Encoder::bond_embed(Tape &tape, nn::ParamStore &store, const GraphBatch &batch, Var atoms) const {
  Var ai = nn::gather_rows(atoms, batch.bond_begin);
  Var aj = nn::gather_rows(atoms, batch.bond_end);
  Var xb = tape.constant(batch.bond_x);
  Var z = nn::add({ nn::matmul(xb, p(tape, store, "U_b2")), nn::matmul(nn::add(ai, aj), p(tape, store, "U_b3")),
                    nn::matmul(nn::abs_diff(ai, aj), p(tape, store, "U_b4")) });
  return nn::matmul(nn::relu(z), p(tape, store, "U_b1"));
}

Embeddings Encoder::encode(Tape &tape, nn::ParamStore &store, const GraphBatch &batch, bool with_bonds) const {
  Embeddings out;
  Var atoms = gmpn(tape, store, batch);
  out.graphs = nn::scatter_add_rows(atoms, batch.atom_graph, batch.num_graphs);
  if (config_.use_brics)
    atoms = enrich(tape, store, batch, atoms, fmpn(tape, store, batch, atoms));
  out.atoms = atoms;
  if (with_bonds && batch.num_bonds() > 0)
    out.bonds = bond_embed(tape, store, batch, atoms);
  return out;
}

}  // namespace retro::model
