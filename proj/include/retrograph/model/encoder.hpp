//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_MODEL_ENCODER_HPP_
#define RETROGRAPH_MODEL_ENCODER_HPP_

#include <random>
#include <string>
#include <vector>

#include "retrograph/chem/mol_graph.hpp"
#include "retrograph/nn/tensor.hpp"

namespace retro::model {

struct EncoderConfig {
  int hidden = 512;
  int t_a = 7;  // GMPN iterations; 0 reduces the readout to a per-atom MLP
  int t_e = 7;  // FMPN iterations
  bool use_brics = false;
  bool type_known = false;
};

// Featurized graph, prepared once and reused across epochs.
struct GraphInput {
  nn::Matrix atom_x;
  nn::Matrix bond_x;
  std::vector<int> bond_begin, bond_end;
  // BRICS data, filled when requested.
  std::vector<int> membership;
  int num_fragments = 0;
  std::vector<int> frag_u, frag_v, frag_atom_u, frag_atom_v;

  int num_atoms() const { return static_cast<int>(atom_x.rows()); }
  int num_bonds() const { return static_cast<int>(bond_begin.size()); }
};

// `reaction_type` is 1..10 when the type is known, else 0.
GraphInput prepare_graph(const chem::MolGraph &g, int reaction_type, bool type_known, bool with_brics);

// Disjoint union of several graphs. Directed edge 2k runs begin->end of bond
// k, edge 2k+1 the reverse.
struct GraphBatch {
  nn::Matrix atom_x, bond_x;
  std::vector<int> bond_begin, bond_end;
  std::vector<int> src, dst, rev, edge_bond;
  std::vector<int> atom_graph;
  std::vector<int> atom_offset, bond_offset;  // per graph, plus a final total
  int num_graphs = 0;
  bool has_brics = false;
  std::vector<int> membership;
  int num_fragments = 0;
  std::vector<int> fsrc, fdst, frev, fedge_atom;

  int num_atoms() const { return static_cast<int>(atom_x.rows()); }
  int num_bonds() const { return static_cast<int>(bond_begin.size()); }
};

GraphBatch make_batch(const std::vector<const GraphInput *> &graphs);

struct Embeddings {
  nn::Var atoms;   // enriched when BRICS is on
  nn::Var graphs;  // one row per graph, sum of unenriched atom rows
  nn::Var bonds;   // empty unless requested
};

class Encoder {
public:
  Encoder() = default;
  Encoder(std::string prefix, EncoderConfig config, int atom_dim, int bond_dim);

  void init(nn::ParamStore &store, std::mt19937_64 &rng) const;
  Embeddings encode(nn::Tape &tape, nn::ParamStore &store, const GraphBatch &batch, bool with_bonds) const;

  // Pieces of encode(), exposed for tests.
  nn::Var gmpn(nn::Tape &tape, nn::ParamStore &store, const GraphBatch &batch) const;
  nn::Var fmpn(nn::Tape &tape, nn::ParamStore &store, const GraphBatch &batch, nn::Var atoms) const;
  nn::Var enrich(nn::Tape &tape, nn::ParamStore &store, const GraphBatch &batch, nn::Var atoms, nn::Var frags) const;
  nn::Var bond_embed(nn::Tape &tape, nn::ParamStore &store, const GraphBatch &batch, nn::Var atoms) const;

  const EncoderConfig &config() const { return config_; }
  const std::string &prefix() const { return prefix_; }

private:
  nn::Var p(nn::Tape &tape, nn::ParamStore &store, const char *name) const;

  std::string prefix_;
  EncoderConfig config_;
  int atom_dim_ = 0;
  int bond_dim_ = 0;
};

}  // namespace retro::model

#endif  // RETROGRAPH_MODEL_ENCODER_HPP_
