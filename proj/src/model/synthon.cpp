//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/model/synthon.hpp"

#include <cmath>
#include <limits>

#include "retrograph/chem/features.hpp"
#include "retrograph/error.hpp"

namespace retro::model {

using chem::MolGraph;
using nn::Matrix;
using nn::Real;
using nn::Tape;
using nn::Var;

namespace {

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

std::vector<std::uint8_t> attach_mask(const MolGraph &g, int atom, const rxn::SubstructureVocab &vocab) {
  std::vector<std::uint8_t> mask(vocab.size(), 0);
  for (int k = 0; k < vocab.size(); ++k)
    mask[k] = rxn::can_attach(g, atom, vocab.unit(k)) ? 1 : 0;
  return mask;
}

CompletionExample make_completion_example(const rxn::LabeledReaction &lr, const rxn::SubstructureVocab &vocab,
                                          const EncoderConfig &config) {
  const rxn::Trace &trace = lr.trace;
  int rtype = lr.record.reaction_type;
  CompletionExample ex;
  ex.product = prepare_graph(lr.record.product, rtype, config.type_known, false);
  ex.synthons = prepare_graph(trace.synthons, rtype, config.type_known, false);
  rxn::IntermediateGraph ig = rxn::start_completion(trace.synthons, lr.record.product, trace.center);
  for (const rxn::TraceStep &step: trace.steps) {
    if (ig.complete() || ig.current() != step.atom)
      throw DecompositionError("trace does not follow the frontier");
    CompletionStep cs;
    cs.input = prepare_graph(ig.graph, rtype, config.type_known, false);
    cs.atom = step.atom;
    cs.attach = step.attach;
    cs.mask = attach_mask(ig.graph, step.atom, vocab);
    if (step.attach) {
      cs.unit = vocab.find(step.encoding);
      if (cs.unit < 0)
        throw OutOfRange("trace unit not in vocabulary: " + step.encoding);
      if (!cs.mask[cs.unit])
        throw InvalidLabel("ground-truth unit masked out");
      rxn::attach(ig, vocab.unit(cs.unit));
    } else {
      rxn::stop(ig);
    }
    ex.steps.push_back(std::move(cs));
  }
  if (!ig.complete())
    throw DecompositionError("trace ends with a non-empty frontier");
  return ex;
}

SynthonModel::SynthonModel(EncoderConfig config, int vocab_size)
  : config_(config), vocab_size_(vocab_size) {
  config_.use_brics = false;
  if (vocab_size_ < 0)
    throw ConfigError("negative vocabulary size");
  encoder_ = Encoder("enc/", config_, chem::atom_feature_dim(config_.type_known), chem::bond_feature_dim());
}

void SynthonModel::init(nn::ParamStore &store, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  encoder_.init(store, rng);
  int h = config_.hidden;
  store.add("head/V_o1", h, 1, rng);
  store.add("head/V_o2", h, 1, rng);
  store.add("head/V_o3", h, 1, rng);
  if (vocab_size_ > 0) {
    store.add("head/V_z1", h, vocab_size_, rng);
    store.add("head/V_z2", h, vocab_size_, rng);
    store.add("head/V_z3", h, vocab_size_, rng);
  }
}

Var SynthonModel::aacp_logits(Tape &t, nn::ParamStore &s, Var atoms, Var hs, Var hp) const {
  return nn::add({ nn::matmul(atoms, t.param(s, "head/V_o1")), nn::matmul(hs, t.param(s, "head/V_o2")),
                   nn::matmul(hp, t.param(s, "head/V_o3")) });
}

Var SynthonModel::aatp_logits(Tape &t, nn::ParamStore &s, Var atoms, Var hs, Var hp) const {
  return nn::add({ nn::matmul(atoms, t.param(s, "head/V_z1")), nn::matmul(hs, t.param(s, "head/V_z2")),
                   nn::matmul(hp, t.param(s, "head/V_z3")) });
}

SynthonModel::StepOutputs SynthonModel::forward(Tape &t, nn::ParamStore &s,
                                                const std::vector<const CompletionExample *> &batch) const {
  std::vector<const GraphInput *> inputs;
  std::vector<int> atom_rows, hs_rows, hp_rows;
  for (const CompletionExample *ex: batch) {
    int pg = static_cast<int>(inputs.size());
    inputs.push_back(&ex->product);
    inputs.push_back(&ex->synthons);
    for (const CompletionStep &st: ex->steps) {
      atom_rows.push_back(st.atom);  // offset added below
      hs_rows.push_back(pg + 1);
      hp_rows.push_back(pg);
      inputs.push_back(&st.input);
    }
  }
  GraphBatch gb = make_batch(inputs);
  Embeddings emb = encoder_.encode(t, s, gb, false);
  std::size_t k = 0;
  int gi = 0;
  for (const CompletionExample *ex: batch) {
    gi += 2;
    for (std::size_t j = 0; j < ex->steps.size(); ++j, ++k, ++gi)
      atom_rows[k] += gb.atom_offset[gi];
  }
  StepOutputs out;
  if (atom_rows.empty())
    return out;
  Var a = nn::gather_rows(emb.atoms, atom_rows);
  Var hs = nn::gather_rows(emb.graphs, hs_rows);
  Var hp = nn::gather_rows(emb.graphs, hp_rows);
  out.o = aacp_logits(t, s, a, hs, hp);
  if (vocab_size_ > 0)
    out.z = aatp_logits(t, s, a, hs, hp);
  return out;
}

Var SynthonModel::loss(Tape &t, nn::ParamStore &s, const std::vector<const CompletionExample *> &batch) const {
  if (batch.empty())
    throw EmptyBatch("completion loss over an empty batch");
  StepOutputs f = forward(t, s, batch);
  Real inv = Real(1) / static_cast<Real>(batch.size());
  if (!f.o.valid())
    return t.constant(Matrix::Zero(1, 1));
  std::vector<std::uint8_t> targets;
  std::vector<int> rows, labels;
  std::vector<std::uint8_t> mask;
  int k = 0;
  for (const CompletionExample *ex: batch) {
    for (const CompletionStep &st: ex->steps) {
      targets.push_back(st.attach ? 1 : 0);
      if (st.attach) {
        rows.push_back(k);
        labels.push_back(st.unit);
        mask.insert(mask.end(), st.mask.begin(), st.mask.end());
      }
      ++k;
    }
  }
  Var total = nn::bce_with_logits(f.o, targets);
  if (!rows.empty()) {
    Var lz = nn::log_softmax_rows(nn::gather_rows(f.z, rows), &mask);
    total = nn::add(total, nn::nll_rows(lz, labels));
  }
  return nn::scale(total, inv);
}

int SynthonModel::exact_trace_hits(nn::ParamStore &s, const std::vector<const CompletionExample *> &batch) const {
  if (batch.empty())
    return 0;
  Tape t;
  StepOutputs f = forward(t, s, batch);
  int hits = 0, k = 0;
  for (const CompletionExample *ex: batch) {
    bool ok = true;
    for (const CompletionStep &st: ex->steps) {
      // f^o >= 0.5 attaches; an exact tie stops.
      bool attach = f.o.value()(k, 0) > 0;
      if (attach != st.attach)
        ok = false;
      if (ok && attach) {
        int best = -1;
        for (int u = 0; u < vocab_size_; ++u) {
          if (st.mask[u] && (best < 0 || f.z.value()(k, u) > f.z.value()(k, best)))
            best = u;
        }
        ok = best == st.unit;
      }
      ++k;
    }
    hits += ok ? 1 : 0;
  }
  return hits;
}

CompletionContext SynthonModel::context(nn::ParamStore &s, const MolGraph &product, const MolGraph &synthons,
                                        int reaction_type) const {
  GraphInput pi = prepare_graph(product, reaction_type, config_.type_known, false);
  GraphInput si = prepare_graph(synthons, reaction_type, config_.type_known, false);
  Tape t;
  Embeddings emb = encoder_.encode(t, s, make_batch({ &pi, &si }), false);
  CompletionContext ctx;
  ctx.hp = emb.graphs.value().row(0);
  ctx.hs = emb.graphs.value().row(1);
  ctx.reaction_type = reaction_type;
  return ctx;
}

StepScores SynthonModel::score_step(nn::ParamStore &s, const CompletionContext &ctx, const rxn::IntermediateGraph &ig,
                                    const rxn::SubstructureVocab &vocab) const {
  if (vocab.size() != vocab_size_)
    throw ShapeMismatch("vocabulary size differs from the model");
  GraphInput in = prepare_graph(ig.graph, ctx.reaction_type, config_.type_known, false);
  Tape t;
  Embeddings emb = encoder_.encode(t, s, make_batch({ &in }), false);
  Var a = nn::gather_rows(emb.atoms, { ig.current() });
  Var hs = t.constant(ctx.hs);
  Var hp = t.constant(ctx.hp);
  double o = static_cast<double>(aacp_logits(t, s, a, hs, hp).value()(0, 0));
  StepScores out;
  out.attach = log_sigmoid(o);
  out.stop = log_sigmoid(-o);
  out.unit.assign(vocab_size_, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> mask = attach_mask(ig.graph, ig.current(), vocab);
  bool any = false;
  for (std::uint8_t m: mask)
    any = any || m;
  if (!any)
    return out;
  Var lz = nn::log_softmax_rows(aatp_logits(t, s, a, hs, hp), &mask);
  for (int u = 0; u < vocab_size_; ++u) {
    if (mask[u])
      out.unit[u] = out.attach + static_cast<double>(lz.value()(0, u));
  }
  return out;
}

}  // namespace retro::model
