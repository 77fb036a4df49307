//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_MODEL_SYNTHON_HPP_
#define RETROGRAPH_MODEL_SYNTHON_HPP_

#include <cstdint>
#include <vector>

#include "retrograph/model/encoder.hpp"
#include "retrograph/reaction/trace.hpp"
#include "retrograph/reaction/vocab.hpp"

namespace retro::model {

// Units of the vocabulary that may be grafted on `atom`.
std::vector<std::uint8_t> attach_mask(const chem::MolGraph &g, int atom, const rxn::SubstructureVocab &vocab);

// One teacher-forced decision: the intermediate graph before the action.
struct CompletionStep {
  GraphInput input;
  int atom = -1;
  bool attach = false;
  int unit = -1;  // attach steps only
  std::vector<std::uint8_t> mask;
};

struct CompletionExample {
  GraphInput product;
  GraphInput synthons;
  std::vector<CompletionStep> steps;
};

// Replays the ground-truth trace and records the graph seen at every step.
// Throws OutOfRange when a trace unit is missing from the vocabulary.
CompletionExample make_completion_example(const rxn::LabeledReaction &lr, const rxn::SubstructureVocab &vocab,
                                          const EncoderConfig &config);

// Embeddings fixed for the whole completion of one synthon set.
struct CompletionContext {
  nn::Matrix hs;  // 1 x h
  nn::Matrix hp;  // 1 x h
  int reaction_type = 0;
};

// Log-probabilities of every action available at the current frontier atom.
struct StepScores {
  double stop = 0.0;
  double attach = 0.0;       // log f^o
  std::vector<double> unit;  // log f^z plus `attach`; -inf where masked
};

class SynthonModel {
public:
  SynthonModel() = default;
  SynthonModel(EncoderConfig config, int vocab_size);

  void init(nn::ParamStore &store, std::uint64_t seed) const;
  const EncoderConfig &config() const { return config_; }
  int vocab_size() const { return vocab_size_; }

  // Logit of f^o, one row per attachment atom.
  nn::Var aacp_logits(nn::Tape &t, nn::ParamStore &s, nn::Var atoms, nn::Var hs, nn::Var hp) const;
  // Unnormalized f^z, one row per attachment atom.
  nn::Var aatp_logits(nn::Tape &t, nn::ParamStore &s, nn::Var atoms, nn::Var hs, nn::Var hp) const;

  // L^o + L^z summed over steps, averaged over examples.
  nn::Var loss(nn::Tape &t, nn::ParamStore &s, const std::vector<const CompletionExample *> &batch) const;

  // Number of examples whose every step is predicted correctly when the
  // ground-truth prefix is given.
  int exact_trace_hits(nn::ParamStore &s, const std::vector<const CompletionExample *> &batch) const;

  CompletionContext context(nn::ParamStore &s, const chem::MolGraph &product, const chem::MolGraph &synthons,
                            int reaction_type) const;
  StepScores score_step(nn::ParamStore &s, const CompletionContext &ctx, const rxn::IntermediateGraph &ig,
                        const rxn::SubstructureVocab &vocab) const;

private:
  struct StepOutputs {
    nn::Var o;  // n x 1
    nn::Var z;  // n x |Z|
  };
  StepOutputs forward(nn::Tape &t, nn::ParamStore &s, const std::vector<const CompletionExample *> &batch) const;

  EncoderConfig config_;
  int vocab_size_ = 0;
  Encoder encoder_;
};

}  // namespace retro::model

#endif  // RETROGRAPH_MODEL_SYNTHON_HPP_
