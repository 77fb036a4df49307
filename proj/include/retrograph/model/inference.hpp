//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_MODEL_INFERENCE_HPP_
#define RETROGRAPH_MODEL_INFERENCE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "retrograph/model/center.hpp"
#include "retrograph/model/synthon.hpp"

namespace retro::model {

struct InferenceConfig {
  int k = 10;           // synthon candidates
  int n = 10;           // reactant sets
  int max_steps = 30;   // actions per completion path
  // Pruned search: each entry keeps Stop plus its top-N attachments
  // and each round keeps the global top-N. Off means exact best-first.
  bool pruned_beam = false;
  long max_expansions = 200000;  // safety budget per search
};

// Action codes along a completion path: -1 is Stop, u >= 0 attaches unit u.
struct CompletedPath {
  chem::MolGraph graph;
  std::string smiles;  // canonical, map numbers cleared
  double score = 0.0;
  int synthon_index = 0;
  std::vector<int> actions;
};

// Total order on results: score descending, then SMILES, synthon index and
// action sequence.
bool path_before(const CompletedPath &a, const CompletedPath &b);

using StepScorer = std::function<StepScores(const rxn::IntermediateGraph &)>;

struct SearchStats {
  long expansions = 0;
  bool truncated = false;  // expansion budget exhausted
};

// Top-N completions over all start graphs. Start scores seed the path
// scores; `scorer` gives the log-probabilities of the actions available at
// an incomplete graph.
std::vector<CompletedPath> beam_search(const std::vector<rxn::IntermediateGraph> &starts,
                                       const rxn::SubstructureVocab &vocab, const StepScorer &scorer,
                                       const InferenceConfig &config, SearchStats *stats = nullptr);

struct RankedReaction {
  chem::MolGraph reactants;
  std::string smiles;
  double score = 0.0;
  SynthonPrediction center;
};

struct Predictor {
  const CenterModel *center_model = nullptr;
  nn::ParamStore *center_store = nullptr;
  const SynthonModel *synthon_model = nullptr;
  nn::ParamStore *synthon_store = nullptr;
  const rxn::SubstructureVocab *vocab = nullptr;
};

// Top-K synthons, then top-N completions. Duplicate reactant sets keep the
// best score. Throws NoValidCenter when no center survives.
std::vector<RankedReaction> predict(const Predictor &p, const chem::MolGraph &product, int reaction_type,
                                    const InferenceConfig &config);

// Completion of given synthon candidates (the center step is skipped).
std::vector<CompletedPath> complete_synthons(const Predictor &p, const chem::MolGraph &product,
                                             const std::vector<SynthonPrediction> &synthons, int reaction_type,
                                             const InferenceConfig &config);

}  // namespace retro::model

#endif  // RETROGRAPH_MODEL_INFERENCE_HPP_
