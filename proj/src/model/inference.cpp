//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/model/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"

namespace retro::model {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Entry {
  rxn::IntermediateGraph ig;
  std::vector<int> actions;
};

bool entry_before(const Entry &a, const Entry &b) {
  if (a.ig.score != b.ig.score)
    return a.ig.score > b.ig.score;
  if (a.ig.synthon_index != b.ig.synthon_index)
    return a.ig.synthon_index < b.ig.synthon_index;
  return a.actions < b.actions;
}

CompletedPath finish(const Entry &e) {
  CompletedPath p;
  p.graph = e.ig.graph;
  p.graph.clear_map_numbers();
  p.smiles = chem::write_smiles(p.graph);
  p.score = e.ig.score;
  p.synthon_index = e.ig.synthon_index;
  p.actions = e.actions;
  return p;
}

}  // namespace

bool path_before(const CompletedPath &a, const CompletedPath &b) {
  if (a.score != b.score)
    return a.score > b.score;
  if (a.smiles != b.smiles)
    return a.smiles < b.smiles;
  if (a.synthon_index != b.synthon_index)
    return a.synthon_index < b.synthon_index;
  return a.actions < b.actions;
}

std::vector<CompletedPath> beam_search(const std::vector<rxn::IntermediateGraph> &starts,
                                       const rxn::SubstructureVocab &vocab, const StepScorer &scorer,
                                       const InferenceConfig &config, SearchStats *stats) {
  if (config.n < 1 || config.max_steps < 1)
    throw ConfigError("N and max_steps must be positive");
  const std::size_t n = static_cast<std::size_t>(config.n);
  SearchStats local;
  SearchStats &st = stats != nullptr ? *stats : local;
  st = SearchStats{};

  std::vector<CompletedPath> results;  // sorted, at most N
  auto nth = [&] { return results.size() < n ? kNegInf : results[n - 1].score; };
  auto add_result = [&](const Entry &e) {
    CompletedPath p = finish(e);
    if (!p.graph.all_valences_ok())
      return;
    results.insert(std::upper_bound(results.begin(), results.end(), p, path_before), std::move(p));
    if (results.size() > n)
      results.pop_back();
  };

  std::vector<Entry> queue;
  for (const rxn::IntermediateGraph &ig: starts) {
    Entry e{ ig, {} };
    if (e.ig.complete())
      add_result(e);
    else
      queue.push_back(std::move(e));
  }

  while (!queue.empty()) {
    std::sort(queue.begin(), queue.end(), entry_before);
    if (results.size() >= n && nth() > queue.front().ig.score)
      break;
    std::size_t width = std::min(n, queue.size());
    std::vector<Entry> round(std::make_move_iterator(queue.begin()),
                             std::make_move_iterator(queue.begin() + static_cast<long>(width)));
    queue.erase(queue.begin(), queue.begin() + static_cast<long>(width));

    for (const Entry &e: round) {
      if (e.ig.score < nth() || static_cast<int>(e.actions.size()) >= config.max_steps)
        continue;
      if (st.expansions >= config.max_expansions) {
        st.truncated = true;
        break;
      }
      ++st.expansions;
      StepScores sc = scorer(e.ig);

      std::vector<int> units;
      for (int u = 0; u < static_cast<int>(sc.unit.size()); ++u) {
        if (sc.unit[u] != kNegInf)
          units.push_back(u);
      }
      if (config.pruned_beam && units.size() > n) {
        std::stable_sort(units.begin(), units.end(), [&](int a, int b) { return sc.unit[a] > sc.unit[b]; });
        units.resize(n);
        std::sort(units.begin(), units.end());
      }

      double stop_score = e.ig.score + sc.stop;
      if (stop_score >= nth()) {
        Entry c = e;
        rxn::stop(c.ig);
        c.ig.score = stop_score;
        c.ig.step += 1;
        c.actions.push_back(-1);
        if (c.ig.complete())
          add_result(c);
        else
          queue.push_back(std::move(c));
      }
      for (int u: units) {
        double s = e.ig.score + sc.unit[u];
        if (s < nth())
          continue;
        Entry c = e;
        rxn::attach(c.ig, vocab.unit(u));
        c.ig.score = s;
        c.ig.step += 1;
        c.actions.push_back(u);
        queue.push_back(std::move(c));
      }
    }
    if (st.truncated)
      break;
    if (config.pruned_beam && queue.size() > n) {
      std::sort(queue.begin(), queue.end(), entry_before);
      queue.resize(n);
    }
  }
  return results;
}

std::vector<CompletedPath> complete_synthons(const Predictor &p, const chem::MolGraph &product,
                                             const std::vector<SynthonPrediction> &synthons, int reaction_type,
                                             const InferenceConfig &config) {
  std::vector<CompletionContext> contexts;
  std::vector<rxn::IntermediateGraph> starts;
  for (std::size_t i = 0; i < synthons.size(); ++i) {
    const SynthonPrediction &sp = synthons[i];
    contexts.push_back(p.synthon_model->context(*p.synthon_store, product, sp.synthons, reaction_type));
    rxn::IntermediateGraph ig =
      rxn::start_completion(sp.synthons, product, rxn::center_atoms(product, sp.label));
    ig.score = sp.score;
    ig.synthon_index = static_cast<int>(i);
    starts.push_back(std::move(ig));
  }
  StepScorer scorer = [&](const rxn::IntermediateGraph &ig) {
    return p.synthon_model->score_step(*p.synthon_store, contexts[ig.synthon_index], ig, *p.vocab);
  };
  return beam_search(starts, *p.vocab, scorer, config);
}

std::vector<RankedReaction> predict(const Predictor &p, const chem::MolGraph &product, int reaction_type,
                                    const InferenceConfig &config) {
  if (config.k < 1)
    throw ConfigError("K must be positive");
  const EncoderConfig &cc = p.center_model->config();
  GraphInput input = prepare_graph(product, reaction_type, cc.type_known, cc.use_brics);
  std::vector<SynthonPrediction> synthons = p.center_model->top_k(*p.center_store, product, input, config.k);
  std::vector<CompletedPath> paths = complete_synthons(p, product, synthons, reaction_type, config);
  std::vector<RankedReaction> out;
  std::set<std::string> seen;
  for (CompletedPath &path: paths) {
    if (!seen.insert(path.smiles).second)
      continue;
    RankedReaction r;
    r.reactants = std::move(path.graph);
    r.smiles = path.smiles;
    r.score = path.score;
    r.center = synthons[path.synthon_index];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace retro::model
