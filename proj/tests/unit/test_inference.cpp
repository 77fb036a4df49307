//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/model/inference.hpp"
#include "retrograph/reaction/vocab.hpp"

using namespace retro;
namespace oracle = retro::testing;

namespace {

struct Fixture {
  std::vector<rxn::LabeledReaction> data;
  rxn::SubstructureVocab vocab;  // the most frequent units only
};

const Fixture &fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.data = rxn::label_reactions(rxn::read_reactions(oracle::data_path("reactions_1k.txt")));
    rxn::SubstructureVocab full = rxn::build_vocab(x.data);
    std::vector<rxn::VocabEntry> top(full.entries().begin(), full.entries().begin() + std::min(6, full.size()));
    x.vocab = rxn::SubstructureVocab(top);
    return x;
  }();
  return f;
}

// Scores that depend on the intermediate state only, so different paths to
// the same state see the same distribution.
model::StepScorer hashed_scorer(const rxn::SubstructureVocab &vocab, std::uint64_t salt) {
  return [&vocab, salt](const rxn::IntermediateGraph &ig) {
    std::string key = chem::write_smiles(ig.graph) + "|" + std::to_string(ig.current()) + "|" +
                      std::to_string(ig.frontier.size());
    std::uint64_t h = std::hash<std::string>{}(key) ^ (salt * 0x9e3779b97f4a7c15ULL);
    auto next = [&h] {
      h ^= h >> 33;
      h *= 0xff51afd7ed558ccdULL;
      h ^= h >> 33;
      return static_cast<double>(h % 100000) / 100000.0;
    };
    double o = 4.0 * next() - 2.0;
    model::StepScores sc;
    sc.attach = -std::log1p(std::exp(-o));
    sc.stop = -std::log1p(std::exp(o));
    sc.unit.assign(vocab.size(), -std::numeric_limits<double>::infinity());
    std::vector<std::uint8_t> mask = model::attach_mask(ig.graph, ig.current(), vocab);
    std::vector<double> logits(vocab.size());
    double z = 0.0;
    for (int u = 0; u < vocab.size(); ++u) {
      logits[u] = 3.0 * next();
      if (mask[u])
        z += std::exp(logits[u]);
    }
    for (int u = 0; u < vocab.size(); ++u) {
      if (mask[u])
        sc.unit[u] = sc.attach + logits[u] - std::log(z);
    }
    return sc;
  };
}

std::vector<rxn::IntermediateGraph> starts_for(int first, int count) {
  const Fixture &f = fixture();
  std::vector<rxn::IntermediateGraph> out;
  for (int i = 0; i < count; ++i) {
    const rxn::LabeledReaction &lr = f.data[(first + i) % f.data.size()];
    rxn::IntermediateGraph ig = rxn::start_completion(lr.trace.synthons, lr.record.product, lr.trace.center);
    ig.synthon_index = i;
    ig.score = -0.3 * i;
    out.push_back(std::move(ig));
  }
  return out;
}

void expect_same(const std::vector<model::CompletedPath> &a, const std::vector<model::CompletedPath> &b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].smiles, b[i].smiles) << i;
    EXPECT_EQ(a[i].score, b[i].score) << i;
    EXPECT_EQ(a[i].synthon_index, b[i].synthon_index) << i;
    EXPECT_EQ(a[i].actions, b[i].actions) << i;
  }
}

}  // namespace

TEST(BeamSearch, MatchesExhaustiveEnumeration) {
  const Fixture &f = fixture();
  int instances = 0;
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<rxn::IntermediateGraph> starts = starts_for(37 * trial, 1 + trial % 3);
    model::StepScorer scorer = hashed_scorer(f.vocab, trial);
    for (int n: { 1, 4, 10 }) {
      model::InferenceConfig cfg;
      cfg.n = n;
      cfg.max_steps = 4;
      std::vector<model::CompletedPath> got = model::beam_search(starts, f.vocab, scorer, cfg);
      std::vector<model::CompletedPath> want = oracle::exhaustive_completions(starts, f.vocab, scorer, 4, n);
      expect_same(got, want);
      ++instances;
    }
  }
  EXPECT_EQ(instances, 36);
}

TEST(BeamSearch, GreedyIsTheBestPath) {
  const Fixture &f = fixture();
  std::vector<rxn::IntermediateGraph> starts = starts_for(5, 2);
  model::StepScorer scorer = hashed_scorer(f.vocab, 77);
  model::InferenceConfig cfg;
  cfg.n = 1;
  cfg.max_steps = 5;
  std::vector<model::CompletedPath> one = model::beam_search(starts, f.vocab, scorer, cfg);
  cfg.n = 10;
  std::vector<model::CompletedPath> ten = model::beam_search(starts, f.vocab, scorer, cfg);
  ASSERT_EQ(one.size(), 1u);
  ASSERT_FALSE(ten.empty());
  EXPECT_EQ(one[0].smiles, ten[0].smiles);
  EXPECT_EQ(one[0].actions, ten[0].actions);
}

TEST(BeamSearch, DeterministicSortedAndValid) {
  const Fixture &f = fixture();
  std::vector<rxn::IntermediateGraph> starts = starts_for(200, 3);
  model::StepScorer scorer = hashed_scorer(f.vocab, 5);
  for (bool pruned: { false, true }) {
    model::InferenceConfig cfg;
    cfg.n = 8;
    cfg.max_steps = 6;
    cfg.pruned_beam = pruned;
    std::vector<model::CompletedPath> a = model::beam_search(starts, f.vocab, scorer, cfg);
    std::vector<model::CompletedPath> b = model::beam_search(starts, f.vocab, scorer, cfg);
    expect_same(a, b);
    EXPECT_LE(a.size(), 8u);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_TRUE(a[i].graph.all_valences_ok());
      EXPECT_NO_THROW(chem::parse_smiles(a[i].smiles));
      if (i > 0)
        EXPECT_TRUE(model::path_before(a[i - 1], a[i]));
    }
  }
}

TEST(BeamSearch, ExpansionBudgetReported) {
  const Fixture &f = fixture();
  std::vector<rxn::IntermediateGraph> starts = starts_for(11, 2);
  model::InferenceConfig cfg;
  cfg.max_steps = 8;
  cfg.max_expansions = 3;
  model::SearchStats st;
  model::beam_search(starts, f.vocab, hashed_scorer(f.vocab, 1), cfg, &st);
  EXPECT_TRUE(st.truncated);
  EXPECT_LE(st.expansions, 3);
}

TEST(BeamSearch, RejectsEmptyBeam) {
  const Fixture &f = fixture();
  model::InferenceConfig cfg;
  cfg.n = 0;
  EXPECT_THROW(model::beam_search(starts_for(0, 1), f.vocab, hashed_scorer(f.vocab, 0), cfg), ConfigError);
}

TEST(Predict, UntrainedModelsGiveRankedValidReactants) {
  const Fixture &f = fixture();
  model::EncoderConfig cc;
  cc.hidden = 8;
  cc.t_a = 2;
  cc.t_e = 2;
  cc.use_brics = true;
  model::CenterModel center(cc);
  nn::ParamStore cs;
  center.init(cs, 3);
  model::EncoderConfig sc = cc;
  sc.use_brics = false;
  model::SynthonModel synthon(sc, f.vocab.size());
  nn::ParamStore ss;
  synthon.init(ss, 4);
  model::Predictor p { &center, &cs, &synthon, &ss, &f.vocab };
  chem::MolGraph product = chem::parse_smiles("CC(=O)Nc1ccc(O)cc1");
  model::InferenceConfig cfg;
  cfg.k = 3;
  cfg.n = 5;
  cfg.max_steps = 6;
  std::vector<model::RankedReaction> a = model::predict(p, product, 0, cfg);
  std::vector<model::RankedReaction> b = model::predict(p, product, 0, cfg);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_FALSE(a.empty());
  EXPECT_LE(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].smiles, b[i].smiles);
    EXPECT_EQ(a[i].score, b[i].score);
    EXPECT_TRUE(a[i].reactants.all_valences_ok());
    if (i > 0)
      EXPECT_GE(a[i - 1].score, a[i].score);
  }
}
