//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance run: one PASS/FAIL/SKIP line per criterion. Arguments select a
// subset of criteria by number.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "retrograph/chem/fingerprint.hpp"
#include "retrograph/chem/isomorphism.hpp"
#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/eval.hpp"
#include "retrograph/pipeline.hpp"

namespace fs = std::filesystem;
using namespace retro;
using nn::Matrix;
using nn::Tape;
using nn::Var;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome pass(std::string d) { return { Outcome::kPass, std::move(d) }; }
Outcome fail(std::string d) { return { Outcome::kFail, std::move(d) }; }
Outcome verdict(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string timing(const Timer &t, double limit) { return fmt(t.seconds(), 3) + " s of " + fmt(limit, 4) + " s"; }

std::vector<rxn::LabeledReaction> load_labeled(const std::string &path, std::vector<rxn::ReactionRecord> *records,
                                               rxn::ExtractionStats *stats = nullptr) {
  std::vector<rxn::ReactionRecord> recs = rxn::read_reactions(path);
  std::vector<rxn::LabeledReaction> labeled = rxn::label_reactions(recs, stats);
  if (records != nullptr)
    *records = std::move(recs);
  return labeled;
}

// Deterministic dense matrix used for projections and stand-in inputs.
Matrix fixed_matrix(int rows, int cols, double salt) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c)
      m(r, c) = std::sin(1.37 * r + 0.71 * c + salt) + 0.25 * std::cos(0.53 * r * c + salt);
  }
  return m;
}

Var project(Tape &t, Var out, double salt) {
  return nn::sum_all(nn::mul(out, t.constant(fixed_matrix(out.rows(), out.cols(), salt))));
}

using NameFilter = std::function<bool(const std::string &)>;

nn::ParamStore substore(const nn::ParamStore &full, const NameFilter &keep) {
  nn::ParamStore s;
  for (const auto &[name, p]: full.all()) {
    if (!keep(name))
      continue;
    s.add_zero(name, static_cast<int>(p.value.rows()), static_cast<int>(p.value.cols())).value = p.value;
  }
  return s;
}

NameFilter with_prefix(std::string prefix, std::vector<std::string> list) {
  return [prefix = std::move(prefix), list = std::move(list)](const std::string &n) {
    for (const std::string &s: list) {
      if (n == prefix + s)
        return true;
    }
    return false;
  };
}

// ---- 1 ---------------------------------------------------------------------

Outcome gradient_oracle() {
  Timer timer;
  constexpr int kInstances = 20;
  constexpr double kTolerance = 1e-4;
  std::vector<rxn::LabeledReaction> labeled = load_labeled(testing::data_path("toy64.txt"), nullptr);
  rxn::SubstructureVocab vocab = rxn::build_vocab(labeled);

  model::EncoderConfig cc;
  cc.hidden = 5;
  cc.t_a = 2;
  cc.t_e = 2;
  cc.use_brics = true;
  model::CenterModel center(cc);
  model::EncoderConfig sc = cc;
  sc.use_brics = false;
  model::SynthonModel synthon(sc, vocab.size());
  std::vector<model::CenterExample> cex = center_examples(labeled, cc);
  std::vector<model::CompletionExample> sex = completion_examples(labeled, vocab, sc);
  const int h = cc.hidden;
  const std::string ep = center.encoder().prefix();

  std::map<std::string, double> worst;
  std::map<std::string, std::string> worst_at;
  std::map<std::string, int> runs;
  long probed = 0, kinks = 0;

  for (int i = 0; i < kInstances; ++i) {
    const chem::MolGraph &g = cex[(i * 7) % cex.size()].product;
    nn::ParamStore cs, ss;
    center.init(cs, 100 + i);
    synthon.init(ss, 200 + i);
    model::GraphInput input = model::prepare_graph(g, 0, false, true);
    model::GraphBatch batch = model::make_batch({ &input });
    const model::Encoder &enc = center.encoder();
    const int n = g.num_atoms(), m = std::max(g.num_bonds(), 1);
    const double salt = 0.1 * i;
    Matrix atoms = fixed_matrix(n, h, salt + 1), bonds = fixed_matrix(m, h, salt + 2);
    Matrix hp_n = fixed_matrix(n, h, salt + 3), hp_m = fixed_matrix(m, h, salt + 4);
    Matrix other = fixed_matrix(n, h, salt + 5), other_m = fixed_matrix(m, h, salt + 6);
    std::vector<int> codes;
    for (int k = 0; k < m; ++k)
      codes.push_back((k + i) % 4);

    auto check = [&](const std::string &head, const nn::ParamStore &full, const NameFilter &keep,
                     const std::function<Var(Tape &, nn::ParamStore &)> &f, int max_entries = 0) {
      nn::ParamStore sub = substore(full, keep);
      testing::GradCheck gc =
        testing::check_gradients(sub, [&](Tape &t) { return f(t, sub); }, 1e-5, max_entries);
      probed += gc.probed;
      kinks += gc.kinks;
      ++runs[head];
      if (gc.max_rel_error >= worst[head]) {
        worst[head] = gc.max_rel_error;
        worst_at[head] = gc.worst;
      }
    };
    auto c = [](Tape &t, const Matrix &x) { return t.constant(x); };

    check("GMPN", cs, with_prefix(ep, { "W_a1", "W_a2", "W_a3", "W_a4", "U_a1", "U_a2", "U_a3" }),
          [&](Tape &t, nn::ParamStore &s) { return project(t, enc.gmpn(t, s, batch), salt); });
    check("FMPN", cs, with_prefix(ep, { "W_e1", "W_e2", "W_e3", "W_e4", "U_e1", "U_e2", "U_e3", "V" }),
          [&](Tape &t, nn::ParamStore &s) {
            Var a = c(t, atoms);
            return project(t, enc.enrich(t, s, batch, a, enc.fmpn(t, s, batch, a)), salt);
          });
    if (g.num_bonds() > 0) {
      check("bond-embed", cs, with_prefix(ep, { "U_b1", "U_b2", "U_b3", "U_b4" }),
            [&](Tape &t, nn::ParamStore &s) { return project(t, enc.bond_embed(t, s, batch, c(t, atoms)), salt); });
    }
    check("s^b", cs, with_prefix("head/", { "q_b", "Q_b1", "Q_b2" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.score_bf(t, s, c(t, bonds), c(t, hp_m)), salt);
    });
    check("s^c", cs, with_prefix("head/", { "Q_c1", "Q_c2", "Q_c3" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.score_bc(t, s, c(t, bonds), c(t, hp_m)), salt);
    });
    check("s^a", cs, with_prefix("head/", { "q_a", "Q_a1", "Q_a2" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.score_a(t, s, c(t, atoms), c(t, hp_n)), salt);
    });
    check("f^b", cs, with_prefix("head/", { "V_b1", "V_b2", "V_b3" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.btcp_logits(t, s, c(t, bonds), c(t, other_m), c(t, hp_m)), salt);
    });
    check("c", cs, with_prefix("head/", { "W_c1", "W_c2", "W_c3" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.transform_terms(t, s, c(t, bonds), codes), salt);
    });
    check("f^c", cs, with_prefix("head/", { "V_c1", "V_c2" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, center.acp_logits(t, s, c(t, atoms), c(t, other)), salt);
    });
    check("f^o", ss, with_prefix("head/", { "V_o1", "V_o2", "V_o3" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, synthon.aacp_logits(t, s, c(t, atoms), c(t, other), c(t, hp_n)), salt);
    });
    check("f^z", ss, with_prefix("head/", { "V_z1", "V_z2", "V_z3" }), [&](Tape &t, nn::ParamStore &s) {
      return project(t, synthon.aatp_logits(t, s, c(t, atoms), c(t, other), c(t, hp_n)), salt);
    });
    std::vector<const model::CenterExample *> cb = { &cex[i % cex.size()], &cex[(i + 31) % cex.size()] };
    check(
      "center loss", cs, [](const std::string &) { return true; },
      [&](Tape &t, nn::ParamStore &s) { return center.loss(t, s, cb); }, 12);
    std::vector<const model::CompletionExample *> sb = { &sex[i % sex.size()], &sex[(i + 17) % sex.size()] };
    check(
      "synthon loss", ss, [](const std::string &) { return true; },
      [&](Tape &t, nn::ParamStore &s) { return synthon.loss(t, s, sb); }, 12);
  }

  double max_err = 0;
  std::string worst_head;
  bool enough = true;
  for (const auto &[head, e]: worst) {
    if (e >= max_err) {
      max_err = e;
      worst_head = head + " " + worst_at[head];
    }
    enough = enough && runs[head] >= kInstances;
  }
  bool ok = max_err < kTolerance && enough && worst.size() == 13 && kinks * 100 <= probed && timer.seconds() < 120;
  return verdict(ok, std::to_string(worst.size()) + " heads x " + std::to_string(kInstances) + " instances, " +
                       std::to_string(probed) + " entries (" + std::to_string(kinks) +
                       " on a kink, excluded), max rel error " + fmt(max_err) + " at " + worst_head +
                       "; " + timing(timer, 120));
}

// ---- 2 ---------------------------------------------------------------------

Outcome permutation_invariance() {
  Timer timer;
  std::vector<std::string> smiles = testing::read_lines(testing::data_path("molecules.smi"));
  model::EncoderConfig ec;
  ec.hidden = 32;
  ec.t_a = 5;
  ec.t_e = 3;
  ec.use_brics = true;
  model::CenterModel center(ec);
  nn::ParamStore store;
  center.init(store, 11);

  auto embed = [&](const chem::MolGraph &g) {
    model::GraphInput in = model::prepare_graph(g, 0, false, true);
    model::GraphBatch b = model::make_batch({ &in });
    Tape t;
    Matrix h = center.encoder().encode(t, store, b, false).graphs.value();
    t.clear();
    return h;
  };
  auto argmax_key = [&](const chem::MolGraph &g) -> std::string {
    model::GraphInput in = model::prepare_graph(g, 0, false, true);
    std::vector<model::CenterCandidate> r = center.rank_candidates(store, g, in);
    return r.empty() ? std::string("none") : testing::marked_center_key(g, r.front());
  };

  int molecules = 0, perms = 0, argmax_mismatch = 0;
  double worst = 0;
  for (const std::string &s: smiles) {
    if (molecules == 100)
      break;
    chem::MolGraph g = chem::parse_smiles(s);
    ++molecules;
    Matrix h0 = embed(g);
    std::string key0 = argmax_key(g);
    double scale = std::max(h0.cwiseAbs().maxCoeff(), 1e-300);
    for (int p = 0; p < 50; ++p) {
      std::vector<int> perm = testing::random_permutation(g.num_atoms(), 1000ULL * molecules + p);
      chem::MolGraph gp = g.permuted(perm);
      Matrix h1 = embed(gp);
      worst = std::max(worst, (h1 - h0).cwiseAbs().maxCoeff() / scale);
      if (argmax_key(gp) != key0)
        ++argmax_mismatch;
      ++perms;
    }
  }
  bool ok = molecules == 100 && worst <= 1e-9 && argmax_mismatch == 0 && timer.seconds() < 60;
  return verdict(ok, std::to_string(molecules) + " molecules x 50 permutations, max relative h deviation " +
                       fmt(worst) + ", argmax mismatches " + std::to_string(argmax_mismatch) + "/" +
                       std::to_string(perms) + "; " + timing(timer, 60));
}

// ---- 3 ---------------------------------------------------------------------

bool same_paths(const std::vector<model::CompletedPath> &a, const std::vector<model::CompletedPath> &b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].smiles != b[i].smiles || a[i].score != b[i].score || a[i].synthon_index != b[i].synthon_index ||
        a[i].actions != b[i].actions)
      return false;
  }
  return true;
}

Outcome beam_vs_exhaustive() {
  Timer timer;
  std::vector<rxn::LabeledReaction> labeled = load_labeled(testing::data_path("reactions_1k.txt"), nullptr);
  rxn::SubstructureVocab full = rxn::build_vocab(labeled);
  std::mt19937_64 rng(3);
  int equal = 0, trials = 0;
  long results = 0, enumerated = 0;
  std::string first_diff;
  for (int trial = 0; trial < 50; ++trial) {
    ++trials;
    int z = std::uniform_int_distribution<int>(1, 6)(rng);
    int k = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<const rxn::LabeledReaction *> chosen;
    for (int j = 0; j < k; ++j)
      chosen.push_back(&labeled[std::uniform_int_distribution<std::size_t>(0, labeled.size() - 1)(rng)]);
    // Units from the chosen traces first so that attachments are possible,
    // then random others.
    std::vector<std::string> encodings;
    for (const rxn::LabeledReaction *lr: chosen) {
      for (const rxn::TraceStep &st: lr->trace.steps) {
        if (st.attach && std::find(encodings.begin(), encodings.end(), st.encoding) == encodings.end())
          encodings.push_back(st.encoding);
      }
    }
    std::shuffle(encodings.begin(), encodings.end(), rng);
    while (static_cast<int>(encodings.size()) < z) {
      std::string e = full.entry(std::uniform_int_distribution<int>(0, full.size() - 1)(rng)).encoding;
      if (std::find(encodings.begin(), encodings.end(), e) == encodings.end())
        encodings.push_back(e);
    }
    encodings.resize(z);
    std::vector<rxn::VocabEntry> entries;
    for (const std::string &e: encodings)
      entries.push_back(full.entry(full.find(e)));
    rxn::SubstructureVocab vocab(entries);

    model::EncoderConfig ec;
    ec.hidden = 8;
    ec.t_a = 2;
    model::SynthonModel sm(ec, vocab.size());
    nn::ParamStore store;
    sm.init(store, 500 + trial);

    std::vector<rxn::IntermediateGraph> starts;
    std::vector<model::CompletionContext> contexts;
    for (int j = 0; j < k; ++j) {
      const rxn::LabeledReaction &lr = *chosen[j];
      // A single-atom frontier leaves room for attach, stop, stop within three
      // actions.
      std::vector<int> center = lr.trace.center;
      if (center.size() > 1 && std::uniform_int_distribution<int>(0, 3)(rng) != 0) {
        std::vector<int> open;
        for (int a: center) {
          std::vector<std::uint8_t> mask =
            model::attach_mask(rxn::start_completion(lr.trace.synthons, lr.record.product, { a }).graph, a, vocab);
          if (std::find(mask.begin(), mask.end(), 1) != mask.end())
            open.push_back(a);
        }
        const std::vector<int> &pool = open.empty() ? center : open;
        center = { pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)] };
      }
      rxn::IntermediateGraph ig = rxn::start_completion(lr.trace.synthons, lr.record.product, center);
      ig.score = -std::uniform_real_distribution<double>(0.0, 2.0)(rng);
      ig.synthon_index = j;
      starts.push_back(ig);
      contexts.push_back(sm.context(store, lr.record.product, lr.trace.synthons, 0));
    }
    model::StepScorer scorer = [&](const rxn::IntermediateGraph &ig) {
      return sm.score_step(store, contexts[ig.synthon_index], ig, vocab);
    };
    model::InferenceConfig cfg;
    cfg.n = std::uniform_int_distribution<int>(1, 5)(rng);
    cfg.max_steps = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? std::uniform_int_distribution<int>(1, 2)(rng) : 3;
    std::vector<model::CompletedPath> beam = model::beam_search(starts, vocab, scorer, cfg);
    long seen = 0;
    std::vector<model::CompletedPath> oracle =
      testing::exhaustive_completions(starts, vocab, scorer, cfg.max_steps, cfg.n, &seen);
    results += static_cast<long>(oracle.size());
    enumerated += seen;
    if (same_paths(beam, oracle)) {
      ++equal;
    } else if (first_diff.empty()) {
      first_diff = " (first difference in trial " + std::to_string(trial) + ": beam " +
                   std::to_string(beam.size()) + " vs oracle " + std::to_string(oracle.size()) + " paths)";
    }
  }
  bool ok = equal == trials && timer.seconds() < 120;
  return verdict(ok, std::to_string(equal) + "/" + std::to_string(trials) + " searches identical to enumeration, " +
                       std::to_string(results) + " top-N paths compared out of " + std::to_string(enumerated) + " enumerated" +
                       first_diff + "; " +
                       timing(timer, 120));
}

// ---- 4 ---------------------------------------------------------------------

Outcome replay_soundness() {
  Timer timer;
  std::vector<rxn::ReactionRecord> records = rxn::read_reactions(testing::data_path("reactions_1k.txt"));
  int extractable = 0, reproduced = 0, unsupported = 0, undecomposable = 0;
  for (const rxn::ReactionRecord &r: records) {
    rxn::CenterLabel label;
    try {
      label = rxn::extract_center_label(r);
    } catch (const Error &) {
      ++unsupported;
      continue;
    }
    if (label.kind == rxn::CenterKind::kUnsupported) {
      ++unsupported;
      continue;
    }
    rxn::Trace trace;
    try {
      trace = rxn::extract_trace(r, label);
    } catch (const DecompositionError &) {
      ++undecomposable;
      continue;
    }
    ++extractable;
    try {
      chem::MolGraph synthons = rxn::derive_synthons(r.product, label);
      chem::MolGraph replayed = rxn::replay_trace(trace, r.product);
      if (chem::isomorphic(synthons, trace.synthons) && chem::isomorphic(replayed, r.reactants))
        ++reproduced;
    } catch (const Error &) {
    }
  }
  bool ok = extractable > 0 && reproduced == extractable && timer.seconds() < 60;
  return verdict(ok, std::to_string(reproduced) + "/" + std::to_string(extractable) +
                       " extractable records reproduced (" + std::to_string(records.size()) + " read, " +
                       std::to_string(unsupported) + " unsupported centers, " + std::to_string(undecomposable) +
                       " without a unit decomposition); " + timing(timer, 60));
}

// ---- 5 ---------------------------------------------------------------------

// Ranked reactant SMILES per toy product, reused by criterion 7.
struct ToyPredictions {
  std::vector<std::string> products;
  std::vector<std::vector<std::string>> ranked;
  std::vector<std::string> gold;
  std::vector<std::vector<model::RankedReaction>> full;
};
ToyPredictions g_toy;

Outcome overfit() {
  Timer timer;
  nn::tune_allocator();
  std::vector<rxn::ReactionRecord> records;
  std::vector<rxn::LabeledReaction> labeled = load_labeled(testing::data_path("toy64.txt"), &records);
  rxn::SubstructureVocab vocab = rxn::build_vocab(labeled);

  model::EncoderConfig cc;
  cc.hidden = 64;
  cc.t_a = default_center_t_a(false);
  cc.use_brics = true;
  model::EncoderConfig sc;
  sc.hidden = 64;
  sc.t_a = default_synthon_t_a(false);
  std::vector<model::CenterExample> cex = center_examples(labeled, cc);
  std::vector<model::CompletionExample> sex = completion_examples(labeled, vocab, sc);

  model::TrainConfig tc;
  tc.epochs = 300;
  tc.batch_size = 16;
  tc.seed = 7;
  tc.stop_at = 1.0;
  tc.lr = 1e-3;
  model::CenterModel center(cc);
  nn::ParamStore cs;
  center.init(cs, 7);
  model::TrainResult cr = model::train_center(center, cs, cex, {}, tc);
  double center_top1 = model::center_accuracy(center, cs, cex, 1);

  tc.lr = 3e-3;
  model::SynthonModel synthon(sc, vocab.size());
  nn::ParamStore ss;
  synthon.init(ss, 7);
  model::TrainResult sr = model::train_synthon(synthon, ss, sex, {}, tc);
  double trace_acc = model::trace_accuracy(synthon, ss, sex);
  double train_s = timer.seconds();

  model::Predictor p;
  p.center_model = &center;
  p.center_store = &cs;
  p.synthon_model = &synthon;
  p.synthon_store = &ss;
  p.vocab = &vocab;
  model::InferenceConfig ic;
  int hits = 0;
  g_toy = {};
  for (const rxn::ReactionRecord &r: records) {
    std::string gold = molecule_key(r.reactants);
    std::vector<model::RankedReaction> ranked;
    try {
      ranked = model::predict(p, r.product, r.reaction_type, ic);
    } catch (const Error &) {
    }
    std::vector<std::string> names;
    for (const model::RankedReaction &rr: ranked)
      names.push_back(rr.smiles);
    if (!names.empty() && names.front() == gold)
      ++hits;
    g_toy.products.push_back(molecule_key(r.product));
    g_toy.ranked.push_back(names);
    g_toy.gold.push_back(gold);
    g_toy.full.push_back(std::move(ranked));
  }
  double e2e = records.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(records.size());
  bool ok = records.size() == 64 && center_top1 >= 0.95 && trace_acc >= 0.90 && e2e >= 0.85 && timer.seconds() < 900;
  return verdict(ok, "center top-1 " + fmt(center_top1) + " (" + std::to_string(cr.history.size()) +
                       " epochs), exact trace " + fmt(trace_acc) + " (" + std::to_string(sr.history.size()) +
                       " epochs), end-to-end top-1 " + std::to_string(hits) + "/" +
                       std::to_string(records.size()) + " = " + fmt(e2e) + "; training " + fmt(train_s) + " s, " +
                       timing(timer, 900));
}

// ---- 6 ---------------------------------------------------------------------

Outcome coverage_spot_check() {
  const char *dir = std::getenv("RETROGRAPH_USPTO50K_DIR");
  if (dir == nullptr || !fs::exists(fs::path(dir) / "train.txt") || !fs::exists(fs::path(dir) / "test.txt"))
    return { Outcome::kSkip, "full USPTO-50K not supplied (set RETROGRAPH_USPTO50K_DIR to a directory with "
                             "train.txt and test.txt)" };
  Timer timer;
  rxn::ExtractionStats train_stats;
  std::vector<rxn::LabeledReaction> train =
    load_labeled((fs::path(dir) / "train.txt").string(), nullptr, &train_stats);
  std::vector<rxn::ReactionRecord> test = rxn::read_reactions((fs::path(dir) / "test.txt").string());
  double ftrain = rxn::coverage_stats(rxn::read_reactions((fs::path(dir) / "train.txt").string())).supported_fraction();
  double ftest = rxn::coverage_stats(test).supported_fraction();
  int vocab = rxn::build_vocab(train).size();
  bool ok = std::abs(ftrain - 0.977) <= 0.005 && std::abs(ftest - 0.975) <= 0.005 && std::abs(vocab - 83) <= 15;
  return verdict(ok, "train coverage " + fmt(100 * ftrain, 4) + "%, test coverage " + fmt(100 * ftest, 4) +
                       "%, vocabulary " + std::to_string(vocab) + "; " + fmt(timer.seconds()) + " s");
}

// ---- 7 ---------------------------------------------------------------------

int run_cli(const std::string &args) {
  std::string cmd = std::string(RETROGRAPH_CLI) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool monotone(const std::vector<double> &v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1])
      return false;
  }
  return true;
}

fs::path scratch_dir(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("retrograph_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Outcome metric_consistency() {
  Timer timer;
  const std::vector<int> ks = { 1, 3, 5, 10 };
  int evaluations = 0, violations = 0;
  std::string notes;

  // Synthetic rankings.
  std::mt19937_64 rng(17);
  for (int e = 0; e < 200; ++e) {
    int records = std::uniform_int_distribution<int>(1, 30)(rng);
    std::vector<std::vector<std::string>> preds(records);
    std::vector<std::string> gold(records);
    for (int r = 0; r < records; ++r) {
      gold[r] = "G" + std::to_string(r);
      int len = std::uniform_int_distribution<int>(0, 12)(rng);
      int at = std::uniform_int_distribution<int>(0, 14)(rng);
      for (int i = 0; i < len; ++i)
        preds[r].push_back(i == at ? gold[r] : "X" + std::to_string(i));
    }
    ++evaluations;
    violations += monotone(eval::topk_accuracy(preds, gold, ks)) ? 0 : 1;
  }
  // Toy predictions from criterion 5, directly and through the CLI.
  if (!g_toy.gold.empty()) {
    ++evaluations;
    violations += monotone(eval::topk_accuracy(g_toy.ranked, g_toy.gold, ks)) ? 0 : 1;
    fs::path dir = scratch_dir("metrics");
    {
      std::ofstream out(dir / "pred.tsv");
      write_prediction_header(out);
      for (std::size_t i = 0; i < g_toy.products.size(); ++i)
        write_predictions(out, g_toy.products[i], g_toy.full[i]);
    }
    int rc = run_cli("evaluate --pred " + (dir / "pred.tsv").string() + " --gold " +
                     testing::data_path("toy64.txt") + " --out " + (dir / "acc.csv").string());
    std::vector<std::string> lines = testing::read_lines((dir / "acc.csv").string());
    if (rc != 0 || lines.size() < 2) {
      ++violations;
      notes += ", CLI evaluate failed";
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::vector<double> v;
      std::stringstream ss(lines[i]);
      std::string f;
      for (int col = 0; std::getline(ss, f, ','); ++col) {
        if (col >= 2)
          v.push_back(std::stod(f));
      }
      ++evaluations;
      violations += (v.size() == 4 && monotone(v)) ? 0 : 1;
    }
  } else {
    notes += ", criterion 5 predictions unavailable";
  }

  // Self-similarity over every reactant set of the sample.
  std::vector<rxn::ReactionRecord> records = rxn::read_reactions(testing::data_path("reactions_1k.txt"));
  int self_bad = 0;
  for (const rxn::ReactionRecord &r: records) {
    if (eval::reaction_similarity(r.reactants, r.reactants) != 1.0)
      ++self_bad;
  }

  // Normalization of every distribution the models produce.
  double worst = 0;
  long distributions = 0;
  auto note = [&](double total) {
    worst = std::max(worst, std::abs(total - 1.0));
    ++distributions;
  };
  model::EncoderConfig cc;
  cc.hidden = 16;
  cc.t_a = 3;
  cc.t_e = 2;
  cc.use_brics = true;
  model::CenterModel center(cc);
  nn::ParamStore cs;
  center.init(cs, 23);
  std::vector<rxn::LabeledReaction> labeled = rxn::label_reactions(records);
  rxn::SubstructureVocab vocab = rxn::build_vocab(labeled);
  model::EncoderConfig sc;
  sc.hidden = 16;
  sc.t_a = 3;
  model::SynthonModel synthon(sc, vocab.size());
  nn::ParamStore ss;
  synthon.init(ss, 29);
  for (std::size_t i = 0; i < labeled.size() && i < 150; ++i) {
    const rxn::LabeledReaction &lr = labeled[i];
    const chem::MolGraph &g = lr.record.product;
    model::GraphInput in = model::prepare_graph(g, 0, false, true);
    // Joint center distribution.
    double total = 0;
    for (const model::CenterCandidate &c: center.rank_candidates(cs, g, in))
      total += std::exp(c.log_prob);
    note(total);
    // BTCP and ACP rows.
    {
      model::GraphBatch b = model::make_batch({ &in });
      Tape t;
      model::Embeddings emb = center.encoder().encode(t, cs, b, true);
      int n = g.num_atoms();
      if (g.num_bonds() > 0) {
        Var hp = nn::gather_rows(emb.graphs, std::vector<int>(g.num_bonds(), 0));
        std::vector<int> rot(g.num_bonds());
        for (int k = 0; k < g.num_bonds(); ++k)
          rot[k] = (k + 1) % g.num_bonds();
        Var logits = center.btcp_logits(t, cs, emb.bonds, nn::gather_rows(emb.bonds, rot), hp);
        Matrix p = nn::softmax_rows(logits).value();
        for (int r = 0; r < p.rows(); ++r)
          note(p.row(r).sum());
        Var cvec = nn::sum_rows(center.transform_terms(t, cs, emb.bonds, std::vector<int>(g.num_bonds(), 1)));
        Var acp = center.acp_logits(t, cs, emb.atoms, nn::gather_rows(cvec, std::vector<int>(n, 0)));
        Matrix q = nn::softmax_rows(acp).value();
        for (int r = 0; r < q.rows(); ++r)
          note(q.row(r).sum());
      }
      t.clear();
    }
    // Completion steps along the ground-truth trace.
    model::CompletionContext ctx = synthon.context(ss, g, lr.trace.synthons, 0);
    rxn::IntermediateGraph ig = rxn::start_completion(lr.trace.synthons, g, lr.trace.center);
    for (const rxn::TraceStep &step: lr.trace.steps) {
      model::StepScores s = synthon.score_step(ss, ctx, ig, vocab);
      note(std::exp(s.stop) + std::exp(s.attach));
      double units = 0;
      bool any = false;
      for (double u: s.unit) {
        if (u != -std::numeric_limits<double>::infinity()) {
          units += std::exp(u - s.attach);
          any = true;
        }
      }
      if (any)
        note(units);
      if (step.attach)
        rxn::attach(ig, vocab.unit(vocab.find(step.encoding)));
      else
        rxn::stop(ig);
    }
  }
  bool ok = violations == 0 && self_bad == 0 && worst <= 1e-9;
  return verdict(ok, std::to_string(evaluations - violations) + "/" + std::to_string(evaluations) +
                       " evaluations monotone in k, self-similarity 1 on " +
                       std::to_string(records.size() - self_bad) + "/" + std::to_string(records.size()) +
                       " reactant sets, " + std::to_string(distributions) +
                       " distributions with max |sum - 1| = " + fmt(worst) + notes + "; " + fmt(timer.seconds()) +
                       " s");
}

// ---- 8 ---------------------------------------------------------------------

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> tree(const fs::path &root) {
  std::map<std::string, std::string> out;
  for (const auto &e: fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().filename() != "train_log.jsonl")
      out[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return out;
}

Outcome determinism() {
  Timer timer;
  const std::string toy = testing::data_path("toy64.txt");
  std::vector<std::map<std::string, std::string>> runs;
  int failures = 0;
  for (int run = 0; run < 2; ++run) {
    fs::path d = scratch_dir("determinism_" + std::to_string(run));
    std::string D = d.string();
    const std::string common = " --threads 1 --seed 7 --hidden 16 --epochs 3 --batch 16";
    failures += run_cli("vocab --in " + toy + " --out " + D + "/vocab.tsv") != 0;
    failures += run_cli("train-center --train " + toy + " --out " + D + "/center" + common) != 0;
    failures +=
      run_cli("train-synthon --train " + toy + " --vocab " + D + "/vocab.tsv --out " + D + "/synthon" + common) != 0;
    failures += run_cli("predict --center " + D + "/center --synthon " + D + "/synthon --vocab " + D +
                        "/vocab.tsv --in " + toy + " --out " + D + "/pred.tsv --k 3 --n 5 --threads 1") != 0;
    runs.push_back(tree(d));
  }
  int compared = static_cast<int>(runs[0].size());
  bool identical = runs[0] == runs[1];
  bool has_outputs = runs[0].count("pred.tsv") && runs[0].count("center/manifest.json") &&
                     runs[0].count("synthon/manifest.json") && !runs[0]["pred.tsv"].empty();
  bool ok = failures == 0 && identical && has_outputs;
  return verdict(ok, std::to_string(compared) + " checkpoint and prediction files " +
                       (identical ? "bit-identical" : "differ") + " across two runs, " + std::to_string(failures) +
                       " failed commands; " + fmt(timer.seconds()) + " s");
}

// ---- 9 ---------------------------------------------------------------------

Outcome smiles_and_morgan() {
  Timer timer;
  std::vector<std::string> smiles = testing::read_lines(testing::data_path("molecules.smi"));
  int round_trips = 0, small = 0, fp_equal = 0, fp_checks = 0;
  std::string first_bad;
  for (const std::string &s: smiles) {
    try {
      chem::MolGraph a = chem::parse_smiles(s);
      std::string w = chem::write_smiles(a);
      chem::MolGraph b = chem::parse_smiles(w);
      if (chem::isomorphic(a, b) && chem::write_smiles(b) == w)
        ++round_trips;
      else if (first_bad.empty())
        first_bad = s;
      if (a.num_atoms() <= 12) {
        ++small;
        bool all = true;
        for (int radius = 0; radius <= 3; ++radius) {
          for (int width: { 64, 2048 }) {
            std::vector<int> bits = chem::morgan_fingerprint(a, radius, width).on_bits();
            std::set<int> oracle = testing::brute_force_morgan_bits(a, radius, width);
            ++fp_checks;
            all = all && std::set<int>(bits.begin(), bits.end()) == oracle;
          }
        }
        fp_equal += all ? 1 : 0;
      }
    } catch (const Error &) {
      if (first_bad.empty())
        first_bad = s;
    }
  }
  bool ok = smiles.size() == 500 && round_trips == 500 && small > 0 && fp_equal == small;
  return verdict(ok, std::to_string(round_trips) + "/" + std::to_string(smiles.size()) +
                       " isomorphic round trips, Morgan oracle agrees on " + std::to_string(fp_equal) + "/" +
                       std::to_string(small) + " molecules with <= 12 atoms (" + std::to_string(fp_checks) +
                       " radius/width settings)" + (first_bad.empty() ? "" : ", first failure " + first_bad) +
                       "; " + fmt(timer.seconds()) + " s");
}

}  // namespace

int main(int argc, char **argv) {
  struct Criterion {
    int id;
    const char *name;
    Outcome (*run)();
  };
  const std::vector<Criterion> all = {
    { 1, "gradient oracle", gradient_oracle },
    { 2, "permutation invariance", permutation_invariance },
    { 3, "beam vs exhaustive", beam_vs_exhaustive },
    { 4, "replay soundness", replay_soundness },
    { 5, "overfit sanity", overfit },
    { 6, "coverage spot check", coverage_spot_check },
    { 7, "metric self-consistency", metric_consistency },
    { 8, "determinism", determinism },
    { 9, "SMILES round trip and Morgan oracle", smiles_and_morgan },
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i)
    wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion &c: all) {
    if (!wanted.empty() && !wanted.count(c.id))
      continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char *tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    std::cout << "criterion " << c.id << " [" << c.name << "]: " << tag << " (" << o.detail << ")" << std::endl;
    failed += o.status == Outcome::kFail;
  }
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / ("retrograph_acceptance_" + std::to_string(::getpid())), ec);
  return failed == 0 ? 0 : 1;
}
