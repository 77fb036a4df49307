//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_MODEL_CENTER_HPP_
#define RETROGRAPH_MODEL_CENTER_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "retrograph/model/encoder.hpp"
#include "retrograph/reaction/reaction.hpp"

namespace retro::model {

// BTCP classes: 0 keeps the bond, k = 1..3 restores original order k.
inline constexpr int kBtcpClasses = 4;
// ACP classes in output order.
inline constexpr int kAcpClasses = 3;
inline constexpr int kAcpAccept = 0;  // delta -1
inline constexpr int kAcpDonate = 1;  // delta +1
inline constexpr int kAcpNone = 2;    // delta 0
int acp_class(int delta);
int acp_delta(int cls);

// Position of a candidate in the joint candidate list of one product:
// [BF per bond][BC per bond x 3 slots][A per atom].
struct CandidateIndex {
  int num_atoms = 0;
  int num_bonds = 0;
  int size() const { return 4 * num_bonds + num_atoms; }
  int bf(int bond) const { return bond; }
  int bc(int bond, int order) const { return num_bonds + 3 * bond + (order - 1); }
  int atom(int a) const { return 4 * num_bonds + a; }
};

struct CenterCandidate {
  rxn::CenterKind kind = rxn::CenterKind::kUnsupported;
  int bond = -1;
  int atom = -1;
  int bc_original_order = 0;
  double log_prob = 0.0;
  int joint_index = -1;
};

// Mask of joint candidates; BC slots equal to the bond's localized order are 0.
std::vector<std::uint8_t> joint_mask(const chem::MolGraph &product);
int label_joint_index(const chem::MolGraph &product, const rxn::CenterLabel &label);

struct CenterExample {
  chem::MolGraph product;
  rxn::CenterLabel label;
  GraphInput input;
  int joint_target = -1;
  std::vector<int> neighbor_bonds;      // BF only
  std::vector<int> neighbor_targets;    // BTCP class per neighbor bond
  std::vector<int> transform_bonds;     // bonds contributing to c
  std::vector<int> transform_codes;     // x' code per contributing bond
  std::vector<int> acp_atoms;
  std::vector<int> acp_targets;
  std::string synthon_smiles;           // canonical, map numbers cleared
};

CenterExample make_center_example(const chem::MolGraph &product, const rxn::CenterLabel &label, int reaction_type,
                                  const EncoderConfig &config);

// Prediction for one product: candidate, transformed synthons and score.
struct SynthonPrediction {
  CenterCandidate center;
  rxn::CenterLabel label;  // center plus greedy BTCP and ACP outcomes
  chem::MolGraph synthons;
  double score = 0.0;      // center log-prob plus BTCP and ACP log-probs
  std::string description() const;
};

class CenterModel {
public:
  CenterModel() = default;
  explicit CenterModel(EncoderConfig config);

  void init(nn::ParamStore &store, std::uint64_t seed) const;
  const Encoder &encoder() const { return encoder_; }
  const EncoderConfig &config() const { return config_; }

  // Heads. Row i of the inputs belongs to candidate i.
  nn::Var score_bf(nn::Tape &t, nn::ParamStore &s, nn::Var bonds, nn::Var hp) const;
  nn::Var score_bc(nn::Tape &t, nn::ParamStore &s, nn::Var bonds, nn::Var hp) const;
  nn::Var score_a(nn::Tape &t, nn::ParamStore &s, nn::Var atoms, nn::Var hp) const;
  nn::Var btcp_logits(nn::Tape &t, nn::ParamStore &s, nn::Var neighbor, nn::Var center, nn::Var hp) const;
  // Per-term rows of c before summation; codes index the 4-wide one-hot x'.
  nn::Var transform_terms(nn::Tape &t, nn::ParamStore &s, nn::Var bonds, const std::vector<int> &codes) const;
  nn::Var acp_logits(nn::Tape &t, nn::ParamStore &s, nn::Var atoms, nn::Var c) const;

  struct Forward {
    Embeddings emb;
    nn::Var joint;       // column of joint log-probs, products concatenated
    std::vector<int> starts;
  };
  Forward forward(nn::Tape &t, nn::ParamStore &s, const GraphBatch &batch,
                  const std::vector<const chem::MolGraph *> &products) const;

  // Mean of L^s + L^b + L^c over the batch.
  nn::Var loss(nn::Tape &t, nn::ParamStore &s, const std::vector<const CenterExample *> &batch) const;

  // Joint candidates of one product sorted by log-prob (ties: lower joint
  // index first); masked slots are excluded.
  std::vector<CenterCandidate> rank_candidates(nn::ParamStore &s, const chem::MolGraph &product,
                                               const GraphInput &input) const;

  // Per-type top-K then global top-K, each turned into synthons with greedy
  // BTCP and ACP. Invalid transformations are dropped; throws NoValidCenter
  // when none survive.
  std::vector<SynthonPrediction> top_k(nn::ParamStore &s, const chem::MolGraph &product, const GraphInput &input,
                                       int k) const;

  // Greedy p2s for one candidate. Throws ChemicallyInvalid.
  SynthonPrediction apply_p2s(nn::ParamStore &s, const chem::MolGraph &product, const GraphInput &input,
                              const CenterCandidate &cand) const;

private:
  SynthonPrediction p2s(nn::Tape &t, nn::ParamStore &s, const chem::MolGraph &product, const Forward &f,
                        const CenterCandidate &cand) const;
  std::vector<CenterCandidate> ranked(const chem::MolGraph &product, const Forward &f) const;

  EncoderConfig config_;
  Encoder encoder_;
};

}  // namespace retro::model

#endif  // RETROGRAPH_MODEL_CENTER_HPP_
