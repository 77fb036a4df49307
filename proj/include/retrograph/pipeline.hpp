//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_PIPELINE_HPP_
#define RETROGRAPH_PIPELINE_HPP_

#include <iosfwd>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "retrograph/model/inference.hpp"
#include "retrograph/model/train.hpp"

namespace retro {

// Canonical SMILES with map numbers cleared.
std::string molecule_key(chem::MolGraph g);

// Default GMPN depth: the center module uses 7 iterations when the type is
// known and 5 otherwise; the synthon module the reverse.
int default_center_t_a(bool type_known);
int default_synthon_t_a(bool type_known);

nlohmann::json encoder_meta(const model::EncoderConfig &config);
model::EncoderConfig encoder_from_meta(const nlohmann::json &meta);

// Examples that cannot be built are skipped and counted.
std::vector<model::CenterExample> center_examples(const std::vector<rxn::LabeledReaction> &labeled,
                                                  const model::EncoderConfig &config, int *skipped = nullptr);
std::vector<model::CompletionExample> completion_examples(const std::vector<rxn::LabeledReaction> &labeled,
                                                          const rxn::SubstructureVocab &vocab,
                                                          const model::EncoderConfig &config, int *skipped = nullptr);

// Trained center and synthon modules plus the vocabulary.
struct LoadedModels {
  model::CenterModel center;
  nn::ParamStore center_store;
  model::SynthonModel synthon;
  nn::ParamStore synthon_store;
  rxn::SubstructureVocab vocab;

  model::Predictor predictor();
};

inline constexpr const char *kCenterPrefix = "center/";
inline constexpr const char *kSynthonPrefix = "synthon/";

LoadedModels load_models(const std::string &center_dir, const std::string &synthon_dir,
                         const std::string &vocab_path);

// Prediction TSV: product, rank, score, reactants, center.
void write_prediction_header(std::ostream &os);
void write_predictions(std::ostream &os, const std::string &product, const std::vector<model::RankedReaction> &ranked);

struct PredictionRow {
  int rank = 0;
  double score = 0.0;
  std::string reactants;
  std::string center;
};
// Rows per product, in rank order.
std::map<std::string, std::vector<PredictionRow>> read_predictions(const std::string &path);

}  // namespace retro

#endif  // RETROGRAPH_PIPELINE_HPP_
