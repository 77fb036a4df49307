//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/nn/checkpoint.hpp"

namespace retro {

std::string molecule_key(chem::MolGraph g) {
  g.clear_map_numbers();
  return chem::write_smiles(g);
}

int default_center_t_a(bool type_known) { return type_known ? 7 : 5; }
int default_synthon_t_a(bool type_known) { return type_known ? 5 : 7; }

nlohmann::json encoder_meta(const model::EncoderConfig &c) {
  return { { "hidden", c.hidden },
           { "t_a", c.t_a },
           { "t_e", c.t_e },
           { "use_brics", c.use_brics },
           { "type_known", c.type_known } };
}

model::EncoderConfig encoder_from_meta(const nlohmann::json &meta) {
  model::EncoderConfig c;
  try {
    c.hidden = meta.at("hidden").get<int>();
    c.t_a = meta.at("t_a").get<int>();
    c.t_e = meta.at("t_e").get<int>();
    c.use_brics = meta.at("use_brics").get<bool>();
    c.type_known = meta.at("type_known").get<bool>();
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("checkpoint lacks encoder settings: ") + e.what());
  }
  return c;
}

std::vector<model::CenterExample> center_examples(const std::vector<rxn::LabeledReaction> &labeled,
                                                  const model::EncoderConfig &config, int *skipped) {
  std::vector<model::CenterExample> out;
  int bad = 0;
  for (const rxn::LabeledReaction &lr: labeled) {
    try {
      out.push_back(model::make_center_example(lr.record.product, lr.label, lr.record.reaction_type, config));
    } catch (const Error &) {
      ++bad;
    }
  }
  if (skipped != nullptr)
    *skipped = bad;
  return out;
}

std::vector<model::CompletionExample> completion_examples(const std::vector<rxn::LabeledReaction> &labeled,
                                                          const rxn::SubstructureVocab &vocab,
                                                          const model::EncoderConfig &config, int *skipped) {
  std::vector<model::CompletionExample> out;
  int bad = 0;
  for (const rxn::LabeledReaction &lr: labeled) {
    try {
      out.push_back(model::make_completion_example(lr, vocab, config));
    } catch (const Error &) {
      ++bad;
    }
  }
  if (skipped != nullptr)
    *skipped = bad;
  return out;
}

model::Predictor LoadedModels::predictor() {
  model::Predictor p;
  p.center_model = &center;
  p.center_store = &center_store;
  p.synthon_model = &synthon;
  p.synthon_store = &synthon_store;
  p.vocab = &vocab;
  return p;
}

LoadedModels load_models(const std::string &center_dir, const std::string &synthon_dir,
                         const std::string &vocab_path) {
  LoadedModels m;
  m.vocab = rxn::SubstructureVocab::read_tsv(vocab_path);
  nlohmann::json cm = nn::load_checkpoint(center_dir, m.center_store, kCenterPrefix);
  m.center = model::CenterModel(encoder_from_meta(cm.at("hyperparams")));
  nlohmann::json sm = nn::load_checkpoint(synthon_dir, m.synthon_store, kSynthonPrefix);
  int vocab_size = sm.at("hyperparams").value("vocab_size", -1);
  if (vocab_size != m.vocab.size())
    throw CheckpointError("synthon checkpoint was trained with a different vocabulary size");
  m.synthon = model::SynthonModel(encoder_from_meta(sm.at("hyperparams")), vocab_size);
  return m;
}

void write_prediction_header(std::ostream &os) { os << "product\trank\tscore\treactants\tcenter\n"; }

void write_predictions(std::ostream &os, const std::string &product, const std::vector<model::RankedReaction> &ranked) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::ostringstream score;
    score << std::setprecision(12) << ranked[i].score;
    os << product << "\t" << i + 1 << "\t" << score.str() << "\t" << ranked[i].smiles << "\t"
       << ranked[i].center.description() << "\n";
  }
}

std::map<std::string, std::vector<PredictionRow>> read_predictions(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open prediction file " + path);
  std::map<std::string, std::vector<PredictionRow>> out;
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (header) {
      header = false;
      if (line.rfind("product\t", 0) == 0)
        continue;
    }
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t'))
      f.push_back(field);
    if (f.size() < 4)
      throw SyntaxError("prediction line " + std::to_string(lineno) + " has too few fields");
    PredictionRow row;
    try {
      row.rank = std::stoi(f[1]);
      row.score = std::stod(f[2]);
    } catch (const std::exception &) {
      throw SyntaxError("prediction line " + std::to_string(lineno) + " has a bad rank or score");
    }
    row.reactants = f[3];
    row.center = f.size() > 4 ? f[4] : "";
    out[f[0]].push_back(std::move(row));
  }
  for (auto &[product, rows]: out) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PredictionRow &a, const PredictionRow &b) { return a.rank < b.rank; });
  }
  return out;
}

}  // namespace retro
