//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_MODEL_TRAIN_HPP_
#define RETROGRAPH_MODEL_TRAIN_HPP_

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "retrograph/model/center.hpp"
#include "retrograph/model/synthon.hpp"

namespace retro::model {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 256;
  double lr = 1e-3;
  double lr_decay = 0.9;
  double min_delta = 0.01;
  int patience = 10;
  std::uint64_t seed = 0;
  // Training ends once the validation metric reaches this value.
  double stop_at = 2.0;
  std::string log_path;        // JSON lines, appended; empty disables
  std::string checkpoint_dir;  // best parameters; empty disables
  std::string prefix;          // checkpoint name prefix
  nlohmann::json meta;         // stored as "hyperparams"
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double metric = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_metric = -1.0;
};

// Fraction of examples whose ground-truth synthons are among the top-k
// predicted synthons.
double center_accuracy(const CenterModel &model, nn::ParamStore &store, const std::vector<CenterExample> &examples,
                       int k);
// Fraction of examples whose whole trace is predicted under teacher forcing.
double trace_accuracy(const SynthonModel &model, nn::ParamStore &store,
                      const std::vector<CompletionExample> &examples);

// Both trainers leave the best parameters (by validation metric) in `store`.
// An empty validation set falls back to the training set.
TrainResult train_center(const CenterModel &model, nn::ParamStore &store, const std::vector<CenterExample> &train,
                         const std::vector<CenterExample> &val, const TrainConfig &config);
TrainResult train_synthon(const SynthonModel &model, nn::ParamStore &store,
                          const std::vector<CompletionExample> &train, const std::vector<CompletionExample> &val,
                          const TrainConfig &config);

}  // namespace retro::model

#endif  // RETROGRAPH_MODEL_TRAIN_HPP_
