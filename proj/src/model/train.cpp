//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/model/train.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>

#include "retrograph/chem/smiles.hpp"
#include "retrograph/error.hpp"
#include "retrograph/nn/checkpoint.hpp"
#include "retrograph/nn/optim.hpp"

namespace retro::model {

namespace {

std::map<std::string, nn::Matrix> snapshot(const nn::ParamStore &store) {
  std::map<std::string, nn::Matrix> out;
  for (const auto &[name, p]: store.all())
    out.emplace(name, p.value);
  return out;
}

void restore(nn::ParamStore &store, const std::map<std::string, nn::Matrix> &values) {
  for (const auto &[name, v]: values)
    store.get(name).value = v;
}

template <class Example>
using LossFn = std::function<nn::Var(nn::Tape &, const std::vector<const Example *> &)>;

template <class Example>
TrainResult run(nn::ParamStore &store, const std::vector<Example> &train, const TrainConfig &config,
                const LossFn<Example> &loss_fn, const std::function<double()> &metric_fn) {
  if (train.empty())
    throw EmptyBatch("no training examples");
  if (config.epochs < 0 || config.batch_size < 1 || !(config.lr > 0))
    throw ConfigError("invalid training configuration");
  nn::tune_allocator();
  nn::AdamConfig ac;
  ac.lr = config.lr;
  ac.decay = config.lr_decay;
  nn::Adam adam(ac);
  nn::PlateauSchedule plateau(config.min_delta, config.patience);
  std::mt19937_64 rng(config.seed ^ 0x5eedULL);
  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path, std::ios::app);
    if (!log)
      throw ConfigError("cannot open log file " + config.log_path);
  }

  TrainResult result;
  std::map<std::string, nn::Matrix> best = snapshot(store);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += static_cast<std::size_t>(config.batch_size)) {
      std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(config.batch_size));
      std::vector<const Example *> batch;
      for (std::size_t i = lo; i < hi; ++i)
        batch.push_back(&train[order[i]]);
      nn::Tape tape;
      store.zero_grad();
      nn::Var loss = loss_fn(tape, batch);
      total += static_cast<double>(loss.scalar()) * static_cast<double>(batch.size());
      tape.backward(loss, &store);
      adam.step(store);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = total / static_cast<double>(train.size());
    rec.metric = metric_fn();
    rec.lr = adam.lr();
    result.history.push_back(rec);
    if (rec.metric > result.best_metric) {
      result.best_metric = rec.metric;
      result.best_epoch = epoch;
      best = snapshot(store);
    }
    if (log) {
      nlohmann::json j = { { "epoch", epoch }, { "loss", rec.loss }, { "metric", rec.metric }, { "lr", rec.lr } };
      log << j.dump() << "\n";
      log.flush();
    }
    if (rec.metric >= config.stop_at)
      break;
    if (plateau.update(rec.metric))
      adam.decay_lr();
  }
  restore(store, best);
  if (!config.checkpoint_dir.empty()) {
    nlohmann::json meta = config.meta;
    meta["best_epoch"] = result.best_epoch;
    meta["best_metric"] = result.best_metric;
    nn::save_checkpoint(config.checkpoint_dir, store, meta, config.seed, config.prefix);
  }
  return result;
}

}  // namespace

double center_accuracy(const CenterModel &model, nn::ParamStore &store, const std::vector<CenterExample> &examples,
                       int k) {
  if (examples.empty())
    return 0.0;
  int hits = 0;
  for (const CenterExample &ex: examples) {
    std::vector<SynthonPrediction> preds;
    try {
      preds = model.top_k(store, ex.product, ex.input, k);
    } catch (const NoValidCenter &) {
      continue;
    }
    for (const SynthonPrediction &p: preds) {
      chem::MolGraph g = p.synthons;
      g.clear_map_numbers();
      if (chem::write_smiles(g) == ex.synthon_smiles) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

double trace_accuracy(const SynthonModel &model, nn::ParamStore &store,
                      const std::vector<CompletionExample> &examples) {
  if (examples.empty())
    return 0.0;
  int hits = 0;
  constexpr std::size_t kChunk = 64;
  for (std::size_t lo = 0; lo < examples.size(); lo += kChunk) {
    std::vector<const CompletionExample *> batch;
    for (std::size_t i = lo; i < std::min(examples.size(), lo + kChunk); ++i)
      batch.push_back(&examples[i]);
    hits += model.exact_trace_hits(store, batch);
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

TrainResult train_center(const CenterModel &model, nn::ParamStore &store, const std::vector<CenterExample> &train,
                         const std::vector<CenterExample> &val, const TrainConfig &config) {
  const std::vector<CenterExample> &check = val.empty() ? train : val;
  return run<CenterExample>(
    store, train, config,
    [&](nn::Tape &t, const std::vector<const CenterExample *> &b) { return model.loss(t, store, b); },
    [&] { return center_accuracy(model, store, check, 1); });
}

TrainResult train_synthon(const SynthonModel &model, nn::ParamStore &store,
                          const std::vector<CompletionExample> &train, const std::vector<CompletionExample> &val,
                          const TrainConfig &config) {
  const std::vector<CompletionExample> &check = val.empty() ? train : val;
  return run<CompletionExample>(
    store, train, config,
    [&](nn::Tape &t, const std::vector<const CompletionExample *> &b) { return model.loss(t, store, b); },
    [&] { return trace_accuracy(model, store, check); });
}

}  // namespace retro::model
