//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_NN_OPTIM_HPP_
#define RETROGRAPH_NN_OPTIM_HPP_

#include <map>
#include <string>

#include "retrograph/nn/tensor.hpp"

namespace retro::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double decay = 0.9;  // multiplier applied by decay_lr()
};

class Adam {
public:
  explicit Adam(AdamConfig config = {}): config_(config) {}

  // One update from the gradients currently stored in `store`.
  void step(ParamStore &store);
  void decay_lr() { config_.lr *= config_.decay; }

  double lr() const { return config_.lr; }
  long steps() const { return t_; }
  const AdamConfig &config() const { return config_; }

private:
  struct Moments {
    Matrix m, v;
  };
  AdamConfig config_;
  long t_ = 0;
  std::map<std::string, Moments> moments_;
};

// Tracks a validation metric and decays the learning rate when it has not
// improved by `min_delta` for `patience` consecutive checks.
class PlateauSchedule {
public:
  PlateauSchedule(double min_delta = 0.01, int patience = 10): min_delta_(min_delta), patience_(patience) {}

  // Returns true when the caller should decay the learning rate.
  bool update(double metric);
  double best() const { return best_; }

private:
  double min_delta_;
  int patience_;
  double best_ = -1e300;
  int stale_ = 0;
};

}  // namespace retro::nn

#endif  // RETROGRAPH_NN_OPTIM_HPP_
