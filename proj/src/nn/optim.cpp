//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "retrograph/nn/optim.hpp"

#include <cmath>

namespace retro::nn {

void Adam::step(ParamStore &store) {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const Real b1 = static_cast<Real>(config_.beta1), b2 = static_cast<Real>(config_.beta2);
  for (auto &[name, p]: store.all()) {
    Moments &mo = moments_[name];
    if (mo.m.size() == 0) {
      mo.m = Matrix::Zero(p.value.rows(), p.value.cols());
      mo.v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    mo.m = b1 * mo.m + (1 - b1) * p.grad;
    mo.v = b2 * mo.v + (1 - b2) * p.grad.cwiseProduct(p.grad);
    const Real step = static_cast<Real>(config_.lr / c1);
    const Real vscale = static_cast<Real>(1.0 / c2);
    const Real eps = static_cast<Real>(config_.eps);
    p.value.array() -= step * mo.m.array() / ((mo.v.array() * vscale).sqrt() + eps);
  }
}

bool PlateauSchedule::update(double metric) {
  if (metric >= best_ + min_delta_) {
    best_ = metric;
    stale_ = 0;
    return false;
  }
  if (metric > best_)
    best_ = metric;
  if (++stale_ >= patience_) {
    stale_ = 0;
    return true;
  }
  return false;
}

}  // namespace retro::nn
