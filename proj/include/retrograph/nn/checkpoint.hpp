//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_NN_CHECKPOINT_HPP_
#define RETROGRAPH_NN_CHECKPOINT_HPP_

#include <json.hpp>
#include <string>

#include "retrograph/nn/tensor.hpp"

namespace retro::nn {

// Writes <dir>/manifest.json plus one little-endian blob per tensor. `meta`
// is stored under "hyperparams"; `prefix` is prepended to every name.
void save_checkpoint(const std::string &dir, const ParamStore &store, const nlohmann::json &meta,
                     std::uint64_t seed, const std::string &prefix = "");

// Loads tensors whose names start with `prefix` (prefix stripped). Returns
// the manifest.
nlohmann::json load_checkpoint(const std::string &dir, ParamStore &store, const std::string &prefix = "");

}  // namespace retro::nn

#endif  // RETROGRAPH_NN_CHECKPOINT_HPP_
