//
// retrograph - Copyright 2026 The retrograph Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RETROGRAPH_ERROR_HPP_
#define RETROGRAPH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace retro {

class Error: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define RETRO_DEFINE_ERROR(Name)                                               \
  class Name: public Error {                                                   \
  public:                                                                      \
    using Error::Error;                                                        \
  }

// chem
RETRO_DEFINE_ERROR(SyntaxError);
RETRO_DEFINE_ERROR(ValenceError);
RETRO_DEFINE_ERROR(UnknownElement);
RETRO_DEFINE_ERROR(WidthMismatch);
RETRO_DEFINE_ERROR(OutOfRange);

// reaction data
RETRO_DEFINE_ERROR(MappingError);
RETRO_DEFINE_ERROR(InvalidLabel);
RETRO_DEFINE_ERROR(DecompositionError);

// numerics
RETRO_DEFINE_ERROR(ShapeMismatch);
RETRO_DEFINE_ERROR(NonFinite);
RETRO_DEFINE_ERROR(EmptyBatch);
RETRO_DEFINE_ERROR(CheckpointError);

// pipeline
RETRO_DEFINE_ERROR(ChemicallyInvalid);
RETRO_DEFINE_ERROR(NoValidCenter);
RETRO_DEFINE_ERROR(MissingGroundTruth);
RETRO_DEFINE_ERROR(FewerPointsThanClusters);
RETRO_DEFINE_ERROR(ConfigError);

#undef RETRO_DEFINE_ERROR

}  // namespace retro

#endif  // RETROGRAPH_ERROR_HPP_
