// include/xdomain/model/model.h

// Copyright 2026  The xdomain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XDOMAIN_MODEL_MODEL_H_
#define XDOMAIN_MODEL_MODEL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "xdomain/model/config.h"
#include "xdomain/numkit/optimizer.h"
#include "xdomain/numkit/tensor.h"

namespace xdomain {

/// A configuration plus its parameter tensors.  The adaptation block
/// (per-domain subnets and classifiers) exists only once InitAdaptationBlock
/// has been called.
class Model {
 public:
  explicit Model(ModelConfig config);
  /// Adopts existing tensors; throws StructuralError if any shape disagrees
  /// with the config.
  Model(ModelConfig config, TensorMap params);

  const ModelConfig &Config() const { return config_; }
  const TensorMap &Params() const { return params_; }
  TensorMap &Params() { return params_; }

  /// Uniform fan-in initialisation of the extractor and head, zero biases.
  /// The LDE dictionary is seeded with K random extractor output frames drawn
  /// from `utterances` (Gaussian if none are given).
  void InitBackbone(std::uint64_t seed, std::span<const Mat> utterances);

  /// Creates the N subnets and classifiers.  All domains get the same initial
  /// values, so the discrepancy between them starts at zero.
  void InitAdaptationBlock(std::uint64_t seed);

  bool HasAdaptationBlock() const;

 private:
  ModelConfig config_;
  TensorMap params_;
};

/// Expected shape of every tensor the config defines (adaptation block
/// included).
TensorMap ExpectedShapes(const ModelConfig &cfg);

/**
   Parameter groups for a training stage:
     pretrain: everything trainable, multiplier 1.
     finetune: g1-g3 frozen; g4, lde, head trainable.
     adapt:    g1-g3 and head frozen; g4, lde multiplier 1; every subnet and
               classifier multiplier 10.
   Groups whose tensors are absent from `params` are omitted.
*/
std::vector<ParamGroup> TrainableGroups(const ModelConfig &cfg, const TensorMap &params,
                                        Stage stage);

/// Multiplier of the adaptation block relative to the backbone.
inline constexpr double kAdaptationBlockLrMultiplier = 10.0;

}  // namespace xdomain

#endif  // XDOMAIN_MODEL_MODEL_H_
