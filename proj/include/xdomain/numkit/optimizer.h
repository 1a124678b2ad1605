// include/xdomain/numkit/optimizer.h

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

#ifndef XDOMAIN_NUMKIT_OPTIMIZER_H_
#define XDOMAIN_NUMKIT_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xdomain/numkit/tensor.h"

namespace xdomain {

/// A set of parameter tensors sharing a learning-rate multiplier and a
/// freeze flag.  A frozen group is never touched by AdamStep.
struct ParamGroup {
  std::string name;
  std::vector<std::string> tensors;
  double lr_multiplier = 1.0;
  bool frozen = false;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  /// Decoupled: applied to the parameter, scaled by the effective lr.
  double weight_decay = 1e-4;
  bool amsgrad = true;
};

/// Per-parameter moments.  `max_second` is the AMSGrad running maximum of
/// `second` and never decreases.
struct OptimState {
  TensorMap first;
  TensorMap second;
  TensorMap max_second;
  std::uint64_t step = 0;
};

/**
   One Adam/AMSGrad update with decoupled weight decay.  For every tensor in an
   unfrozen group, with lr = base_lr * group.lr_multiplier:

     m    <- b1 m + (1 - b1) g
     v    <- b2 v + (1 - b2) g^2
     vmax <- max(vmax, v)
     w    <- w (1 - lr wd) - lr (m / (1 - b1^t)) / (sqrt(vmax / (1 - b2^t)) + eps)

   `grads` must hold a gradient for every trainable tensor; entries for frozen
   or unknown tensors are ignored.  Throws StructuralError on a shape mismatch
   and NumericError (naming the tensor) on a non-finite gradient; in either
   case nothing has been modified.
*/
void AdamStep(std::span<const ParamGroup> groups, const TensorMap &grads, double base_lr,
              const AdamOptions &opts, TensorMap *params, OptimState *state);

/// Rounds parameters and optimizer moments to their 32-bit storage values.
void RoundToFloat(OptimState *state);

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_OPTIMIZER_H_
