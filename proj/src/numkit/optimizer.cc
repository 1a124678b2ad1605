// src/numkit/optimizer.cc

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

#include "xdomain/numkit/optimizer.h"

#include <cmath>

#include "xdomain/numkit/errors.h"

namespace xdomain {

void AdamStep(std::span<const ParamGroup> groups, const TensorMap &grads, double base_lr,
              const AdamOptions &opts, TensorMap *params, OptimState *state) {
  if (!(base_lr > 0.0)) throw ContractError("AdamStep: base_lr must be positive");

  // Validate everything before touching any state.
  for (const ParamGroup &group : groups) {
    if (group.frozen) continue;
    if (!(group.lr_multiplier > 0.0))
      throw ContractError("AdamStep: group '" + group.name + "' has non-positive lr multiplier");
    for (const std::string &name : group.tensors) {
      const Tensor &param = GetTensor(*params, name);
      auto it = grads.find(name);
      if (it == grads.end())
        throw StructuralError("AdamStep: missing gradient for trainable tensor '" + name + "'");
      if (!it->second.SameShape(param))
        throw StructuralError("AdamStep: gradient for '" + name + "' has shape " +
                              it->second.ShapeString() + ", parameter has " + param.ShapeString());
      if (!it->second.AllFinite())
        throw NumericError("AdamStep: non-finite gradient for '" + name + "'");
    }
  }

  const std::uint64_t t = ++state->step;
  const double bias1 = 1.0 - std::pow(opts.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(opts.beta2, static_cast<double>(t));

  for (const ParamGroup &group : groups) {
    if (group.frozen) continue;
    const double lr = base_lr * group.lr_multiplier;
    for (const std::string &name : group.tensors) {
      Tensor &param = GetTensor(params, name);
      const Tensor &grad = grads.at(name);
      Tensor &m = GradSlot(&state->first, name, param);
      Tensor &v = GradSlot(&state->second, name, param);
      Tensor &vmax = GradSlot(&state->max_second, name, param);
      for (std::size_t i = 0; i < param.Size(); ++i) {
        const double g = grad[i];
        m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g;
        v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g * g;
        vmax[i] = std::max(vmax[i], v[i]);
        const double second = opts.amsgrad ? vmax[i] : v[i];
        const double denom = std::sqrt(second / bias2) + opts.epsilon;
        param[i] *= 1.0 - lr * opts.weight_decay;
        param[i] -= lr * (m[i] / bias1) / denom;
      }
    }
  }
}

void RoundToFloat(OptimState *state) {
  RoundToFloat(&state->first);
  RoundToFloat(&state->second);
  RoundToFloat(&state->max_second);
}

}  // namespace xdomain
