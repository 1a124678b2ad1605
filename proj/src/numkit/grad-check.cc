// src/numkit/grad-check.cc

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

#include "xdomain/numkit/grad-check.h"

#include <algorithm>
#include <cmath>

#include "xdomain/numkit/errors.h"

namespace xdomain {

GradCheckResult GradCheck(const Objective &f, const TensorMap &point, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ContractError("GradCheck: eps outside [1e-7, 1e-3]");

  TensorMap analytic;
  f(point, &analytic);

  GradCheckResult result;
  TensorMap probe = point;
  for (auto &[name, tensor] : probe) {
    const Tensor *grad = nullptr;
    if (auto it = analytic.find(name); it != analytic.end()) {
      if (!it->second.SameShape(tensor))
        throw StructuralError("GradCheck: gradient shape mismatch for '" + name + "'");
      grad = &it->second;
    }
    for (std::size_t i = 0; i < tensor.Size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + eps;
      const double up = f(probe, nullptr);
      tensor[i] = saved - eps;
      const double down = f(probe, nullptr);
      tensor[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("GradCheck: objective non-finite near '" + name + "'");
      const double numeric = (up - down) / (2.0 * eps);
      const double a = grad ? (*grad)[i] : 0.0;
      const double err =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      if (result.worst_tensor.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace xdomain
