// include/xdomain/numkit/grad-check.h

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

#ifndef XDOMAIN_NUMKIT_GRAD_CHECK_H_
#define XDOMAIN_NUMKIT_GRAD_CHECK_H_

#include <functional>
#include <string>

#include "xdomain/numkit/tensor.h"

namespace xdomain {

/// A scalar function of named tensors.  When `grad` is non-null it must be
/// filled with the analytic gradient; missing entries count as zero.
using Objective = std::function<double(const TensorMap &point, TensorMap *grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/**
   Compares the analytic gradient of `f` at `point` against central
   differences with step `eps` (in [1e-7, 1e-3]), coordinate by coordinate.
   The error of one coordinate is |a - n| / max(1, |a|, |n|).
   Throws NumericError if f is non-finite at a perturbed point.
*/
GradCheckResult GradCheck(const Objective &f, const TensorMap &point, double eps = 1e-6);

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_GRAD_CHECK_H_
