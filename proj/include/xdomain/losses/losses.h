// include/xdomain/losses/losses.h

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

#ifndef XDOMAIN_LOSSES_LOSSES_H_
#define XDOMAIN_LOSSES_LOSSES_H_

#include <span>
#include <vector>

#include "xdomain/numkit/tensor.h"

// Loss functions over batch matrices (rows are samples).  Each returns the
// loss value; gradient out-parameters are optional and are overwritten.

namespace xdomain {

/**
   Mean absolute disagreement between every pair of per-domain outputs
   computed on the same samples:

     2 / (N (N-1)) * sum_{i<j} mean_{rows, cols} |out_i - out_j|

   All matrices must share a shape and N >= 2.  The subgradient of |x| at 0
   is taken as 0.
*/
double DiscrepancyLoss(std::span<const Mat> outputs, std::vector<Mat> *grads);

struct MmdKernel {
  enum class Kind { kLinear, kRbf };
  Kind kind = Kind::kLinear;
  /// Gaussian kernel exp(-|x-y|^2 / (2 h^2)); used by kRbf.
  double bandwidth = 1.0;
  /// When set, callers that own a source/target pair (MmdLoss and the
  /// adaptation objective) replace `bandwidth` by the median pooled pairwise
  /// distance of that pair, held constant for differentiation.
  bool median_heuristic = false;
};

/// Median Euclidean distance over all pairs of rows of [src; tgt]; 1 if the
/// median is zero.
double MedianHeuristicBandwidth(const Mat &src, const Mat &tgt);

/**
   Squared MMD between the row sets `src` and `tgt`.
     linear: |mean(src) - mean(tgt)|^2
     rbf:    unbiased U-statistic; within-set sums exclude i == j, so both
             sets need at least two rows.
   `bandwidth` must be positive for rbf (median_heuristic is ignored here).
*/
double MmdPair(const Mat &src, const Mat &tgt, const MmdKernel &kernel, Mat *d_src, Mat *d_tgt);

/// Sum over domains h of MmdPair(sources[h], targets[h]).
double MmdLoss(std::span<const Mat> sources, std::span<const Mat> targets,
               const MmdKernel &kernel, std::vector<Mat> *d_sources,
               std::vector<Mat> *d_targets);

/// Mean over rows of -log softmax(logits)[label], max-logit stabilised.
/// The gradient is (softmax - onehot) / n.
double CrossEntropy(const Mat &logits, std::span<const int> labels, Mat *d_logits);

}  // namespace xdomain

#endif  // XDOMAIN_LOSSES_LOSSES_H_
