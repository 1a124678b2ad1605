// include/xdomain/losses/objectives.h

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

#ifndef XDOMAIN_LOSSES_OBJECTIVES_H_
#define XDOMAIN_LOSSES_OBJECTIVES_H_

#include <span>
#include <vector>

#include "xdomain/losses/losses.h"
#include "xdomain/model/config.h"
#include "xdomain/numkit/tensor.h"

// Model-level training objectives.  `grads` may be null for a forward-only
// evaluation; otherwise gradients are accumulated into it.

namespace xdomain {

/// Clean source samples plus, for each target domain h = 1..N, its own
/// samples.  `targets[h - 1]` holds domain h.
struct DomainBatch {
  std::vector<Mat> source;
  std::vector<int> source_labels;
  std::vector<std::vector<Mat>> targets;
  std::vector<std::vector<int>> target_labels;

  /// n_s >= 2 and n_h >= 2 for every target, labels in [0, num_speakers).
  void Validate(int num_speakers) const;
};

struct LossBreakdown {
  double dis = 0.0;
  double mmd = 0.0;
  double cls = 0.0;
  double mu = 0.0;
  double total = 0.0;
};

struct AdaptationLossOptions {
  double theta = 10.0;
  MmdKernel kernel;
  /// Lowest extractor group receiving gradients (1..4).
  int first_trainable_group = 4;
};

/**
   The multi-task adaptation objective at progress p:

     dis:  DiscrepancyLoss over Phi1_h(Phi0(x_s)), h = 1..N
     mmd:  sum_h MMD(Phi2_h(Phi1_h(Phi0(x_s))), Phi2_h(Phi1_h(Phi0(x_h))))
     cls:  sum_h CrossEntropy(classifier_h(Phi2_h(Phi1_h(Phi0(x_h)))), y_h)
     total = mu(p) (mmd + dis) + cls,  mu = ProgressiveMu(p, theta)

   Source samples contribute no classification term.
*/
LossBreakdown AdaptationLoss(const ModelConfig &cfg, const TensorMap &params,
                             const DomainBatch &batch, double p,
                             const AdaptationLossOptions &opts, TensorMap *grads);

/// The cls component alone, forward only.
double ClsLoss(const ModelConfig &cfg, const TensorMap &params, const DomainBatch &batch);

/// Speaker cross-entropy of the single head on LDE embeddings, used by
/// pretraining and fine-tuning.
double SpeakerLoss(const ModelConfig &cfg, const TensorMap &params, std::span<const Mat> utts,
                   std::span<const int> labels, int first_trainable_group, TensorMap *grads);

}  // namespace xdomain

#endif  // XDOMAIN_LOSSES_OBJECTIVES_H_
