// include/xdomain/model/layers.h

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

#ifndef XDOMAIN_MODEL_LAYERS_H_
#define XDOMAIN_MODEL_LAYERS_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "xdomain/model/config.h"
#include "xdomain/numkit/tensor.h"

// Forward and hand-derived backward passes of every layer type.  Forward
// functions take an optional cache: pass nullptr for evaluation mode, in
// which case nothing is retained and the call is reentrant.  Backward
// functions accumulate (+=) into `grads`.

namespace xdomain {

/// y = x W^T + b, optionally followed by ReLU.  W is [out x in].
struct DenseLayer {
  std::string weight;
  std::string bias;
  bool relu = true;
};

struct DenseCache {
  std::vector<Mat> inputs;
  std::vector<Mat> pre_activations;
};

Mat DenseForward(const TensorMap &params, std::span<const DenseLayer> layers, const Mat &x,
                 DenseCache *cache);

/// `dx` may be null when the input gradient is not needed.
void DenseBackward(const TensorMap &params, std::span<const DenseLayer> layers,
                   const DenseCache &cache, const Mat &dy, TensorMap *grads, Mat *dx);

/// Row t of the result is [x(t-c), ..., x(t+c)] with indices clamped to
/// [0, T-1].
Mat Splice(const Mat &x, int context);
/// Adjoint of Splice.
Mat SpliceBackward(const Mat &d_spliced, int context, int dim);

// ---- Frame extractor (Phi0 body) ------------------------------------------

struct ExtractorCache {
  std::array<Mat, 4> spliced;
  std::array<Mat, 4> pre_activations;
};

/// x is [T x input_dim]; returns [T x group4_dim].  Every group ends in ReLU.
Mat ExtractorForward(const ModelConfig &cfg, const TensorMap &params, const Mat &x,
                     ExtractorCache *cache);

/// Back-propagates through groups 4 down to `first_group` (1-based), adding
/// parameter gradients for those groups only.  `d_input` may be requested
/// only when first_group == 1.
void ExtractorBackward(const ModelConfig &cfg, const TensorMap &params,
                       const ExtractorCache &cache, const Mat &d_out, int first_group,
                       TensorMap *grads, Mat *d_input);

// ---- Learnable dictionary encoding ------------------------------------------

struct LdeCache {
  Mat frames;
  /// Frames visited in lexicographic order of their values, which makes
  /// every sum over time independent of the input frame order.
  std::vector<Eigen::Index> order;
  Mat weights;  // [T x K] soft assignments
  Vec totals;   // [K] sum_t w_tk
  Mat encoded;  // [K x D] e_k
};

/// [T x K] assignment weights softmax_k(-exp(log_scale_k) |f_t - d_k|^2).
Mat LdeAssignments(const TensorMap &params, const Mat &frames);

/// Returns concat_k e_k with e_k = sum_t w_tk (f_t - d_k) / sum_t w_tk.
RowVec LdeForward(const TensorMap &params, const Mat &frames, LdeCache *cache);

void LdeBackward(const TensorMap &params, const LdeCache &cache, const RowVec &d_embedding,
                 TensorMap *grads, Mat *d_frames);

// ---- Shared embedding extractor (extractor + LDE) ------------------------

struct BackboneTrace {
  std::vector<ExtractorCache> extractor;
  std::vector<LdeCache> lde;
};

/// Row i is the LDE embedding of utterance i.
Mat BackboneForward(const ModelConfig &cfg, const TensorMap &params, std::span<const Mat> utts,
                    BackboneTrace *trace);

/// Accumulates LDE gradients and extractor gradients for groups
/// first_group..4.
void BackboneBackward(const ModelConfig &cfg, const TensorMap &params,
                      const BackboneTrace &trace, const Mat &d_embeddings, int first_group,
                      TensorMap *grads);

// ---- Adaptation block --------------------------------------------------------

std::vector<DenseLayer> Phi1Layers(int domain);
/// The last Phi2 layer is linear.
std::vector<DenseLayer> Phi2Layers(int domain);
std::vector<DenseLayer> ClassifierLayers(int domain);
std::vector<DenseLayer> HeadLayers();

enum class SubnetStage { kPhi1, kFull };

/// Rows of `embeddings` are utterance embeddings; `domain` is in 1..N.
Mat SubnetForward(const ModelConfig &cfg, const TensorMap &params, int domain,
                  const Mat &embeddings, SubnetStage stage);

/// Speaker logits of the domain-`domain` classifier (affine, no activation).
Mat ClassifierForward(const ModelConfig &cfg, const TensorMap &params, int domain,
                      const Mat &embeddings);

/// Throws LookupError unless 1 <= domain <= N and the block exists.
void CheckDomain(const ModelConfig &cfg, const TensorMap &params, int domain);

}  // namespace xdomain

#endif  // XDOMAIN_MODEL_LAYERS_H_
