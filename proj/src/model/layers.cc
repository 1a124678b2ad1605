// src/model/layers.cc

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

#include "xdomain/model/layers.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

Mat Relu(const Mat &x) { return x.cwiseMax(0.0); }

Mat ReluMask(const Mat &pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

}  // namespace

Mat DenseForward(const TensorMap &params, std::span<const DenseLayer> layers, const Mat &x,
                 DenseCache *cache) {
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Mat h = x;
  for (const DenseLayer &layer : layers) {
    const Tensor &w = GetTensor(params, layer.weight);
    const Tensor &b = GetTensor(params, layer.bias);
    if (static_cast<std::size_t>(h.cols()) != w.NumCols())
      throw StructuralError("layer '" + layer.weight + "' expects input dim " +
                            std::to_string(w.NumCols()) + ", got " + std::to_string(h.cols()));
    Mat pre = h * w.AsMatrix().transpose();
    pre.rowwise() += b.AsMatrix().row(0);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre_activations.push_back(pre);
    }
    h = layer.relu ? Relu(pre) : std::move(pre);
  }
  return h;
}

void DenseBackward(const TensorMap &params, std::span<const DenseLayer> layers,
                   const DenseCache &cache, const Mat &dy, TensorMap *grads, Mat *dx) {
  Mat d = dy;
  for (std::size_t i = layers.size(); i-- > 0;) {
    const DenseLayer &layer = layers[i];
    const Tensor &w = GetTensor(params, layer.weight);
    const Tensor &b = GetTensor(params, layer.bias);
    if (layer.relu) d = d.cwiseProduct(ReluMask(cache.pre_activations[i]));
    GradSlot(grads, layer.weight, w).AsMatrix() += d.transpose() * cache.inputs[i];
    GradSlot(grads, layer.bias, b).AsMatrix().row(0) += d.colwise().sum();
    if (i > 0 || dx) d = d * w.AsMatrix();
  }
  if (dx) *dx = std::move(d);
}

Mat Splice(const Mat &x, int context) {
  const Eigen::Index frames = x.rows(), dim = x.cols(), width = 2 * context + 1;
  Mat out(frames, width * dim);
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index j = 0; j < width; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + j - context, 0, frames - 1);
      out.block(t, j * dim, 1, dim) = x.row(src);
    }
  return out;
}

Mat SpliceBackward(const Mat &d_spliced, int context, int dim) {
  const Eigen::Index frames = d_spliced.rows(), width = 2 * context + 1;
  Mat dx = Mat::Zero(frames, dim);
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index j = 0; j < width; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + j - context, 0, frames - 1);
      dx.row(src) += d_spliced.block(t, j * dim, 1, dim);
    }
  return dx;
}

Mat ExtractorForward(const ModelConfig &cfg, const TensorMap &params, const Mat &x,
                     ExtractorCache *cache) {
  if (x.rows() < 1) throw ContractError("extractor: utterance has no frames");
  if (x.cols() != cfg.extractor.input_dim)
    throw StructuralError("extractor: input dim " + std::to_string(x.cols()) +
                          " does not match config " + std::to_string(cfg.extractor.input_dim));
  Mat h = x;
  for (int g = 0; g < 4; ++g) {
    const Tensor &w = GetTensor(params, param_names::GroupWeight(g + 1));
    const Tensor &b = GetTensor(params, param_names::GroupBias(g + 1));
    Mat spliced = Splice(h, cfg.extractor.context[g]);
    if (static_cast<std::size_t>(spliced.cols()) != w.NumCols())
      throw StructuralError("extractor: group " + std::to_string(g + 1) +
                            " weight does not match spliced input");
    Mat pre = spliced * w.AsMatrix().transpose();
    pre.rowwise() += b.AsMatrix().row(0);
    h = Relu(pre);
    if (cache) {
      cache->spliced[g] = std::move(spliced);
      cache->pre_activations[g] = std::move(pre);
    }
  }
  return h;
}

void ExtractorBackward(const ModelConfig &cfg, const TensorMap &params,
                       const ExtractorCache &cache, const Mat &d_out, int first_group,
                       TensorMap *grads, Mat *d_input) {
  if (first_group < 1 || first_group > 4)
    throw ContractError("extractor: first_group must be in 1..4");
  if (d_input && first_group != 1)
    throw ContractError("extractor: input gradient requires first_group == 1");
  Mat d = d_out;
  for (int g = 3; g >= first_group - 1; --g) {
    const Tensor &w = GetTensor(params, param_names::GroupWeight(g + 1));
    const Tensor &b = GetTensor(params, param_names::GroupBias(g + 1));
    d = d.cwiseProduct(ReluMask(cache.pre_activations[g]));
    GradSlot(grads, param_names::GroupWeight(g + 1), w).AsMatrix() +=
        d.transpose() * cache.spliced[g];
    GradSlot(grads, param_names::GroupBias(g + 1), b).AsMatrix().row(0) += d.colwise().sum();
    if (g > first_group - 1 || d_input) {
      const int prev_dim = g == 0 ? cfg.extractor.input_dim : cfg.extractor.group_dims[g - 1];
      d = SpliceBackward(d * w.AsMatrix(), cfg.extractor.context[g], prev_dim);
    }
  }
  if (d_input) *d_input = std::move(d);
}

Mat LdeAssignments(const TensorMap &params, const Mat &frames) {
  const Tensor &dict = GetTensor(params, param_names::kLdeDictionary);
  const Tensor &log_scale = GetTensor(params, param_names::kLdeLogScale);
  const auto dictionary = dict.AsMatrix();
  const Eigen::Index frames_n = frames.rows(), k_n = dictionary.rows();
  if (frames.cols() != dictionary.cols())
    throw StructuralError("LDE: frame dim does not match dictionary");
  if (log_scale.Size() != static_cast<std::size_t>(k_n))
    throw StructuralError("LDE: scale count does not match dictionary");
  // Plain sequential loops: vectorised reductions would sum in an order that
  // depends on the row's memory alignment, i.e. on the frame's position.
  Mat weights(frames_n, k_n);
  for (Eigen::Index t = 0; t < frames_n; ++t) {
    double max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < k_n; ++k) {
      double dist = 0.0;
      for (Eigen::Index j = 0; j < frames.cols(); ++j) {
        const double diff = frames(t, j) - dictionary(k, j);
        dist += diff * diff;
      }
      weights(t, k) = -std::exp(log_scale[k]) * dist;
      max = std::max(max, weights(t, k));
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < k_n; ++k) {
      weights(t, k) = std::exp(weights(t, k) - max);
      sum += weights(t, k);
    }
    for (Eigen::Index k = 0; k < k_n; ++k) weights(t, k) /= sum;
  }
  return weights;
}

RowVec LdeForward(const TensorMap &params, const Mat &frames, LdeCache *cache) {
  if (frames.rows() < 1) throw ContractError("LDE: at least one frame is required");
  const auto dictionary = GetTensor(params, param_names::kLdeDictionary).AsMatrix();
  const Eigen::Index frames_n = frames.rows(), k_n = dictionary.rows(), dim = dictionary.cols();

  std::vector<Eigen::Index> order(frames_n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::lexicographical_compare(frames.row(a).begin(), frames.row(a).end(),
                                        frames.row(b).begin(), frames.row(b).end());
  });

  Mat weights = LdeAssignments(params, frames);
  Vec totals = Vec::Zero(k_n);
  Mat encoded = Mat::Zero(k_n, dim);
  for (Eigen::Index k = 0; k < k_n; ++k) {
    for (Eigen::Index t : order) {
      totals(k) += weights(t, k);
      encoded.row(k) += weights(t, k) * (frames.row(t) - dictionary.row(k));
    }
    // A component with no mass at all contributes a zero residual.
    if (totals(k) > 0.0) encoded.row(k) /= totals(k);
  }

  RowVec embedding = Eigen::Map<const RowVec>(encoded.data(), k_n * dim);
  if (cache) {
    cache->frames = frames;
    cache->order = std::move(order);
    cache->weights = std::move(weights);
    cache->totals = std::move(totals);
    cache->encoded = std::move(encoded);
  }
  return embedding;
}

void LdeBackward(const TensorMap &params, const LdeCache &cache, const RowVec &d_embedding,
                 TensorMap *grads, Mat *d_frames) {
  const Tensor &dict_t = GetTensor(params, param_names::kLdeDictionary);
  const Tensor &log_scale = GetTensor(params, param_names::kLdeLogScale);
  const auto dictionary = dict_t.AsMatrix();
  const Mat &frames = cache.frames;
  const Mat &w = cache.weights;
  const Eigen::Index frames_n = frames.rows(), k_n = dictionary.rows(), dim = dictionary.cols();

  // dL/dw_tk through the normalised residual sum.
  Mat d_weight = Mat::Zero(frames_n, k_n);
  for (Eigen::Index k = 0; k < k_n; ++k) {
    if (!(cache.totals(k) > 0.0)) continue;
    const auto g = d_embedding.segment(k * dim, dim);
    for (Eigen::Index t = 0; t < frames_n; ++t)
      d_weight(t, k) =
          g.dot(frames.row(t) - dictionary.row(k) - cache.encoded.row(k)) / cache.totals(k);
  }
  // Through the per-frame softmax.
  Mat d_logit(frames_n, k_n);
  for (Eigen::Index t = 0; t < frames_n; ++t) {
    const double mean = w.row(t).dot(d_weight.row(t));
    d_logit.row(t) = w.row(t).cwiseProduct((d_weight.row(t).array() - mean).matrix());
  }

  Mat d_f = Mat::Zero(frames_n, dim);
  Tensor &d_dict = GradSlot(grads, param_names::kLdeDictionary, dict_t);
  Tensor &d_log_scale = GradSlot(grads, param_names::kLdeLogScale, log_scale);
  auto d_dictionary = d_dict.AsMatrix();
  for (Eigen::Index k = 0; k < k_n; ++k) {
    const double scale = std::exp(log_scale[k]);
    const bool has_mass = cache.totals(k) > 0.0;
    const auto g = d_embedding.segment(k * dim, dim);
    for (Eigen::Index t : cache.order) {
      const RowVec r = frames.row(t) - dictionary.row(k);
      RowVec d_r = -2.0 * scale * d_logit(t, k) * r;
      if (has_mass) d_r += (w(t, k) / cache.totals(k)) * g;
      d_f.row(t) += d_r;
      d_dictionary.row(k) -= d_r;
      d_log_scale[k] += d_logit(t, k) * (-scale * r.squaredNorm());
    }
  }
  if (d_frames) *d_frames = std::move(d_f);
}

Mat BackboneForward(const ModelConfig &cfg, const TensorMap &params, std::span<const Mat> utts,
                    BackboneTrace *trace) {
  Mat embeddings(static_cast<Eigen::Index>(utts.size()), cfg.EmbeddingDim());
  if (trace) {
    trace->extractor.assign(utts.size(), {});
    trace->lde.assign(utts.size(), {});
  }
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const Mat frames =
        ExtractorForward(cfg, params, utts[i], trace ? &trace->extractor[i] : nullptr);
    embeddings.row(static_cast<Eigen::Index>(i)) =
        LdeForward(params, frames, trace ? &trace->lde[i] : nullptr);
  }
  return embeddings;
}

void BackboneBackward(const ModelConfig &cfg, const TensorMap &params,
                      const BackboneTrace &trace, const Mat &d_embeddings, int first_group,
                      TensorMap *grads) {
  for (std::size_t i = 0; i < trace.lde.size(); ++i) {
    Mat d_frames;
    LdeBackward(params, trace.lde[i], d_embeddings.row(static_cast<Eigen::Index>(i)), grads,
                &d_frames);
    ExtractorBackward(cfg, params, trace.extractor[i], d_frames, first_group, grads, nullptr);
  }
}

std::vector<DenseLayer> Phi1Layers(int domain) {
  return {{param_names::SubnetWeight(domain, 0), param_names::SubnetBias(domain, 0), true},
          {param_names::SubnetWeight(domain, 1), param_names::SubnetBias(domain, 1), true}};
}

std::vector<DenseLayer> Phi2Layers(int domain) {
  return {{param_names::SubnetWeight(domain, 2), param_names::SubnetBias(domain, 2), true},
          {param_names::SubnetWeight(domain, 3), param_names::SubnetBias(domain, 3), false}};
}

std::vector<DenseLayer> ClassifierLayers(int domain) {
  return {{param_names::ClassifierWeight(domain), param_names::ClassifierBias(domain), false}};
}

std::vector<DenseLayer> HeadLayers() {
  return {{param_names::kHeadWeight, param_names::kHeadBias, false}};
}

void CheckDomain(const ModelConfig &cfg, const TensorMap &params, int domain) {
  if (domain < 1 || domain > cfg.subnet.num_domains)
    throw LookupError("unknown target domain id " + std::to_string(domain));
  if (!params.contains(param_names::SubnetWeight(domain, 0)))
    throw LookupError("model has no adaptation block for domain " + std::to_string(domain));
}

Mat SubnetForward(const ModelConfig &cfg, const TensorMap &params, int domain,
                  const Mat &embeddings, SubnetStage stage) {
  CheckDomain(cfg, params, domain);
  Mat h = DenseForward(params, Phi1Layers(domain), embeddings, nullptr);
  if (stage == SubnetStage::kPhi1) return h;
  return DenseForward(params, Phi2Layers(domain), h, nullptr);
}

Mat ClassifierForward(const ModelConfig &cfg, const TensorMap &params, int domain,
                      const Mat &embeddings) {
  CheckDomain(cfg, params, domain);
  return DenseForward(params, ClassifierLayers(domain), embeddings, nullptr);
}

}  // namespace xdomain
