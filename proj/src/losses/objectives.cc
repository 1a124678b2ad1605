// src/losses/objectives.cc

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

#include "xdomain/losses/objectives.h"

#include "xdomain/model/layers.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/numkit/schedule.h"

namespace xdomain {

namespace {

void CheckLabels(std::span<const int> labels, int num_speakers) {
  for (int y : labels)
    if (y < 0 || y >= num_speakers)
      throw ContractError("batch: speaker label " + std::to_string(y) + " out of range");
}

}  // namespace

void DomainBatch::Validate(int num_speakers) const {
  if (source.size() < 2) throw ContractError("batch: need at least two source samples");
  if (source.size() != source_labels.size())
    throw StructuralError("batch: source labels do not match samples");
  CheckLabels(source_labels, num_speakers);
  if (targets.empty()) throw ContractError("batch: no target domains");
  if (targets.size() != target_labels.size())
    throw StructuralError("batch: target label lists do not match domains");
  for (std::size_t h = 0; h < targets.size(); ++h) {
    if (targets[h].size() < 2)
      throw ContractError("batch: need at least two samples for target domain " +
                          std::to_string(h + 1));
    if (targets[h].size() != target_labels[h].size())
      throw StructuralError("batch: target labels do not match samples");
    CheckLabels(target_labels[h], num_speakers);
  }
}

LossBreakdown AdaptationLoss(const ModelConfig &cfg, const TensorMap &params,
                             const DomainBatch &batch, double p,
                             const AdaptationLossOptions &opts, TensorMap *grads) {
  batch.Validate(cfg.num_speakers);
  const int n_domains = static_cast<int>(batch.targets.size());
  if (n_domains != cfg.subnet.num_domains)
    throw StructuralError("batch: domain count does not match the model");

  LossBreakdown out;
  out.mu = ProgressiveMu(p, opts.theta);

  // Source path: shared backbone, then every domain's subnet.
  BackboneTrace src_trace;
  const Mat src_emb = BackboneForward(cfg, params, batch.source, grads ? &src_trace : nullptr);
  std::vector<Mat> src_phi1(n_domains), src_phi2(n_domains);
  std::vector<DenseCache> src_c1(n_domains), src_c2(n_domains);
  for (int h = 1; h <= n_domains; ++h) {
    CheckDomain(cfg, params, h);
    src_phi1[h - 1] = DenseForward(params, Phi1Layers(h), src_emb, &src_c1[h - 1]);
    src_phi2[h - 1] = DenseForward(params, Phi2Layers(h), src_phi1[h - 1], &src_c2[h - 1]);
  }

  // Target path: each domain through its own subnet and classifier.
  std::vector<BackboneTrace> tgt_trace(n_domains);
  std::vector<DenseCache> tgt_c1(n_domains), tgt_c2(n_domains), tgt_cc(n_domains);
  std::vector<Mat> tgt_phi2(n_domains), d_logits(n_domains);
  for (int h = 1; h <= n_domains; ++h) {
    const Mat emb = BackboneForward(cfg, params, batch.targets[h - 1],
                                    grads ? &tgt_trace[h - 1] : nullptr);
    const Mat phi1 = DenseForward(params, Phi1Layers(h), emb, &tgt_c1[h - 1]);
    tgt_phi2[h - 1] = DenseForward(params, Phi2Layers(h), phi1, &tgt_c2[h - 1]);
    const Mat logits = DenseForward(params, ClassifierLayers(h), tgt_phi2[h - 1], &tgt_cc[h - 1]);
    out.cls += CrossEntropy(logits, batch.target_labels[h - 1], grads ? &d_logits[h - 1] : nullptr);
  }

  std::vector<Mat> d_dis, d_mmd_src, d_mmd_tgt;
  out.dis = DiscrepancyLoss(src_phi1, grads ? &d_dis : nullptr);
  out.mmd = MmdLoss(src_phi2, tgt_phi2, opts.kernel, grads ? &d_mmd_src : nullptr,
                    grads ? &d_mmd_tgt : nullptr);
  out.total = out.mu * (out.mmd + out.dis) + out.cls;
  if (!grads) return out;

  const double mu = out.mu;
  for (int h = 1; h <= n_domains; ++h) {
    const int i = h - 1;
    Mat d_phi2_out;
    DenseBackward(params, ClassifierLayers(h), tgt_cc[i], d_logits[i], grads, &d_phi2_out);
    d_phi2_out += mu * d_mmd_tgt[i];
    Mat d_phi1_out, d_emb;
    DenseBackward(params, Phi2Layers(h), tgt_c2[i], d_phi2_out, grads, &d_phi1_out);
    DenseBackward(params, Phi1Layers(h), tgt_c1[i], d_phi1_out, grads, &d_emb);
    BackboneBackward(cfg, params, tgt_trace[i], d_emb, opts.first_trainable_group, grads);
  }

  Mat d_src_emb = Mat::Zero(src_emb.rows(), src_emb.cols());
  for (int h = 1; h <= n_domains; ++h) {
    const int i = h - 1;
    Mat d_phi1_out, d_emb;
    DenseBackward(params, Phi2Layers(h), src_c2[i], mu * d_mmd_src[i], grads, &d_phi1_out);
    d_phi1_out += mu * d_dis[i];
    DenseBackward(params, Phi1Layers(h), src_c1[i], d_phi1_out, grads, &d_emb);
    d_src_emb += d_emb;
  }
  BackboneBackward(cfg, params, src_trace, d_src_emb, opts.first_trainable_group, grads);
  return out;
}

double ClsLoss(const ModelConfig &cfg, const TensorMap &params, const DomainBatch &batch) {
  batch.Validate(cfg.num_speakers);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.targets.size(); ++i) {
    const int h = static_cast<int>(i) + 1;
    const Mat emb = BackboneForward(cfg, params, batch.targets[i], nullptr);
    const Mat logits = ClassifierForward(
        cfg, params, h, SubnetForward(cfg, params, h, emb, SubnetStage::kFull));
    total += CrossEntropy(logits, batch.target_labels[i], nullptr);
  }
  return total;
}

double SpeakerLoss(const ModelConfig &cfg, const TensorMap &params, std::span<const Mat> utts,
                   std::span<const int> labels, int first_trainable_group, TensorMap *grads) {
  CheckLabels(labels, cfg.num_speakers);
  BackboneTrace trace;
  const Mat emb = BackboneForward(cfg, params, utts, grads ? &trace : nullptr);
  DenseCache head_cache;
  const Mat logits = DenseForward(params, HeadLayers(), emb, &head_cache);
  Mat d_logits;
  const double loss = CrossEntropy(logits, labels, grads ? &d_logits : nullptr);
  if (grads) {
    Mat d_emb;
    DenseBackward(params, HeadLayers(), head_cache, d_logits, grads, &d_emb);
    BackboneBackward(cfg, params, trace, d_emb, first_trainable_group, grads);
  }
  return loss;
}

}  // namespace xdomain
