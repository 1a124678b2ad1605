// src/model/model.cc

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

#include "xdomain/model/model.h"

#include <algorithm>
#include <cmath>

#include "xdomain/model/layers.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/numkit/random.h"

namespace xdomain {

namespace {

using std::size_t;

void AddAffine(TensorMap *shapes, const std::string &w, const std::string &b, int out, int in) {
  (*shapes)[w] = Tensor({size_t(out), size_t(in)});
  (*shapes)[b] = Tensor({size_t(out)});
}

void InitUniformFanIn(RandomStream *rng, Tensor *w) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w->NumCols()));
  for (double &x : w->Data()) x = rng->Uniform(-limit, limit);
}

bool IsBlockTensor(const std::string &name) {
  return name.starts_with("subnet.") || name.starts_with("classifier.");
}

}  // namespace

TensorMap ExpectedShapes(const ModelConfig &cfg) {
  TensorMap shapes;
  int in = cfg.extractor.input_dim;
  for (int g = 0; g < 4; ++g) {
    const int out = cfg.extractor.group_dims[g];
    AddAffine(&shapes, param_names::GroupWeight(g + 1), param_names::GroupBias(g + 1), out,
              (2 * cfg.extractor.context[g] + 1) * in);
    in = out;
  }
  shapes[param_names::kLdeDictionary] = Tensor({size_t(cfg.lde.num_components), size_t(in)});
  shapes[param_names::kLdeLogScale] = Tensor({size_t(cfg.lde.num_components)});
  AddAffine(&shapes, param_names::kHeadWeight, param_names::kHeadBias, cfg.num_speakers,
            cfg.EmbeddingDim());
  for (int h = 1; h <= cfg.subnet.num_domains; ++h) {
    const int dims[5] = {cfg.EmbeddingDim(), cfg.subnet.phi1_dims[0], cfg.subnet.phi1_dims[1],
                         cfg.subnet.phi2_dims[0], cfg.subnet.phi2_dims[1]};
    for (int l = 0; l < 4; ++l)
      AddAffine(&shapes, param_names::SubnetWeight(h, l), param_names::SubnetBias(h, l),
                dims[l + 1], dims[l]);
    AddAffine(&shapes, param_names::ClassifierWeight(h), param_names::ClassifierBias(h),
              cfg.num_speakers, cfg.FinalDim());
  }
  return shapes;
}

Model::Model(ModelConfig config) : config_(std::move(config)) { config_.Validate(); }

Model::Model(ModelConfig config, TensorMap params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.Validate();
  const TensorMap expected = ExpectedShapes(config_);
  for (const auto &[name, shape] : expected) {
    auto it = params_.find(name);
    if (it == params_.end()) {
      if (IsBlockTensor(name)) continue;
      throw StructuralError("model: missing tensor '" + name + "'");
    }
    if (!it->second.SameShape(shape))
      throw StructuralError("model: tensor '" + name + "' has shape " +
                            it->second.ShapeString() + ", config expects " + shape.ShapeString());
  }
  for (const auto &[name, tensor] : params_)
    if (!expected.contains(name)) throw StructuralError("model: unexpected tensor '" + name + "'");
  const bool any_block = HasAdaptationBlock();
  for (const auto &[name, shape] : expected)
    if (IsBlockTensor(name) && params_.contains(name) != any_block)
      throw StructuralError("model: adaptation block is incomplete");
}

void Model::InitBackbone(std::uint64_t seed, std::span<const Mat> utterances) {
  const TensorMap shapes = ExpectedShapes(config_);
  RandomStream rng(seed, "init.backbone");
  for (const auto &[name, shape] : shapes) {
    if (IsBlockTensor(name)) continue;
    Tensor t = shape;
    if (name.ends_with(".weight")) InitUniformFanIn(&rng, &t);
    params_[name] = std::move(t);
  }

  // Dictionary: K random frames of the freshly initialised extractor.
  Tensor &dict = params_[param_names::kLdeDictionary];
  auto dictionary = dict.AsMatrix();
  const int k_n = config_.lde.num_components;
  RandomStream pick(seed, "init.lde");
  std::vector<Mat> outputs;
  for (const Mat &utt : utterances) outputs.push_back(ExtractorForward(config_, params_, utt, nullptr));
  for (int k = 0; k < k_n; ++k) {
    if (outputs.empty()) {
      for (Eigen::Index j = 0; j < dictionary.cols(); ++j) dictionary(k, j) = pick.Gaussian();
      continue;
    }
    const Mat &frames = outputs[pick.UniformInt(static_cast<int>(outputs.size()))];
    dictionary.row(k) = frames.row(pick.UniformInt(static_cast<int>(frames.rows())));
  }
  // Scales: start with soft assignments, exp(s) ~ 1 / mean squared distance.
  double total = 0.0;
  long count = 0;
  for (const Mat &frames : outputs)
    for (Eigen::Index t = 0; t < frames.rows(); ++t)
      for (int k = 0; k < k_n; ++k, ++count)
        total += (frames.row(t) - dictionary.row(k)).squaredNorm();
  const double mean_sq = count > 0 && total > 0.0 ? total / count : 1.0;
  for (double &s : params_[param_names::kLdeLogScale].Data()) s = -std::log(mean_sq);
}

void Model::InitAdaptationBlock(std::uint64_t seed) {
  const TensorMap shapes = ExpectedShapes(config_);
  for (int h = 1; h <= config_.subnet.num_domains; ++h) {
    // Same stream for every domain: identical starting subnets.
    RandomStream rng(seed, "init.adaptation-block");
    std::vector<std::string> names;
    for (int l = 0; l < 4; ++l) {
      names.push_back(param_names::SubnetWeight(h, l));
      names.push_back(param_names::SubnetBias(h, l));
    }
    names.push_back(param_names::ClassifierWeight(h));
    names.push_back(param_names::ClassifierBias(h));
    for (const std::string &name : names) {
      Tensor t = shapes.at(name);
      if (name.ends_with(".weight")) InitUniformFanIn(&rng, &t);
      params_[name] = std::move(t);
    }
  }
}

bool Model::HasAdaptationBlock() const {
  return params_.contains(param_names::SubnetWeight(1, 0));
}

std::vector<ParamGroup> TrainableGroups(const ModelConfig &cfg, const TensorMap &params,
                                        Stage stage) {
  std::vector<ParamGroup> groups;
  auto add = [&](std::string name, std::vector<std::string> tensors, double mult, bool frozen) {
    for (const std::string &t : tensors)
      if (!params.contains(t)) return;
    groups.push_back({std::move(name), std::move(tensors), mult, frozen});
  };
  const bool lower_frozen = stage != Stage::kPretrain;
  for (int g = 1; g <= 4; ++g)
    add("g" + std::to_string(g), {param_names::GroupWeight(g), param_names::GroupBias(g)}, 1.0,
        lower_frozen && g < 4);
  add("lde", {param_names::kLdeDictionary, param_names::kLdeLogScale}, 1.0, false);
  add("head", {param_names::kHeadWeight, param_names::kHeadBias}, 1.0, stage == Stage::kAdapt);
  const double block_mult = stage == Stage::kAdapt ? kAdaptationBlockLrMultiplier : 1.0;
  const bool block_frozen = stage == Stage::kFinetune;
  for (int h = 1; h <= cfg.subnet.num_domains; ++h) {
    std::vector<std::string> tensors;
    for (int l = 0; l < 4; ++l) {
      tensors.push_back(param_names::SubnetWeight(h, l));
      tensors.push_back(param_names::SubnetBias(h, l));
    }
    add("subnet." + std::to_string(h), tensors, block_mult, block_frozen);
    add("classifier." + std::to_string(h),
        {param_names::ClassifierWeight(h), param_names::ClassifierBias(h)}, block_mult,
        block_frozen);
  }
  return groups;
}

}  // namespace xdomain
