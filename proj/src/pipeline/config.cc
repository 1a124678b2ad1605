// src/pipeline/config.cc

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

#include "xdomain/pipeline/config.h"

#include <set>

#include "json.hpp"
#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

using Json = nlohmann::json;

/// Reads the keys of one JSON object, rejecting any key nobody asked for.
class Section {
 public:
  Section(const Json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ContractError("config: '" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto &item : j_.items())
      if (!seen_.contains(item.key()))
        throw ContractError("config: unknown key '" + Key(item.key()) + "'");
  }

  template <typename T>
  void Get(const char *key, T *out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      *out = it->template get<T>();
    } catch (const Json::exception &) {
      throw ContractError("config: '" + Key(key) + "' has the wrong type");
    }
  }

  template <typename T, std::size_t N>
  void GetArray(const char *key, std::array<T, N> *out) {
    std::vector<T> v(out->begin(), out->end());
    Get(key, &v);
    if (v.size() != N)
      throw ContractError("config: '" + Key(key) + "' needs " + std::to_string(N) + " entries");
    std::copy(v.begin(), v.end(), out->begin());
  }

  const Json *Child(const char *key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string Key(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

MmdKernel ParseKernel(Section *s) {
  MmdKernel k;
  std::string kind = "linear";
  s->Get("kernel", &kind);
  if (kind == "linear") {
    k.kind = MmdKernel::Kind::kLinear;
  } else if (kind == "rbf") {
    k.kind = MmdKernel::Kind::kRbf;
  } else {
    throw ContractError("config: kernel must be 'linear' or 'rbf'");
  }
  s->Get("bandwidth", &k.bandwidth);
  s->Get("median_heuristic", &k.median_heuristic);
  return k;
}

StageConfig ParseStage(const Json *j, const std::string &name, StageConfig stage) {
  if (!j) return stage;
  Section s(*j, name);
  s.Get("steps", &stage.steps);
  s.Get("batch_source", &stage.batch_source);
  s.Get("batch_target", &stage.batch_target);
  s.Get("crop_frames", &stage.crop_frames);
  s.Get("checkpoint_every", &stage.checkpoint_every);
  stage.kernel = ParseKernel(&s);
  return stage;
}

DomainSpec ParseDomain(const Json &j, const std::string &path) {
  Section s(j, path);
  DomainSpec d;
  std::string kind = "clean";
  s.Get("name", &d.name);
  s.Get("kind", &kind);
  d.kind = ParseDomainKind(kind);
  s.Get("channel_gain", &d.channel_gain);
  s.Get("gain_spread", &d.gain_spread);
  s.Get("attenuation", &d.attenuation);
  s.Get("smear_width", &d.smear_width);
  s.Get("snr_db", &d.snr_db);
  s.Get("offset", &d.offset);
  s.Get("offset_std", &d.offset_std);
  return d;
}

void ParseCorpus(const Json *j, CorpusConfig *c) {
  if (!j) return;
  Section s(*j, "corpus");
  s.Get("speakers", &c->num_speakers);
  s.Get("utts_per_speaker", &c->utts_per_speaker);
  s.Get("frames", &c->frames_per_utt);
  s.Get("input_dim", &c->input_dim);
  s.Get("identity_dim", &c->identity_dim);
  s.Get("identity_scale", &c->identity_scale);
  s.Get("session_std", &c->session_std);
  s.Get("phonetic_std", &c->phonetic_std);
  s.Get("ar_rho", &c->ar_rho);
  if (const Json *domains = s.Child("domains")) {
    if (!domains->is_array()) throw ContractError("config: 'corpus.domains' must be an array");
    c->domains.clear();
    for (std::size_t i = 0; i < domains->size(); ++i)
      c->domains.push_back(ParseDomain((*domains)[i], "corpus.domains[" + std::to_string(i) + "]"));
  }
}

void ParseModel(const Json *j, ModelConfig *m) {
  if (!j) return;
  Section s(*j, "model");
  s.GetArray("group_dims", &m->extractor.group_dims);
  s.GetArray("context", &m->extractor.context);
  s.Get("lde_components", &m->lde.num_components);
  s.GetArray("phi1_dims", &m->subnet.phi1_dims);
  s.GetArray("phi2_dims", &m->subnet.phi2_dims);
}

void ParseSchedule(const Json *j, ScheduleConfig *c) {
  if (!j) return;
  Section s(*j, "schedule");
  s.Get("eta0", &c->eta0);
  s.Get("alpha", &c->alpha);
  s.Get("beta", &c->beta);
  s.Get("theta", &c->theta);
  s.Get("noam_dim", &c->noam_dim);
  s.Get("noam_warmup", &c->noam_warmup);
  s.Get("noam_factor", &c->noam_factor);
}

void ParseAdam(const Json *j, AdamOptions *a) {
  if (!j) return;
  Section s(*j, "adam");
  s.Get("beta1", &a->beta1);
  s.Get("beta2", &a->beta2);
  s.Get("epsilon", &a->epsilon);
  s.Get("weight_decay", &a->weight_decay);
  s.Get("amsgrad", &a->amsgrad);
}

void ApplyOverride(Json *root, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ContractError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = text;
  std::string pointer;
  for (char ch : key) pointer += ch == '.' ? '/' : ch;
  try {
    (*root)[Json::json_pointer("/" + pointer)] = value;
  } catch (const Json::exception &e) {
    throw ContractError("override '" + assignment + "': " + e.what());
  }
}

}  // namespace

void StageConfig::Validate(const char *stage) const {
  const std::string s(stage);
  if (steps < 1) throw ContractError(s + ": steps must be positive");
  if (batch_source < 2 || batch_target < 2)
    throw ContractError(s + ": batch sizes must be at least 2");
  if (crop_frames < 1) throw ContractError(s + ": crop_frames must be positive");
  if (checkpoint_every < 0) throw ContractError(s + ": checkpoint_every must be nonnegative");
  if (kernel.kind == MmdKernel::Kind::kRbf && !kernel.median_heuristic && !(kernel.bandwidth > 0.0))
    throw ContractError(s + ": rbf bandwidth must be positive");
}

void PipelineConfig::Validate() const {
  corpus.Validate();
  schedule.Validate();
  pretrain.Validate("pretrain");
  finetune.Validate("finetune");
  adapt.Validate("adapt");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ContractError("adam: betas must be in [0, 1)");
  if (!(adam.epsilon > 0.0) || !(adam.weight_decay >= 0.0))
    throw ContractError("adam: epsilon must be positive and weight_decay nonnegative");
}

PipelineConfig ParsePipelineConfig(const std::string &json_text,
                                   const std::vector<std::string> &overrides) {
  Json root = Json::parse(json_text, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (root.is_discarded()) throw ContractError("config: not valid JSON");
  if (!root.is_object()) throw ContractError("config: top level must be an object");
  for (const std::string &o : overrides) ApplyOverride(&root, o);

  PipelineConfig cfg;
  {
    Section s(root, "");
    s.Get("seed", &cfg.seed);
    ParseCorpus(s.Child("corpus"), &cfg.corpus);
    ParseModel(s.Child("model"), &cfg.model);
    ParseSchedule(s.Child("schedule"), &cfg.schedule);
    ParseAdam(s.Child("adam"), &cfg.adam);
    cfg.pretrain = ParseStage(s.Child("pretrain"), "pretrain", cfg.pretrain);
    cfg.finetune = ParseStage(s.Child("finetune"), "finetune", cfg.finetune);
    cfg.adapt = ParseStage(s.Child("adapt"), "adapt", cfg.adapt);
  }
  cfg.corpus.seed = cfg.seed;
  cfg.Validate();
  return cfg;
}

PipelineConfig LoadPipelineConfig(const std::filesystem::path &path,
                                  const std::vector<std::string> &overrides) {
  return ParsePipelineConfig(ReadFileBytes(path), overrides);
}

ModelConfig ResolveModelConfig(const PipelineConfig &cfg, const CorpusManifest &manifest,
                               int feature_dim) {
  ModelConfig m = cfg.model;
  m.extractor.input_dim = feature_dim;
  m.subnet.num_domains = manifest.NumDomains() - 1;
  m.num_speakers = manifest.num_speakers;
  m.Validate();
  return m;
}

ModelConfig InferModelConfig(const TensorMap &tensors, int input_dim) {
  ModelConfig m;
  int in = input_dim;
  for (int g = 0; g < 4; ++g) {
    const Tensor &w = GetTensor(tensors, param_names::GroupWeight(g + 1));
    if (w.Rank() != 2 || in <= 0 || w.NumCols() % in != 0 || (w.NumCols() / in) % 2 != 1)
      throw StructuralError("checkpoint: extractor group " + std::to_string(g + 1) +
                            " does not fit input dimension " + std::to_string(in));
    m.extractor.group_dims[g] = static_cast<int>(w.NumRows());
    m.extractor.context[g] = static_cast<int>((w.NumCols() / in - 1) / 2);
    in = m.extractor.group_dims[g];
  }
  m.extractor.input_dim = input_dim;
  m.lde.num_components = static_cast<int>(GetTensor(tensors, param_names::kLdeDictionary).NumRows());
  m.num_speakers = static_cast<int>(GetTensor(tensors, param_names::kHeadWeight).NumRows());
  int domains = 0;
  while (tensors.contains(param_names::SubnetWeight(domains + 1, 0))) ++domains;
  if (domains > 0) {
    for (int l = 0; l < 2; ++l) {
      m.subnet.phi1_dims[l] = static_cast<int>(GetTensor(tensors, param_names::SubnetWeight(1, l)).NumRows());
      m.subnet.phi2_dims[l] =
          static_cast<int>(GetTensor(tensors, param_names::SubnetWeight(1, l + 2)).NumRows());
    }
    m.subnet.num_domains = domains;
  }
  m.Validate();
  return m;
}

}  // namespace xdomain
