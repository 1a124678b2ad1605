// include/xdomain/pipeline/config.h

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

#ifndef XDOMAIN_PIPELINE_CONFIG_H_
#define XDOMAIN_PIPELINE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xdomain/corpus/corpus.h"
#include "xdomain/losses/losses.h"
#include "xdomain/model/config.h"
#include "xdomain/numkit/optimizer.h"
#include "xdomain/numkit/schedule.h"

namespace xdomain {

/// Settings of one training stage.  Pretrain and finetune draw `batch_source`
/// utterances per step; adapt draws `batch_source` clean utterances plus
/// `batch_target` utterances of every target domain.
struct StageConfig {
  int steps = 100;
  int batch_source = 8;
  int batch_target = 8;
  int crop_frames = 100;
  MmdKernel kernel;
  /// Write a resumable checkpoint every this many steps (0: only at the end).
  int checkpoint_every = 0;

  void Validate(const char *stage) const;
};

/**
   Everything a run needs, read from one JSON file with the sections
   "seed", "corpus", "model", "schedule", "adam", "pretrain", "finetune" and
   "adapt".  Unknown keys are rejected.  The single top-level seed drives the
   corpus generator and every stage.
*/
struct PipelineConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  /// input_dim, num_domains and num_speakers are filled in from the corpus.
  ModelConfig model;
  ScheduleConfig schedule;
  AdamOptions adam;
  StageConfig pretrain;
  StageConfig finetune;
  StageConfig adapt;

  void Validate() const;
};

/// Parses JSON text.  Each override is "dotted.key=value" where value is JSON
/// (bare words are taken as strings), applied before validation.  Throws
/// ContractError on malformed input or unknown keys.
PipelineConfig ParsePipelineConfig(const std::string &json_text,
                                   const std::vector<std::string> &overrides = {});
PipelineConfig LoadPipelineConfig(const std::filesystem::path &path,
                                  const std::vector<std::string> &overrides = {});

/// Model config for a corpus: feature dim, target-domain count and speaker
/// count come from the data.
ModelConfig ResolveModelConfig(const PipelineConfig &cfg, const CorpusManifest &manifest,
                               int feature_dim);

/// Recovers the model config from checkpoint tensor shapes, given the input
/// feature dimension.  Throws StructuralError if the tensors are inconsistent.
ModelConfig InferModelConfig(const TensorMap &tensors, int input_dim);

}  // namespace xdomain

#endif  // XDOMAIN_PIPELINE_CONFIG_H_
