// include/xdomain/pipeline/training.h

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

#ifndef XDOMAIN_PIPELINE_TRAINING_H_
#define XDOMAIN_PIPELINE_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "xdomain/corpus/corpus.h"
#include "xdomain/losses/objectives.h"
#include "xdomain/model/checkpoint.h"
#include "xdomain/pipeline/config.h"

namespace xdomain {

// ---- Batches ------------------------------------------------------------------

/// Rows offset..offset+crop-1 of `features`; an utterance shorter than `crop`
/// is returned whole with its last frame repeated up to `crop` rows.
Mat CropFrames(const Mat &features, int crop, int offset);

struct SampledUtterances {
  std::vector<Mat> features;
  std::vector<int> labels;
  std::vector<const Utterance *> sources;
};

/// Draws `n` utterances uniformly with replacement from `pool`, each cropped
/// to `crop` frames at a uniformly random offset.  Throws ContractError on an
/// empty pool.
SampledUtterances SampleUtterances(std::span<const Utterance *const> pool, int n, int crop,
                                   RandomStream *rng);

/// Clean train utterances as source plus `batch_target` train utterances of
/// every target domain 1..N, in domain order.
DomainBatch SampleDomainBatch(const Corpus &corpus, const StageConfig &cfg, RandomStream *rng);

// ---- Schedules per stage ------------------------------------------------------

/// Constant fine-tuning rate: a tenth of the pretraining peak.
double FinetuneLr(const ScheduleConfig &cfg);
/// Progress of step k (0-based) out of `steps`: 0 at the first step, 1 at
/// the last.
double StageProgress(std::uint64_t k, int steps);
/// Adaptation-block rate at progress p; the backbone runs at a tenth of it.
double AdaptBlockLr(double p, const ScheduleConfig &cfg);

// ---- Stages -------------------------------------------------------------------

struct StepLog {
  Stage stage = Stage::kPretrain;
  std::uint64_t step = 0;  // 1-based
  double lr = 0.0;         // base rate (backbone)
  double block_lr = 0.0;   // adaptation block rate; 0 outside adapt
  LossBreakdown loss;      // pretrain/finetune report cross-entropy as cls and total
};

struct StageRunOptions {
  /// Destination of the final checkpoint, and of the periodic ones when
  /// checkpoint_every > 0.  May be empty when nothing should be written.
  std::filesystem::path out;
  /// Continue from a partial checkpoint of the same stage.
  const Checkpoint *resume = nullptr;
  std::function<void(const StepLog &)> on_step;
};

/**
   Trains extractor, LDE and a speaker softmax head from scratch on the
   train split of every domain pooled, with a Noam schedule.  Throws
   ContractError with fewer than two speakers in the pool and NumericError
   on a non-finite loss.
*/
Checkpoint RunPretrain(const PipelineConfig &cfg, const Corpus &corpus,
                       const StageRunOptions &opts = {});

/// Continues a pretrain checkpoint on clean train data at FinetuneLr with
/// extractor groups 1-3 frozen.
Checkpoint RunFinetune(const PipelineConfig &cfg, const Corpus &corpus, const Checkpoint &init,
                       const StageRunOptions &opts = {});

/// Adds per-domain subnets and classifiers to a finetune checkpoint and
/// trains them jointly with group 4 and the LDE on the adaptation objective.
Checkpoint RunAdapt(const PipelineConfig &cfg, const Corpus &corpus, const Checkpoint &init,
                    const StageRunOptions &opts = {});

/// Feature dimension of a loaded corpus.
int CorpusFeatureDim(const Corpus &corpus);

}  // namespace xdomain

#endif  // XDOMAIN_PIPELINE_TRAINING_H_
