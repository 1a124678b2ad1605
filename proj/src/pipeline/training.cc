// src/pipeline/training.cc

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

#include "xdomain/pipeline/training.h"

#include <cmath>
#include <set>

#include "xdomain/model/model.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/numkit/schedule.h"

namespace xdomain {

namespace {

/// One step's gradient and schedule values at the current parameters.  Fills
/// grads and returns the log (lr, block_lr and loss; step is set by the loop).
using StepFn =
    std::function<StepLog(std::uint64_t k, const TensorMap &params, TensorMap *grads)>;

Checkpoint MakeCheckpoint(Stage stage, std::uint64_t step, const ModelConfig &mcfg,
                          const TensorMap &params, const OptimState &state) {
  Checkpoint ckpt;
  ckpt.meta = {stage, step, mcfg.ComputeFingerprint()};
  ckpt.tensors = params;
  StoreOptimState(state, &ckpt.tensors);
  return ckpt;
}

/// Splits a checkpoint into model parameters (validated against `mcfg`) and
/// optimizer state.
TensorMap ModelParams(const Checkpoint &ckpt, const ModelConfig &mcfg, OptimState *state) {
  TensorMap tensors = ckpt.tensors;
  OptimState s = ExtractOptimState(&tensors, ckpt.meta.step);
  Model model(mcfg, std::move(tensors));
  if (state) *state = std::move(s);
  return std::move(model.Params());
}

void RequireStage(const Checkpoint &ckpt, Stage expected, const char *what) {
  if (ckpt.meta.stage != expected)
    throw ContractError(std::string(what) + ": expected a " + std::string(StageName(expected)) +
                        " checkpoint, got " + std::string(StageName(ckpt.meta.stage)));
}

void RequireFingerprint(const Checkpoint &ckpt, const ModelConfig &mcfg, const char *what) {
  if (ckpt.meta.fingerprint != mcfg.ComputeFingerprint())
    throw FormatError(FormatError::Kind::kFingerprintMismatch,
                      std::string(what) + ": checkpoint was written for a different model config");
}

Checkpoint RunLoop(Stage stage, const StageConfig &sc, const AdamOptions &adam,
                   const ModelConfig &mcfg, TensorMap params, OptimState state,
                   const StageRunOptions &opts, const StepFn &step_fn) {
  const char *name = StageName(stage).data();
  if (state.step > static_cast<std::uint64_t>(sc.steps))
    throw ContractError(std::string(name) + ": resume checkpoint is past the configured steps");
  const std::vector<ParamGroup> groups = TrainableGroups(mcfg, params, stage);
  for (std::uint64_t k = state.step; k < static_cast<std::uint64_t>(sc.steps); ++k) {
    TensorMap grads;
    StepLog log = step_fn(k, params, &grads);
    log.stage = stage;
    log.step = k + 1;
    if (!std::isfinite(log.loss.total))
      throw NumericError(std::string(name) + ": non-finite loss at step " +
                         std::to_string(log.step) + " (cls=" + std::to_string(log.loss.cls) +
                         " mmd=" + std::to_string(log.loss.mmd) +
                         " dis=" + std::to_string(log.loss.dis) + ")");
    AdamStep(groups, grads, log.lr, adam, &params, &state);
    RoundToFloat(&params);
    RoundToFloat(&state);
    if (opts.on_step) opts.on_step(log);
    if (!opts.out.empty() && sc.checkpoint_every > 0 && log.step % sc.checkpoint_every == 0 &&
        log.step < static_cast<std::uint64_t>(sc.steps))
      SaveCheckpoint(opts.out, MakeCheckpoint(stage, log.step, mcfg, params, state));
  }
  Checkpoint ckpt = MakeCheckpoint(stage, state.step, mcfg, params, state);
  if (!opts.out.empty()) SaveCheckpoint(opts.out, ckpt);
  return ckpt;
}

/// Parameters and optimizer state to start from: the resume checkpoint when
/// given, otherwise `fresh` with an empty optimizer.
TensorMap StartingPoint(Stage stage, const ModelConfig &mcfg, const StageRunOptions &opts,
                        const std::function<TensorMap()> &fresh, OptimState *state) {
  if (!opts.resume) {
    *state = OptimState{};
    TensorMap params = fresh();
    RoundToFloat(&params);
    return params;
  }
  RequireStage(*opts.resume, stage, "resume");
  RequireFingerprint(*opts.resume, mcfg, "resume");
  return ModelParams(*opts.resume, mcfg, state);
}

std::vector<const Utterance *> TrainPool(const Corpus &corpus, int domain) {
  return corpus.Select(domain, Split::kTrain);
}

}  // namespace

Mat CropFrames(const Mat &features, int crop, int offset) {
  if (crop < 1) throw ContractError("CropFrames: crop must be positive");
  const Eigen::Index frames = features.rows();
  if (frames == 0) throw ContractError("CropFrames: empty utterance");
  if (frames < crop) {
    Mat out(crop, features.cols());
    out.topRows(frames) = features;
    for (Eigen::Index t = frames; t < crop; ++t) out.row(t) = features.row(frames - 1);
    return out;
  }
  if (offset < 0 || offset + crop > frames) throw ContractError("CropFrames: offset out of range");
  return features.middleRows(offset, crop);
}

SampledUtterances SampleUtterances(std::span<const Utterance *const> pool, int n, int crop,
                                   RandomStream *rng) {
  if (pool.empty()) throw ContractError("SampleUtterances: empty utterance pool");
  if (n < 1) throw ContractError("SampleUtterances: batch size must be positive");
  SampledUtterances out;
  for (int i = 0; i < n; ++i) {
    const Utterance *u = pool[rng->UniformInt(static_cast<int>(pool.size()))];
    const int frames = static_cast<int>(u->features.rows());
    const int offset = frames > crop ? rng->UniformInt(frames - crop + 1) : 0;
    out.features.push_back(CropFrames(u->features, crop, offset));
    out.labels.push_back(u->record.speaker);
    out.sources.push_back(u);
  }
  return out;
}

DomainBatch SampleDomainBatch(const Corpus &corpus, const StageConfig &cfg, RandomStream *rng) {
  const int n_domains = corpus.Manifest().NumDomains();
  if (n_domains < 2) throw ContractError("SampleDomainBatch: corpus has no target domain");
  DomainBatch batch;
  SampledUtterances src = SampleUtterances(TrainPool(corpus, 0), cfg.batch_source,
                                           cfg.crop_frames, rng);
  batch.source = std::move(src.features);
  batch.source_labels = std::move(src.labels);
  for (int d = 1; d < n_domains; ++d) {
    const auto pool = TrainPool(corpus, d);
    if (pool.empty())
      throw ContractError("SampleDomainBatch: domain " + corpus.Manifest().domain_names[d] +
                          " has no training data");
    SampledUtterances tgt = SampleUtterances(pool, cfg.batch_target, cfg.crop_frames, rng);
    batch.targets.push_back(std::move(tgt.features));
    batch.target_labels.push_back(std::move(tgt.labels));
  }
  return batch;
}

double FinetuneLr(const ScheduleConfig &cfg) { return 0.1 * NoamPeakLr(cfg); }

double StageProgress(std::uint64_t k, int steps) {
  if (steps < 1) throw ContractError("StageProgress: steps must be positive");
  if (k >= static_cast<std::uint64_t>(steps)) throw ContractError("StageProgress: step out of range");
  return steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
}

double AdaptBlockLr(double p, const ScheduleConfig &cfg) { return InvDecayLr(p, cfg); }

int CorpusFeatureDim(const Corpus &corpus) {
  if (corpus.Utterances().empty()) throw ContractError("corpus is empty");
  return static_cast<int>(corpus.Utterances().front().features.cols());
}

Checkpoint RunPretrain(const PipelineConfig &cfg, const Corpus &corpus,
                       const StageRunOptions &opts) {
  std::vector<const Utterance *> pool;
  std::set<int> speakers;
  for (int d = 0; d < corpus.Manifest().NumDomains(); ++d)
    for (const Utterance *u : TrainPool(corpus, d)) {
      pool.push_back(u);
      speakers.insert(u->record.speaker);
    }
  if (speakers.size() < 2)
    throw ContractError("pretrain: need at least two speakers in the train split");

  const ModelConfig mcfg = ResolveModelConfig(cfg, corpus.Manifest(), CorpusFeatureDim(corpus));
  const StageConfig &sc = cfg.pretrain;
  OptimState state;
  TensorMap params = StartingPoint(Stage::kPretrain, mcfg, opts, [&] {
    Model model(mcfg);
    std::vector<Mat> init_utts;
    for (const Utterance *u : pool) init_utts.push_back(u->features);
    model.InitBackbone(cfg.seed, init_utts);
    return model.Params();
  }, &state);

  auto step = [&](std::uint64_t k, const TensorMap &params, TensorMap *grads) {
    RandomStream rng(cfg.seed, "pretrain.batch", k);
    const SampledUtterances batch = SampleUtterances(pool, sc.batch_source, sc.crop_frames, &rng);
    StepLog log;
    log.lr = NoamLr(static_cast<long>(k) + 1, cfg.schedule);
    log.loss.cls = SpeakerLoss(mcfg, params, batch.features, batch.labels, 1, grads);
    log.loss.total = log.loss.cls;
    return log;
  };
  return RunLoop(Stage::kPretrain, sc, cfg.adam, mcfg, std::move(params), std::move(state), opts,
                 step);
}

Checkpoint RunFinetune(const PipelineConfig &cfg, const Corpus &corpus, const Checkpoint &init,
                       const StageRunOptions &opts) {
  RequireStage(init, Stage::kPretrain, "finetune");
  const ModelConfig mcfg = ResolveModelConfig(cfg, corpus.Manifest(), CorpusFeatureDim(corpus));
  RequireFingerprint(init, mcfg, "finetune");
  const auto pool = TrainPool(corpus, 0);
  const StageConfig &sc = cfg.finetune;
  OptimState state;
  TensorMap params = StartingPoint(Stage::kFinetune, mcfg, opts,
                                   [&] { return ModelParams(init, mcfg, nullptr); }, &state);
  const double lr = FinetuneLr(cfg.schedule);
  return RunLoop(Stage::kFinetune, sc, cfg.adam, mcfg, std::move(params), std::move(state), opts,
                 [&](std::uint64_t k, const TensorMap &params, TensorMap *grads) {
                   RandomStream rng(cfg.seed, "finetune.batch", k);
                   const SampledUtterances batch =
                       SampleUtterances(pool, sc.batch_source, sc.crop_frames, &rng);
                   StepLog log;
                   log.lr = lr;
                   log.loss.cls = SpeakerLoss(mcfg, params, batch.features, batch.labels, 4, grads);
                   log.loss.total = log.loss.cls;
                   return log;
                 });
}

Checkpoint RunAdapt(const PipelineConfig &cfg, const Corpus &corpus, const Checkpoint &init,
                    const StageRunOptions &opts) {
  RequireStage(init, Stage::kFinetune, "adapt");
  const ModelConfig mcfg = ResolveModelConfig(cfg, corpus.Manifest(), CorpusFeatureDim(corpus));
  RequireFingerprint(init, mcfg, "adapt");
  if (mcfg.subnet.num_domains < 2) throw ContractError("adapt: need at least two target domains");
  const StageConfig &sc = cfg.adapt;
  OptimState state;
  TensorMap params = StartingPoint(Stage::kAdapt, mcfg, opts, [&] {
    Model model(mcfg, ModelParams(init, mcfg, nullptr));
    model.InitAdaptationBlock(cfg.seed);
    return model.Params();
  }, &state);

  AdaptationLossOptions loss_opts;
  loss_opts.theta = cfg.schedule.theta;
  loss_opts.kernel = sc.kernel;
  loss_opts.first_trainable_group = 4;
  return RunLoop(Stage::kAdapt, sc, cfg.adam, mcfg, std::move(params), std::move(state), opts,
                 [&](std::uint64_t k, const TensorMap &params, TensorMap *grads) {
                   RandomStream rng(cfg.seed, "adapt.batch", k);
                   const DomainBatch batch = SampleDomainBatch(corpus, sc, &rng);
                   const double p = StageProgress(k, sc.steps);
                   StepLog log;
                   log.block_lr = AdaptBlockLr(p, cfg.schedule);
                   log.lr = log.block_lr / kAdaptationBlockLrMultiplier;
                   log.loss = AdaptationLoss(mcfg, params, batch, p, loss_opts, grads);
                   return log;
                 });
}

}  // namespace xdomain
