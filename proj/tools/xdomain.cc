// tools/xdomain.cc

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

// Command-line driver: corpus generation, the three training stages,
// evaluation and report tables.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "xdomain/corpus/corpus.h"
#include "xdomain/eval/eval.h"
#include "xdomain/model/checkpoint.h"
#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/pipeline/config.h"
#include "xdomain/pipeline/training.h"

namespace {

using namespace xdomain;

constexpr int kExitContract = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int log_every = 50;

  PipelineConfig Load() const {
    std::vector<std::string> all = overrides;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    return LoadPipelineConfig(config, all);
  }
};

void AddCommon(CLI::App *cmd, CommonArgs *args, bool config_required = true) {
  cmd->add_option("--config", args->config, "Pipeline config (JSON)")->required(config_required);
  cmd->add_option("--set", args->overrides, "Override a config key: dotted.key=value");
  cmd->add_option("--seed", args->seed, "Override the master seed everywhere");
}

void PrintStep(const StepLog &log, int every, int steps) {
  if (every <= 0 || (log.step % every != 0 && static_cast<int>(log.step) != steps)) return;
  std::fprintf(stderr, "%s step %llu/%d lr=%.6g", std::string(StageName(log.stage)).c_str(),
               static_cast<unsigned long long>(log.step), steps, log.lr);
  if (log.stage == Stage::kAdapt)
    std::fprintf(stderr, " block_lr=%.6g mu=%.4f dis=%.6f mmd=%.6f cls=%.6f", log.block_lr,
                 log.loss.mu, log.loss.dis, log.loss.mmd, log.loss.cls);
  std::fprintf(stderr, " total=%.6f\n", log.loss.total);
}

/// Runs one training stage with logging, resume and output handling.
template <typename Fn>
void TrainStage(const CommonArgs &common, const std::string &out, const std::string &resume,
                int steps, Fn &&run) {
  std::optional<Checkpoint> resume_ckpt;
  if (!resume.empty()) resume_ckpt = LoadCheckpoint(resume);
  StageRunOptions opts;
  opts.out = out;
  opts.resume = resume_ckpt ? &*resume_ckpt : nullptr;
  opts.on_step = [&](const StepLog &log) { PrintStep(log, common.log_every, steps); };
  run(opts);
  std::fprintf(stderr, "wrote %s\n", out.c_str());
}

std::vector<int> ParseDomains(const std::string &spec, const CorpusManifest &manifest) {
  std::vector<int> ids;
  if (spec.empty() || spec == "all") {
    for (int d = 0; d < manifest.NumDomains(); ++d) ids.push_back(d);
    return ids;
  }
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ',')) ids.push_back(manifest.DomainId(item));
  if (ids.empty()) throw ContractError("no domains selected");
  return ids;
}

int Run(int argc, char **argv) {
  CLI::App app{"Cross-domain speaker embedding adaptation toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string out, corpus_dir, init, resume, ckpt_path, domain_spec, baseline, report_out;
  std::vector<std::string> adapted;

  CLI::App *gen = app.add_subcommand("gen-corpus", "Generate the synthetic multi-domain corpus");
  AddCommon(gen, &common);
  gen->add_option("--out", out, "Output directory")->required();

  auto add_stage = [&](const char *name, const char *help, bool needs_init) {
    CLI::App *cmd = app.add_subcommand(name, help);
    AddCommon(cmd, &common);
    cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    cmd->add_option("--out", out, "Output checkpoint")->required();
    if (needs_init) cmd->add_option("--init", init, "Input checkpoint")->required();
    cmd->add_option("--resume", resume, "Partial checkpoint of this stage to continue");
    cmd->add_option("--log-every", common.log_every, "Progress line every N steps (0: quiet)");
    return cmd;
  };
  CLI::App *pretrain = add_stage("pretrain", "Train the backbone from scratch", false);
  CLI::App *finetune = add_stage("finetune", "Fine-tune on clean data, lower groups frozen", true);
  CLI::App *adapt = add_stage("adapt", "Cross-domain adaptation", true);

  CLI::App *evaluate = app.add_subcommand("evaluate", "Score trial lists and compute EER");
  AddCommon(evaluate, &common, false);
  evaluate->add_option("--ckpt", ckpt_path, "Checkpoint")->required();
  evaluate->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  evaluate->add_option("--domain", domain_spec, "Domain name or id, comma list, or 'all'")
      ->default_val("all");
  evaluate->add_option("--out", out, "Report file")->required();

  CLI::App *report = app.add_subcommand("report", "Compare evaluation reports");
  report->add_option("--baseline", baseline, "Baseline report")->required();
  report->add_option("--adapted", adapted, "Report(s) to compare against the baseline")->required();
  report->add_option("--out", report_out, "Key-value output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitContract;
  }

  if (gen->parsed()) {
    const PipelineConfig cfg = common.Load();
    const CorpusManifest m = GenerateCorpus(cfg.corpus, out);
    std::fprintf(stderr, "wrote %zu utterances in %d domains to %s\n", m.utterances.size(),
                 m.NumDomains(), out.c_str());
  } else if (pretrain->parsed()) {
    const PipelineConfig cfg = common.Load();
    const Corpus corpus = Corpus::Load(corpus_dir);
    TrainStage(common, out, resume, cfg.pretrain.steps,
               [&](const StageRunOptions &o) { RunPretrain(cfg, corpus, o); });
  } else if (finetune->parsed() || adapt->parsed()) {
    const PipelineConfig cfg = common.Load();
    const Corpus corpus = Corpus::Load(corpus_dir);
    const Checkpoint init_ckpt = LoadCheckpoint(init);
    if (finetune->parsed())
      TrainStage(common, out, resume, cfg.finetune.steps,
                 [&](const StageRunOptions &o) { RunFinetune(cfg, corpus, init_ckpt, o); });
    else
      TrainStage(common, out, resume, cfg.adapt.steps,
                 [&](const StageRunOptions &o) { RunAdapt(cfg, corpus, init_ckpt, o); });
  } else if (evaluate->parsed()) {
    const Corpus corpus = Corpus::Load(corpus_dir);
    const int feature_dim = CorpusFeatureDim(corpus);
    Checkpoint ckpt;
    ModelConfig mcfg;
    if (!common.config.empty()) {
      mcfg = ResolveModelConfig(common.Load(), corpus.Manifest(), feature_dim);
      ckpt = LoadCheckpoint(ckpt_path, mcfg.ComputeFingerprint());
    } else {
      ckpt = LoadCheckpoint(ckpt_path);
      mcfg = InferModelConfig(ckpt.tensors, feature_dim);
      if (!ckpt.tensors.contains(param_names::SubnetWeight(1, 0)))
        mcfg.subnet.num_domains = corpus.Manifest().NumDomains() - 1;
    }
    const std::vector<int> domains = ParseDomains(domain_spec, corpus.Manifest());
    const EvalReport r = Evaluate(mcfg, ckpt, corpus, domains, FileId(ckpt_path));
    r.Write(out);
    std::cout << r.ToText();
  } else if (report->parsed()) {
    std::vector<NamedReport> systems;
    auto name_of = [](const std::string &path) {
      return std::filesystem::path(path).stem().string();
    };
    systems.push_back({name_of(baseline), EvalReport::Read(baseline)});
    for (const std::string &a : adapted) systems.push_back({name_of(a), EvalReport::Read(a)});
    std::cout << FormatReportTable(systems);
    if (!report_out.empty()) WriteFileBytes(report_out, FormatReportKeyValues(systems));
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return Run(argc, argv);
  } catch (const NumericError &e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const xdomain::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  }
}
