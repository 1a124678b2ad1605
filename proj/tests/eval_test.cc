// tests/eval_test.cc

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

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "test-util.h"
#include "xdomain/eval/eval.h"
#include "xdomain/model/layers.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/pipeline/config.h"
#include "xdomain/pipeline/training.h"

namespace xdomain {
namespace {

namespace fs = std::filesystem;
using testing::MicroConfig;
using testing::RandomMat;
using testing::RandomParams;
using testing::TempDir;
using testing::oracles::BruteForceEer;

EvalReport MakeReport(const std::vector<std::pair<std::string, double>> &eers) {
  EvalReport r;
  r.checkpoint_id = "abc";
  r.stage = Stage::kAdapt;
  for (const auto &[name, eer] : eers) r.domains.push_back({name, eer, 800, 40});
  return r;
}

// ---- EER ----------------------------------------------------------------------------

TEST_CASE("EER examples") {
  CHECK(ComputeEer(std::vector<double>{0.9, 0.8, 0.7}, std::vector<double>{0.6, 0.5, 0.4}).eer == 0.0);
  CHECK(ComputeEer(std::vector<double>{0.9, 0.7, 0.6}, std::vector<double>{0.8, 0.3, 0.2}).eer ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  // Fully reversed classes.
  CHECK(ComputeEer(std::vector<double>{0.1}, std::vector<double>{0.9}).eer == 1.0);
  // Identical scores: the only crossing is at FAR = FRR = 1/2 by interpolation.
  CHECK(ComputeEer(std::vector<double>{0.5}, std::vector<double>{0.5}).eer == 0.5);
}

TEST_CASE("EER errors") {
  const std::vector<double> none, one = {0.5}, bad = {std::nan("")};
  CHECK_THROWS_AS(ComputeEer(none, one), ContractError);
  CHECK_THROWS_AS(ComputeEer(one, none), ContractError);
  CHECK_THROWS_AS(ComputeEer(bad, one), ContractError);
  CHECK_THROWS_AS(ComputeEer(one, bad), ContractError);
}

TEST_CASE("EER equals the exhaustive threshold sweep") {
  for (int seed = 0; seed < 100; ++seed) {
    CAPTURE(seed);
    RandomStream rng(seed, "eer-oracle");
    const int n_t = 1 + rng.UniformInt(100), n_n = 1 + rng.UniformInt(400);
    const double shift = 2.0 * rng.Uniform();
    // Every other set is coarsely quantised so that ties occur.
    const bool quantise = seed % 2 == 1;
    auto draw = [&](double mean) {
      const double s = mean + rng.Gaussian();
      return quantise ? std::round(4.0 * s) / 4.0 : s;
    };
    std::vector<double> tgt, non;
    for (int i = 0; i < n_t; ++i) tgt.push_back(draw(shift));
    for (int i = 0; i < n_n; ++i) non.push_back(draw(0.0));
    const EerResult got = ComputeEer(tgt, non), want = BruteForceEer(tgt, non);
    CHECK(std::fabs(got.eer - want.eer) < 1e-12);
    CHECK(std::fabs(got.threshold - want.threshold) < 1e-12);
    CHECK(got.eer >= 0.0);
    CHECK(got.eer <= 1.0);
  }
}

TEST_CASE("EER is invariant under increasing transforms and trial order") {
  for (int seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed, "eer-invariance");
    std::vector<ScoreRecord> records;
    for (int i = 0; i < 200; ++i) {
      ScoreRecord r;
      r.trial.is_target = rng.Uniform() < 0.2;
      r.score = rng.Gaussian() + (r.trial.is_target ? 1.0 : 0.0);
      records.push_back(r);
    }
    const double eer = ComputeEer(records).eer;
    std::vector<ScoreRecord> mapped = records;
    for (ScoreRecord &r : mapped) r.score = std::exp(3.0 * r.score) + 7.0;
    CHECK(std::fabs(ComputeEer(mapped).eer - eer) < 1e-12);
    std::mt19937_64 gen(seed);
    std::shuffle(records.begin(), records.end(), gen);
    CHECK(ComputeEer(records).eer == eer);
  }
}

// ---- Relative decrease ---------------------------------------------------------------

TEST_CASE("relative decrease") {
  CHECK(std::fabs(RelativeDecrease(0.58, 0.22) - 62.07) < 0.01);
  CHECK(std::fabs(RelativeDecrease(1.49, 1.01) - 32.21) < 0.01);
  CHECK(std::fabs(RelativeDecrease(0.113, 0.108) - 4.42) < 0.01);
  CHECK(RelativeDecrease(0.3, 0.3) == 0.0);
  CHECK(RelativeDecrease(0.2, 0.3) < 0.0);
  CHECK_THROWS_AS(RelativeDecrease(0.0, 0.1), ContractError);
}

// ---- Scoring --------------------------------------------------------------------------

TEST_CASE("cosine scoring and enrolment") {
  RowVec a(2), b(2);
  a << 1, 0;
  b << 1, 1;
  CHECK(CosineScore(a, b) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(CosineScore(a, a) == doctest::Approx(1.0));
  CHECK(CosineScore(a, -a) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(CosineScore(a, RowVec::Zero(2)), ContractError);
  CHECK_THROWS_AS(CosineScore(a, RowVec::Zero(3)), StructuralError);

  const RowVec pair[2] = {a, b};
  const RowVec model = EnrollSpeaker(pair);
  RowVec want(2);
  want << 2, 1;
  CHECK((model - want / std::sqrt(5.0)).norm() < 1e-15);
  const RowVec opposite[2] = {a, -a};
  CHECK_THROWS_AS(EnrollSpeaker(opposite), ContractError);
  CHECK_THROWS_AS(EnrollSpeaker(std::span<const RowVec>()), ContractError);
}

TEST_CASE("embeddings per stage and domain") {
  for (int seed = 0; seed < 10; ++seed) {
    CAPTURE(seed);
    RandomStream rng(seed, "embed");
    const ModelConfig cfg = MicroConfig(&rng);
    const TensorMap params = RandomParams(cfg, &rng);
    const Mat x = RandomMat(&rng, 5, cfg.extractor.input_dim);
    const Mat utts[1] = {x};
    const RowVec lde = BackboneForward(cfg, params, utts, nullptr).row(0);

    for (Stage stage : {Stage::kPretrain, Stage::kFinetune})
      CHECK((EmbedUtteranceRaw(cfg, params, stage, 0, x) - lde).norm() == 0.0);

    RowVec mean = RowVec::Zero(cfg.FinalDim());
    for (int h = 1; h <= cfg.subnet.num_domains; ++h) {
      const RowVec own = SubnetForward(cfg, params, h, lde, SubnetStage::kFull).row(0);
      CHECK((EmbedUtteranceRaw(cfg, params, Stage::kAdapt, h, x) - own).norm() == 0.0);
      mean += own;
    }
    mean /= cfg.subnet.num_domains;
    const RowVec clean = EmbedUtteranceRaw(cfg, params, Stage::kAdapt, 0, x);
    CHECK((clean - mean).norm() < 1e-14);
    // Averaged first, normalised afterwards.
    const RowVec normed = EmbedUtterance(cfg, params, Stage::kAdapt, 0, x);
    CHECK((normed - mean / mean.norm()).norm() < 1e-14);
    CHECK(std::fabs(normed.norm() - 1.0) < 1e-14);

    CHECK_THROWS_AS(EmbedUtterance(cfg, params, Stage::kAdapt, cfg.subnet.num_domains + 1, x),
                    LookupError);
    CHECK_THROWS_AS(EmbedUtterance(cfg, params, Stage::kAdapt, -1, x), LookupError);
  }
}

TEST_CASE("domain scoring and evaluation") {
  PipelineConfig cfg = ParsePipelineConfig(
      R"({"seed": 5, "corpus": {"speakers": 3, "utts_per_speaker": 5, "frames": 12, "input_dim": 4,
          "identity_dim": 3},
          "model": {"group_dims": [4, 4, 4, 4], "lde_components": 2, "phi1_dims": [3, 3],
                    "phi2_dims": [3, 3]},
          "pretrain": {"steps": 3, "batch_source": 4, "crop_frames": 8}})");
  const fs::path dir = TempDir("eval-scoring");
  GenerateCorpus(cfg.corpus, dir / "corpus");
  const Corpus corpus = Corpus::Load(dir / "corpus");
  const Checkpoint ckpt = RunPretrain(cfg, corpus);
  const ModelConfig m = ResolveModelConfig(cfg, corpus.Manifest(), CorpusFeatureDim(corpus));

  const int noisy = corpus.Manifest().DomainId("noisy");
  const std::vector<ScoreRecord> records = ScoreDomain(m, ckpt, corpus, noisy);
  const std::vector<TrialPair> trials = MakeTrials(corpus.Manifest(), noisy);
  REQUIRE(records.size() == trials.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].trial.enroll_utt == trials[i].enroll_utt);
    CHECK(records[i].trial.test_utt == trials[i].test_utt);
    const RowVec e = EmbedUtterance(m, ckpt.tensors, Stage::kPretrain, noisy,
                                    corpus.Find(trials[i].enroll_utt).features);
    const RowVec t = EmbedUtterance(m, ckpt.tensors, Stage::kPretrain, noisy,
                                    corpus.Find(trials[i].test_utt).features);
    CHECK(std::fabs(records[i].score - e.dot(t)) < 1e-12);
  }

  const std::vector<int> domains = {0, noisy};
  const EvalReport report = Evaluate(m, ckpt, corpus, domains, "id");
  REQUIRE(report.domains.size() == 2);
  CHECK(report.domains[1].domain == "noisy");
  CHECK(report.domains[1].eer == ComputeEer(records).eer);
  CHECK(report.domains[1].trials == records.size());
  std::size_t targets = 0;
  for (const TrialPair &t : trials) targets += t.is_target;
  CHECK(report.domains[1].targets == targets);
  CHECK(report.stage == Stage::kPretrain);

  // Same inputs, identical report bytes.
  report.Write(dir / "a.txt");
  Evaluate(m, ckpt, corpus, domains, "id").Write(dir / "b.txt");
  CHECK(FileId(dir / "a.txt") == FileId(dir / "b.txt"));
}

// ---- Reports --------------------------------------------------------------------------

TEST_CASE("report text round trip") {
  const EvalReport r = MakeReport({{"clean", 0.0058}, {"lena-booth", 0.0149}, {"noisy", 1.0 / 3.0}});
  const EvalReport back = EvalReport::FromText(r.ToText());
  CHECK(back.checkpoint_id == "abc");
  CHECK(back.stage == Stage::kAdapt);
  REQUIRE(back.domains.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.domains[i].domain == r.domains[i].domain);
    CHECK(back.domains[i].eer == r.domains[i].eer);
    CHECK(back.domains[i].trials == 800);
    CHECK(back.domains[i].targets == 40);
  }
  CHECK(back.ToText() == r.ToText());
  CHECK(back.Find("noisy").eer == 1.0 / 3.0);
  CHECK_THROWS_AS(back.Find("far-field"), LookupError);
  CHECK(MeanTargetEer(back) == doctest::Approx((0.0149 + 1.0 / 3.0) / 2.0));

  CHECK_THROWS_AS(EvalReport::FromText(""), FormatError);
  CHECK_THROWS_AS(EvalReport::FromText("checkpoint=a stage=adapt\ndomain=x eer=2 trials=1 targets=1\n"),
                  FormatError);
  CHECK_THROWS_AS(EvalReport::FromText("checkpoint=a stage=adapt\ndomain=x eer=0.1 trials=z targets=1\n"),
                  FormatError);
  CHECK_THROWS_AS(EvalReport::FromText("checkpoint=a\n"), FormatError);
}

TEST_CASE("table reproduces relative decreases between systems") {
  const NamedReport systems[2] = {
      {"finetune", MakeReport({{"clean", 0.00113}, {"lena-booth", 0.0149}, {"far-field", 0.0058}})},
      {"adapt", MakeReport({{"clean", 0.00108}, {"lena-booth", 0.0101}, {"far-field", 0.0022}})}};
  const std::string table = FormatReportTable(systems);
  CHECK(table.find("4.42%") != std::string::npos);
  CHECK(table.find("32.21%") != std::string::npos);
  CHECK(table.find("62.07%") != std::string::npos);
  CHECK(table.find("RD% vs finetune") != std::string::npos);
  const std::string kv = FormatReportKeyValues(systems);
  CHECK(kv.find("baseline=finetune system=adapt domain=clean rd=4.42") != std::string::npos);
  CHECK(kv.find("system=adapt domain=mean-target eer=") != std::string::npos);

  const NamedReport same[2] = {systems[0], {"copy", systems[0].report}};
  const std::string same_kv = FormatReportKeyValues(same);
  std::size_t rd_lines = 0;
  for (std::size_t pos = same_kv.find(" rd="); pos != std::string::npos;
       pos = same_kv.find(" rd=", pos + 1)) {
    CHECK(same_kv.compare(pos, 6, " rd=0\n") == 0);
    ++rd_lines;
  }
  CHECK(rd_lines == 4);

  const NamedReport missing[2] = {systems[0],
                                  {"short", MakeReport({{"clean", 0.001}, {"lena-booth", 0.01}})}};
  CHECK_THROWS_AS(FormatReportTable(missing), ContractError);
  CHECK_THROWS_AS(FormatReportKeyValues(missing), ContractError);
  const NamedReport zero[2] = {{"base", MakeReport({{"clean", 0.0}, {"noisy", 0.1}})},
                               {"new", MakeReport({{"clean", 0.0}, {"noisy", 0.05}})}};
  CHECK(FormatReportKeyValues(zero).find("domain=clean rd=undefined") != std::string::npos);
}

}  // namespace
}  // namespace xdomain
