// tests/model_test.cc

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
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.h"
#include "test-util.h"
#include "xdomain/losses/losses.h"
#include "xdomain/model/checkpoint.h"
#include "xdomain/model/layers.h"
#include "xdomain/model/model.h"
#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"
#include "xdomain/numkit/grad-check.h"

namespace xdomain {
namespace {

using testing::MicroConfig;
using testing::RandomMat;
using testing::RandomParams;
using namespace testing::oracles;

constexpr double kGradTol = 1e-4;
constexpr int kSeeds = 24;

// ---- Gradients ------------------------------------------------------------------

TEST_CASE("extractor gradients for every group and the input") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomStream rng(seed, "extractor-grad");
    const ModelConfig cfg = MicroConfig(&rng);
    const TensorMap params = RandomParams(cfg, &rng, false);
    const Mat x = RandomMat(&rng, 3 + rng.UniformInt(4), cfg.extractor.input_dim);
    const Probe probe = MakeProbe(&rng, x.rows(), cfg.FrameDim());
    const int first_group = 1 + seed % 4;

    TensorMap point = Subset(params, {"extractor."});
    if (first_group == 1) point["input"] = Tensor::FromMatrix(x);
    const Objective f = [&](const TensorMap &p, TensorMap *grad) {
      const TensorMap full = Merge(params, p);
      const Mat in = first_group == 1 ? Mat(p.at("input").AsMatrix()) : x;
      ExtractorCache cache;
      const Mat y = ExtractorForward(cfg, full, in, grad ? &cache : nullptr);
      if (grad) {
        Mat dx;
        ExtractorBackward(cfg, full, cache, probe.weights, first_group, grad,
                          first_group == 1 ? &dx : nullptr);
        if (first_group == 1) (*grad)["input"] = Tensor::FromMatrix(dx);
      }
      return probe.Value(y);
    };
    // Frozen groups receive no gradient; check only the trainable ones.
    TensorMap trainable;
    for (const auto &[name, t] : point) {
      const bool frozen = name.starts_with("extractor.g") && name[11] - '0' < first_group;
      if (!frozen) trainable[name] = t;
    }
    const Objective restricted = [&](const TensorMap &p, TensorMap *grad) {
      return f(Merge(point, p), grad);
    };
    const GradCheckResult r = GradCheck(restricted, trainable);
    CAPTURE(seed);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_rel_error < kGradTol);
  }
}

TEST_CASE("extractor backward leaves frozen groups without gradient") {
  RandomStream rng(1, "extractor-frozen");
  const ModelConfig cfg = MicroConfig(&rng);
  const TensorMap params = RandomParams(cfg, &rng, false);
  const Mat x = RandomMat(&rng, 5, cfg.extractor.input_dim);
  ExtractorCache cache;
  const Mat y = ExtractorForward(cfg, params, x, &cache);
  TensorMap grads;
  ExtractorBackward(cfg, params, cache, Mat::Ones(y.rows(), y.cols()), 4, &grads, nullptr);
  for (int g = 1; g <= 3; ++g) CHECK_FALSE(grads.contains(param_names::GroupWeight(g)));
  CHECK(grads.contains(param_names::GroupWeight(4)));
  Mat dx;
  CHECK_THROWS_AS(ExtractorBackward(cfg, params, cache, y, 2, &grads, &dx), ContractError);
}

TEST_CASE("lde gradients for dictionary, scales and frames") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomStream rng(seed, "lde-grad");
    const int k = 1 + rng.UniformInt(3), d = 2 + rng.UniformInt(3);
    TensorMap point{{param_names::kLdeDictionary, Tensor::FromMatrix(RandomMat(&rng, k, d))},
                    {param_names::kLdeLogScale, Tensor({static_cast<std::size_t>(k)})},
                    {"frames", Tensor::FromMatrix(RandomMat(&rng, 2 + rng.UniformInt(4), d))}};
    for (double &s : point[param_names::kLdeLogScale].Data()) s = -1.0 + 0.5 * rng.Gaussian();
    const Probe probe = MakeProbe(&rng, 1, k * d);
    const Objective f = [&](const TensorMap &p, TensorMap *grad) {
      LdeCache cache;
      const RowVec e = LdeForward(p, p.at("frames").AsMatrix(), grad ? &cache : nullptr);
      if (grad) {
        Mat df;
        LdeBackward(p, cache, probe.weights, grad, &df);
        (*grad)["frames"] = Tensor::FromMatrix(df);
      }
      return probe.Value(e);
    };
    const GradCheckResult r = GradCheck(f, point);
    CAPTURE(seed);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_rel_error < kGradTol);
  }
}

TEST_CASE("backbone gradients through extractor and lde") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomStream rng(seed, "backbone-grad");
    const ModelConfig cfg = MicroConfig(&rng);
    const TensorMap params = RandomParams(cfg, &rng, false);
    const auto utts = testing::RandomUtterances(&rng, 3, cfg.extractor.input_dim);
    const Probe probe = MakeProbe(&rng, 3, cfg.EmbeddingDim());
    const int first_group = seed % 2 == 0 ? 1 : 4;
    TensorMap point;
    for (const auto &[name, t] : params) {
      if (name.starts_with("head.")) continue;
      if (name.starts_with("extractor.g") && name[11] - '0' < first_group) continue;
      point[name] = t;
    }
    const Objective f = [&](const TensorMap &p, TensorMap *grad) {
      const TensorMap full = Merge(params, p);
      BackboneTrace trace;
      const Mat e = BackboneForward(cfg, full, utts, grad ? &trace : nullptr);
      if (grad) BackboneBackward(cfg, full, trace, probe.weights, first_group, grad);
      return probe.Value(e);
    };
    const GradCheckResult r = GradCheck(f, point);
    CAPTURE(seed);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_rel_error < kGradTol);
  }
}

TEST_CASE("subnet and classifier gradients") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomStream rng(seed, "subnet-grad");
    const ModelConfig cfg = MicroConfig(&rng);
    const TensorMap params = RandomParams(cfg, &rng, true);
    const int domain = 1 + rng.UniformInt(cfg.subnet.num_domains);
    const Mat emb = RandomMat(&rng, 4, cfg.EmbeddingDim());
    std::vector<DenseLayer> layers = Phi1Layers(domain);
    for (const DenseLayer &l : Phi2Layers(domain)) layers.push_back(l);
    for (const DenseLayer &l : ClassifierLayers(domain)) layers.push_back(l);
    const Probe probe = MakeProbe(&rng, 4, cfg.num_speakers);
    TensorMap point = Subset(params, {"subnet.", "classifier."});
    point["input"] = Tensor::FromMatrix(emb);
    const Objective f = [&](const TensorMap &p, TensorMap *grad) {
      DenseCache cache;
      const Mat y = DenseForward(p, layers, p.at("input").AsMatrix(), grad ? &cache : nullptr);
      if (grad) {
        Mat dx;
        DenseBackward(p, layers, cache, probe.weights, grad, &dx);
        (*grad)["input"] = Tensor::FromMatrix(dx);
      }
      return probe.Value(y);
    };
    const GradCheckResult r = GradCheck(f, point);
    CAPTURE(seed);
    CAPTURE(r.worst_tensor);
    CHECK(r.max_rel_error < kGradTol);
  }
}

TEST_CASE("head classifier gradient through softmax cross-entropy") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    RandomStream rng(seed, "head-grad");
    const ModelConfig cfg = MicroConfig(&rng);
    const TensorMap params = RandomParams(cfg, &rng, false);
    const Mat emb = RandomMat(&rng, 5, cfg.EmbeddingDim());
    std::vector<int> labels;
    for (int i = 0; i < 5; ++i) labels.push_back(rng.UniformInt(cfg.num_speakers));
    const auto layers = HeadLayers();
    const TensorMap point = Subset(params, {"head."});
    const Objective f = [&](const TensorMap &p, TensorMap *grad) {
      DenseCache cache;
      const Mat logits = DenseForward(p, layers, emb, grad ? &cache : nullptr);
      Mat dlogits;
      const double loss = CrossEntropy(logits, labels, grad ? &dlogits : nullptr);
      if (grad) DenseBackward(p, layers, cache, dlogits, grad, nullptr);
      return loss;
    };
    CHECK(GradCheck(f, point).max_rel_error < kGradTol);
  }
}

// ---- Layer behaviour ----------------------------------------------------------------

TEST_CASE("splice replicates edges and its backward is the adjoint") {
  Mat x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const Mat s = Splice(x, 1);
  REQUIRE(s.rows() == 3);
  REQUIRE(s.cols() == 6);
  Mat expected(3, 6);
  expected << 1, 2, 1, 2, 3, 4, 1, 2, 3, 4, 5, 6, 3, 4, 5, 6, 5, 6;
  CHECK(s == expected);
  CHECK(Splice(x, 0) == x);
  // <Splice(x), y> == <x, SpliceBackward(y)>
  RandomStream rng(4, "splice");
  for (int c = 0; c <= 3; ++c) {
    const Mat a = RandomMat(&rng, 4, 3);
    const Mat b = RandomMat(&rng, 4, 3 * (2 * c + 1));
    const double lhs = (Splice(a, c).array() * b.array()).sum();
    const double rhs = (a.array() * SpliceBackward(b, c, 3).array()).sum();
    CHECK(std::fabs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("zero-weight extractor gives zero activations") {
  RandomStream rng(2, "zero-extractor");
  const ModelConfig cfg = MicroConfig(&rng);
  TensorMap params = ExpectedShapes(cfg);
  const Mat y = ExtractorForward(cfg, params, RandomMat(&rng, 4, cfg.extractor.input_dim), nullptr);
  CHECK(y.rows() == 4);
  CHECK(y.cols() == cfg.FrameDim());
  CHECK(y.isZero(0.0));
}

TEST_CASE("identity group with no context is a relu") {
  ModelConfig cfg;
  cfg.extractor.input_dim = 3;
  cfg.extractor.group_dims = {3, 3, 3, 3};
  cfg.extractor.context = {0, 0, 0, 0};
  TensorMap params = ExpectedShapes(cfg);
  for (int g = 1; g <= 4; ++g) params[param_names::GroupWeight(g)].AsMatrix().setIdentity();
  RandomStream rng(5, "identity");
  const Mat x = RandomMat(&rng, 6, 3);
  CHECK(ExtractorForward(cfg, params, x, nullptr) == x.cwiseMax(0.0));
}

TEST_CASE("extractor rejects mismatched input") {
  ModelConfig cfg;
  TensorMap params = ExpectedShapes(cfg);
  CHECK_THROWS_AS(ExtractorForward(cfg, params, Mat::Zero(3, cfg.extractor.input_dim + 1), nullptr),
                  StructuralError);
  CHECK_THROWS_AS(ExtractorForward(cfg, params, Mat::Zero(0, cfg.extractor.input_dim), nullptr),
                  ContractError);
}

TEST_CASE("lde with one component is the mean residual") {
  RandomStream rng(6, "lde-k1");
  const Mat frames = RandomMat(&rng, 7, 3);
  TensorMap params{{param_names::kLdeDictionary, Tensor::FromMatrix(RandomMat(&rng, 1, 3))},
                   {param_names::kLdeLogScale, Tensor({1}, 0.4)}};
  const Mat w = LdeAssignments(params, frames);
  for (Eigen::Index t = 0; t < w.rows(); ++t) CHECK(w(t, 0) == 1.0);
  const RowVec e = LdeForward(params, frames, nullptr);
  const RowVec expected = frames.colwise().mean() - params[param_names::kLdeDictionary].AsMatrix().row(0);
  CHECK((e - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lde assignment concentrates on a matching component at large scale") {
  RandomStream rng(8, "lde-limit");
  const Mat dict = RandomMat(&rng, 3, 4);
  TensorMap params{{param_names::kLdeDictionary, Tensor::FromMatrix(dict)},
                   {param_names::kLdeLogScale, Tensor({3}, std::log(100.0))}};
  const Mat frames = dict.row(1).replicate(5, 1);
  const Mat w = LdeAssignments(params, frames);
  for (Eigen::Index t = 0; t < 5; ++t) {
    CHECK(w(t, 1) > 1.0 - 1e-12);
    CHECK(std::fabs(w.row(t).sum() - 1.0) < 1e-12);
  }
  const RowVec e = LdeForward(params, frames, nullptr);
  CHECK(e.segment(4, 4).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lde weights sum to one and output is frame-order invariant") {
  for (int seed = 0; seed < 20; ++seed) {
    RandomStream rng(seed, "lde-perm");
    const int k = 1 + rng.UniformInt(5), d = 2 + rng.UniformInt(4);
    TensorMap params{{param_names::kLdeDictionary, Tensor::FromMatrix(RandomMat(&rng, k, d))},
                     {param_names::kLdeLogScale, Tensor({static_cast<std::size_t>(k)})}};
    for (double &s : params[param_names::kLdeLogScale].Data()) s = rng.Gaussian();
    const Mat frames = RandomMat(&rng, 3 + rng.UniformInt(20), d, 3.0);
    const Mat w = LdeAssignments(params, frames);
    for (Eigen::Index t = 0; t < w.rows(); ++t) CHECK(std::fabs(w.row(t).sum() - 1.0) < 1e-12);

    std::vector<Eigen::Index> perm(frames.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.Engine());
    Mat shuffled(frames.rows(), frames.cols());
    for (Eigen::Index t = 0; t < frames.rows(); ++t) shuffled.row(t) = frames.row(perm[t]);
    // Exact equality, not approximate.
    CHECK(LdeForward(params, frames, nullptr) == LdeForward(params, shuffled, nullptr));
  }
}

TEST_CASE("identically initialised subnets agree") {
  RandomStream rng(9, "subnet-identical");
  ModelConfig cfg = MicroConfig(&rng);
  cfg.subnet.num_domains = 3;
  Model model(cfg);
  const auto utts = testing::RandomUtterances(&rng, 4, cfg.extractor.input_dim);
  model.InitBackbone(1, utts);
  model.InitAdaptationBlock(1);
  CHECK(model.HasAdaptationBlock());
  const Mat emb = RandomMat(&rng, 5, cfg.EmbeddingDim());
  const Mat ref = SubnetForward(cfg, model.Params(), 1, emb, SubnetStage::kFull);
  for (int h = 2; h <= 3; ++h) {
    CHECK(SubnetForward(cfg, model.Params(), h, emb, SubnetStage::kFull) == ref);
    CHECK(ClassifierForward(cfg, model.Params(), h, ref) ==
          ClassifierForward(cfg, model.Params(), 1, ref));
  }
  CHECK(ref.cols() == cfg.FinalDim());
  CHECK(SubnetForward(cfg, model.Params(), 1, emb, SubnetStage::kPhi1).cols() == cfg.Phi1Dim());
}

TEST_CASE("zero input and zero bias give zero subnet output") {
  RandomStream rng(10, "subnet-zero");
  const ModelConfig cfg = MicroConfig(&rng);
  TensorMap params = RandomParams(cfg, &rng, true);
  for (auto &[name, t] : params)
    if (name.ends_with(".bias")) t.SetZero();
  const Mat out = SubnetForward(cfg, params, 1, Mat::Zero(2, cfg.EmbeddingDim()), SubnetStage::kFull);
  CHECK(out.isZero(0.0));
}

TEST_CASE("classifier special cases") {
  RandomStream rng(11, "classifier");
  ModelConfig cfg = MicroConfig(&rng);
  cfg.num_speakers = 3;
  TensorMap params = RandomParams(cfg, &rng, true);
  const Mat emb = RandomMat(&rng, 2, cfg.FinalDim());
  SUBCASE("zero weights give a uniform posterior") {
    params[param_names::ClassifierWeight(1)].SetZero();
    params[param_names::ClassifierBias(1)].SetZero();
    const Mat logits = ClassifierForward(cfg, params, 1, emb);
    CHECK(CrossEntropy(logits, std::vector<int>{0, 2}, nullptr) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
  }
  SUBCASE("one-hot rows copy coordinates") {
    const Mat z = RandomMat(&rng, 2, cfg.FinalDim());
    Mat w = Mat::Zero(3, cfg.FinalDim());
    for (int c = 0; c < 3; ++c) w(c, c % cfg.FinalDim()) = 1.0;
    params[param_names::ClassifierWeight(1)] = Tensor::FromMatrix(w);
    params[param_names::ClassifierBias(1)].SetZero();
    const Mat logits = DenseForward(params, ClassifierLayers(1), z, nullptr);
    for (int c = 0; c < 3; ++c) CHECK(logits.col(c) == z.col(c % cfg.FinalDim()));
  }
  SUBCASE("unknown domain") {
    CHECK_THROWS_AS(ClassifierForward(cfg, params, 0, emb), LookupError);
    CHECK_THROWS_AS(ClassifierForward(cfg, params, cfg.subnet.num_domains + 1, emb), LookupError);
  }
}

// ---- Model, stages and freezing --------------------------------------------------------

TEST_CASE("trainable groups per stage") {
  RandomStream rng(12, "groups");
  const ModelConfig cfg = MicroConfig(&rng);
  const TensorMap params = RandomParams(cfg, &rng, true);
  auto unfrozen = [&](Stage stage) {
    std::set<std::string> names;
    for (const ParamGroup &g : TrainableGroups(cfg, params, stage))
      if (!g.frozen)
        for (const std::string &t : g.tensors) names.insert(t);
    return names;
  };
  const auto pre = unfrozen(Stage::kPretrain);
  for (const auto &[name, t] : params)
    if (!name.starts_with("subnet.") && !name.starts_with("classifier.")) CHECK(pre.contains(name));
  for (const ParamGroup &g : TrainableGroups(cfg, params, Stage::kPretrain)) {
    CHECK_FALSE(g.frozen);
    CHECK(g.lr_multiplier == 1.0);
  }

  const std::set<std::string> ft_expected{
      param_names::GroupWeight(4), param_names::GroupBias(4), param_names::kLdeDictionary,
      param_names::kLdeLogScale, param_names::kHeadWeight, param_names::kHeadBias};
  CHECK(unfrozen(Stage::kFinetune) == ft_expected);

  double backbone = 0.0, block = 0.0;
  for (const ParamGroup &g : TrainableGroups(cfg, params, Stage::kAdapt)) {
    if (g.frozen) {
      for (const std::string &t : g.tensors) {
        const bool lower_group = t.starts_with("extractor.g") && t[11] < '4';
        CHECK((lower_group || t.starts_with("head.")));
      }
      continue;
    }
    const bool is_block = g.tensors.front().starts_with("subnet.") ||
                          g.tensors.front().starts_with("classifier.");
    (is_block ? block : backbone) = g.lr_multiplier;
  }
  CHECK(block / backbone == 10.0);
}

TEST_CASE("model adopts only well-shaped tensors") {
  RandomStream rng(13, "adopt");
  const ModelConfig cfg = MicroConfig(&rng);
  TensorMap params = RandomParams(cfg, &rng, false);
  CHECK_NOTHROW(Model(cfg, params));
  CHECK_FALSE(Model(cfg, params).HasAdaptationBlock());
  TensorMap extra = params;
  extra["bogus"] = Tensor({1});
  CHECK_THROWS_AS(Model(cfg, extra), StructuralError);
  TensorMap missing = params;
  missing.erase(param_names::kHeadBias);
  CHECK_THROWS_AS(Model(cfg, missing), StructuralError);
  TensorMap bad = params;
  bad[param_names::kHeadBias] = Tensor({cfg.num_speakers + 1ul});
  CHECK_THROWS_AS(Model(cfg, bad), StructuralError);
}

TEST_CASE("initialisation is deterministic") {
  RandomStream rng(14, "init");
  const ModelConfig cfg = MicroConfig(&rng);
  const auto utts = testing::RandomUtterances(&rng, 3, cfg.extractor.input_dim);
  Model a(cfg), b(cfg), c(cfg);
  a.InitBackbone(5, utts);
  b.InitBackbone(5, utts);
  c.InitBackbone(6, utts);
  CHECK(BitEqual(a.Params(), b.Params()));
  CHECK_FALSE(BitEqual(a.Params(), c.Params()));
}

TEST_CASE("config fingerprint follows the canonical text") {
  ModelConfig a, b;
  CHECK(a.ComputeFingerprint() == b.ComputeFingerprint());
  b.lde.num_components = 4;
  CHECK(a.ComputeFingerprint() != b.ComputeFingerprint());
  CHECK(a.CanonicalText() != b.CanonicalText());
  ModelConfig bad;
  bad.num_speakers = 1;
  CHECK_THROWS_AS(bad.Validate(), ContractError);
  CHECK(ParseStage("adapt") == Stage::kAdapt);
  CHECK(StageName(Stage::kFinetune) == "finetune");
  CHECK_THROWS_AS(ParseStage("train"), ContractError);
}

// ---- Checkpoints ------------------------------------------------------------------------

Checkpoint RandomCheckpoint(std::uint64_t seed) {
  RandomStream rng(seed, "ckpt");
  const ModelConfig cfg = MicroConfig(&rng);
  Checkpoint ckpt;
  ckpt.tensors = RandomParams(cfg, &rng, true);
  RoundToFloat(&ckpt.tensors);
  ckpt.meta = {Stage::kAdapt, 1234, cfg.ComputeFingerprint()};
  return ckpt;
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const auto dir = testing::TempDir("model-ckpt");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Checkpoint ckpt = RandomCheckpoint(seed);
    SaveCheckpoint(dir / "a.ckpt", ckpt);
    const Checkpoint back = LoadCheckpoint(dir / "a.ckpt", ckpt.meta.fingerprint);
    CHECK(BitEqual(back.tensors, ckpt.tensors));
    CHECK(back.meta.stage == ckpt.meta.stage);
    CHECK(back.meta.step == ckpt.meta.step);
    CHECK(back.meta.fingerprint == ckpt.meta.fingerprint);
    // Saving again reproduces the same bytes.
    SaveCheckpoint(dir / "b.ckpt", back);
    CHECK(ReadFileBytes(dir / "a.ckpt") == ReadFileBytes(dir / "b.ckpt"));
  }
}

FormatError::Kind LoadErrorKind(const std::filesystem::path &path) {
  try {
    LoadCheckpoint(path);
  } catch (const FormatError &e) {
    return e.kind();
  }
  FAIL("checkpoint unexpectedly loaded");
  return FormatError::Kind::kMalformed;
}

TEST_CASE("checkpoint corruption is detected") {
  const auto dir = testing::TempDir("model-ckpt-bad");
  const Checkpoint ckpt = RandomCheckpoint(1);
  SaveCheckpoint(dir / "good.ckpt", ckpt);
  const std::string bytes = ReadFileBytes(dir / "good.ckpt");

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2,
                          bytes.size() - 1}) {
    WriteFileBytes(dir / "cut.ckpt", bytes.substr(0, cut));
    CAPTURE(cut);
    const FormatError::Kind kind = LoadErrorKind(dir / "cut.ckpt");
    const bool expected =
        kind == FormatError::Kind::kTruncated || (cut < 4 && kind == FormatError::Kind::kBadMagic);
    CHECK(expected);
  }
  std::string magic = bytes;
  magic[0] = 'Y';
  WriteFileBytes(dir / "magic.ckpt", magic);
  CHECK(LoadErrorKind(dir / "magic.ckpt") == FormatError::Kind::kBadMagic);
  std::string version = bytes;
  version[4] = 9;
  WriteFileBytes(dir / "version.ckpt", version);
  CHECK(LoadErrorKind(dir / "version.ckpt") == FormatError::Kind::kBadVersion);
  WriteFileBytes(dir / "trailing.ckpt", bytes + "x");
  CHECK(LoadErrorKind(dir / "trailing.ckpt") == FormatError::Kind::kMalformed);

  Fingerprint other = ckpt.meta.fingerprint;
  other[0] ^= 1;
  try {
    LoadCheckpoint(dir / "good.ckpt", other);
    FAIL("fingerprint mismatch not detected");
  } catch (const FormatError &e) {
    CHECK(e.kind() == FormatError::Kind::kFingerprintMismatch);
  }
  CHECK_THROWS_AS(LoadCheckpoint(dir / "absent.ckpt"), IoError);
}

TEST_CASE("non-finite tensors are not saved") {
  const auto dir = testing::TempDir("model-ckpt-nan");
  Checkpoint ckpt = RandomCheckpoint(2);
  ckpt.tensors.begin()->second[0] = NAN;
  CHECK_THROWS_AS(SaveCheckpoint(dir / "x.ckpt", ckpt), NumericError);
}

TEST_CASE("optimizer state travels inside the tensor map") {
  OptimState state;
  state.first["a"] = Tensor({2}, 0.5);
  state.second["a"] = Tensor({2}, 0.25);
  state.max_second["a"] = Tensor({2}, 0.75);
  TensorMap tensors{{"a", Tensor({2}, 1.0)}};
  StoreOptimState(state, &tensors);
  CHECK(tensors.size() == 4);
  const OptimState back = ExtractOptimState(&tensors, 17);
  CHECK(tensors.size() == 1);
  CHECK(back.step == 17);
  CHECK(BitEqual(back.first, state.first));
  CHECK(BitEqual(back.second, state.second));
  CHECK(BitEqual(back.max_second, state.max_second));
}

}  // namespace
}  // namespace xdomain
