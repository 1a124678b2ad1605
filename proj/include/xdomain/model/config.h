// include/xdomain/model/config.h

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

#ifndef XDOMAIN_MODEL_CONFIG_H_
#define XDOMAIN_MODEL_CONFIG_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "xdomain/numkit/random.h"

namespace xdomain {

enum class Stage : std::uint8_t { kPretrain = 0, kFinetune = 1, kAdapt = 2 };

std::string_view StageName(Stage stage);
/// Accepts "pretrain", "finetune" or "adapt".
Stage ParseStage(std::string_view name);

/// Frame-level extractor: four dense layer groups, each seeing 2*context+1
/// frames of the previous group's output (edges replicated).
struct ExtractorConfig {
  int input_dim = 20;
  std::array<int, 4> group_dims{32, 32, 32, 32};
  std::array<int, 4> context{1, 1, 1, 0};
};

struct LdeConfig {
  int num_components = 8;
};

/// Per-target-domain adaptation block: two Phi1 layers followed by two Phi2
/// layers.
struct SubnetConfig {
  std::array<int, 2> phi1_dims{128, 128};
  std::array<int, 2> phi2_dims{128, 128};
  int num_domains = 3;
};

struct ModelConfig {
  ExtractorConfig extractor;
  LdeConfig lde;
  SubnetConfig subnet;
  int num_speakers = 2;

  int FrameDim() const { return extractor.group_dims[3]; }
  /// LDE output size, K * D.
  int EmbeddingDim() const { return lde.num_components * FrameDim(); }
  int Phi1Dim() const { return subnet.phi1_dims[1]; }
  int FinalDim() const { return subnet.phi2_dims[1]; }

  void Validate() const;
  /// One "key=value" line per field, in a fixed order.
  std::string CanonicalText() const;
  Fingerprint ComputeFingerprint() const { return Digest(CanonicalText()); }
};

/// Parameter tensor names.  Target domains are numbered 1..N, matching corpus
/// domain ids; domain 0 is the clean source.
namespace param_names {
std::string GroupWeight(int group);
std::string GroupBias(int group);
inline constexpr const char *kLdeDictionary = "lde.dictionary";
inline constexpr const char *kLdeLogScale = "lde.log_scale";
inline constexpr const char *kHeadWeight = "head.weight";
inline constexpr const char *kHeadBias = "head.bias";
/// layer: 0,1 are Phi1; 2,3 are Phi2.
std::string SubnetWeight(int domain, int layer);
std::string SubnetBias(int domain, int layer);
std::string ClassifierWeight(int domain);
std::string ClassifierBias(int domain);
}  // namespace param_names

}  // namespace xdomain

#endif  // XDOMAIN_MODEL_CONFIG_H_
