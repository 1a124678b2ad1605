// src/model/config.cc

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

#include "xdomain/model/config.h"

#include <sstream>

#include "xdomain/numkit/errors.h"

namespace xdomain {

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kPretrain: return "pretrain";
    case Stage::kFinetune: return "finetune";
    case Stage::kAdapt: return "adapt";
  }
  throw ContractError("unknown stage");
}

Stage ParseStage(std::string_view name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "finetune") return Stage::kFinetune;
  if (name == "adapt") return Stage::kAdapt;
  throw ContractError("unknown stage '" + std::string(name) + "'");
}

void ModelConfig::Validate() const {
  if (extractor.input_dim <= 0) throw ContractError("model: input_dim must be positive");
  for (int g = 0; g < 4; ++g) {
    if (extractor.group_dims[g] <= 0) throw ContractError("model: group dims must be positive");
    if (extractor.context[g] < 0) throw ContractError("model: context must be nonnegative");
  }
  if (lde.num_components <= 0) throw ContractError("model: LDE needs at least one component");
  for (int d : subnet.phi1_dims)
    if (d <= 0) throw ContractError("model: phi1 dims must be positive");
  for (int d : subnet.phi2_dims)
    if (d <= 0) throw ContractError("model: phi2 dims must be positive");
  if (subnet.num_domains < 1) throw ContractError("model: need at least one target domain");
  if (num_speakers < 2) throw ContractError("model: need at least two speakers");
}

std::string ModelConfig::CanonicalText() const {
  std::ostringstream os;
  os << "input_dim=" << extractor.input_dim << '\n';
  for (int g = 0; g < 4; ++g)
    os << "group" << g + 1 << "=" << extractor.group_dims[g] << "/" << extractor.context[g] << '\n';
  os << "lde_components=" << lde.num_components << '\n';
  os << "phi1=" << subnet.phi1_dims[0] << "," << subnet.phi1_dims[1] << '\n';
  os << "phi2=" << subnet.phi2_dims[0] << "," << subnet.phi2_dims[1] << '\n';
  os << "target_domains=" << subnet.num_domains << '\n';
  os << "speakers=" << num_speakers << '\n';
  return os.str();
}

namespace param_names {

std::string GroupWeight(int group) { return "extractor.g" + std::to_string(group) + ".weight"; }
std::string GroupBias(int group) { return "extractor.g" + std::to_string(group) + ".bias"; }

std::string SubnetWeight(int domain, int layer) {
  return "subnet." + std::to_string(domain) + (layer < 2 ? ".phi1." : ".phi2.") +
         std::to_string(layer % 2) + ".weight";
}
std::string SubnetBias(int domain, int layer) {
  return "subnet." + std::to_string(domain) + (layer < 2 ? ".phi1." : ".phi2.") +
         std::to_string(layer % 2) + ".bias";
}
std::string ClassifierWeight(int domain) {
  return "classifier." + std::to_string(domain) + ".weight";
}
std::string ClassifierBias(int domain) { return "classifier." + std::to_string(domain) + ".bias"; }

}  // namespace param_names

}  // namespace xdomain
