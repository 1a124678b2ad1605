// src/numkit/schedule.cc

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

#include "xdomain/numkit/schedule.h"

#include <algorithm>
#include <cmath>

#include "xdomain/numkit/errors.h"

namespace xdomain {

void ScheduleConfig::Validate() const {
  if (!(eta0 > 0.0)) throw ContractError("schedule: eta0 must be positive");
  if (!(alpha >= 0.0)) throw ContractError("schedule: alpha must be nonnegative");
  if (!(beta >= 0.0)) throw ContractError("schedule: beta must be nonnegative");
  if (!(theta > 0.0)) throw ContractError("schedule: theta must be positive");
  if (noam_dim <= 0 || noam_warmup <= 0)
    throw ContractError("schedule: noam_dim and noam_warmup must be positive");
  if (!(noam_factor > 0.0)) throw ContractError("schedule: noam_factor must be positive");
}

double InvDecayLr(double p, const ScheduleConfig &cfg) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("InvDecayLr: progress outside [0, 1]");
  return cfg.eta0 / std::pow(1.0 + cfg.alpha * p, cfg.beta);
}

double ProgressiveMu(double p, double theta) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractError("ProgressiveMu: progress outside [0, 1]");
  if (!(theta > 0.0)) throw ContractError("ProgressiveMu: theta must be positive");
  return 2.0 / (1.0 + std::exp(-theta * p)) - 1.0;
}

double NoamLr(long step, const ScheduleConfig &cfg) {
  if (step < 1) throw ContractError("NoamLr: step must be >= 1");
  const double s = static_cast<double>(step);
  return cfg.noam_factor / std::sqrt(static_cast<double>(cfg.noam_dim)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(static_cast<double>(cfg.noam_warmup), -1.5));
}

double NoamPeakLr(const ScheduleConfig &cfg) { return NoamLr(cfg.noam_warmup, cfg); }

}  // namespace xdomain
