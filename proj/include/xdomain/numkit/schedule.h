// include/xdomain/numkit/schedule.h

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

#ifndef XDOMAIN_NUMKIT_SCHEDULE_H_
#define XDOMAIN_NUMKIT_SCHEDULE_H_

namespace xdomain {

struct ScheduleConfig {
  // Inverse-decay schedule of the adaptation block.
  double eta0 = 0.01;
  double alpha = 10.0;
  double beta = 0.75;
  // Progressive weight of the alignment losses.
  double theta = 10.0;
  // Noam warm-up schedule used for pretraining.
  int noam_dim = 64;
  int noam_warmup = 100;
  double noam_factor = 0.5;

  void Validate() const;
};

/// eta0 / (1 + alpha p)^beta for p in [0, 1].
double InvDecayLr(double p, const ScheduleConfig &cfg);

/// 2 / (1 + exp(-theta p)) - 1: 0 at p = 0, strictly increasing, below 1.
double ProgressiveMu(double p, double theta);

/// factor * dim^-0.5 * min(step^-0.5, step * warmup^-1.5), step >= 1.
double NoamLr(long step, const ScheduleConfig &cfg);

/// Value of NoamLr at step == noam_warmup, where the two branches meet.
double NoamPeakLr(const ScheduleConfig &cfg);

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_SCHEDULE_H_
