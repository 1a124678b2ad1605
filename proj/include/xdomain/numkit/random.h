// include/xdomain/numkit/random.h

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

#ifndef XDOMAIN_NUMKIT_RANDOM_H_
#define XDOMAIN_NUMKIT_RANDOM_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace xdomain {

/// 16-byte stable digest (BLAKE2b-128) used for config fingerprints.
using Fingerprint = std::array<std::uint8_t, 16>;

Fingerprint Digest(std::string_view bytes);
std::string ToHex(const Fingerprint &fp);
/// Inverse of ToHex; throws ContractError on malformed input.
Fingerprint FingerprintFromHex(std::string_view hex);

/// Seed of the substream (master, name, counter).  Distinct names or counters
/// give statistically independent streams, so results do not depend on the
/// order in which substreams are consumed.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view name, std::uint64_t counter = 0);

/**
   A named random substream.  Every random draw in the library goes through
   one of these, keyed by the master seed plus a purpose string and counter
   (utterance index, training step, ...).
*/
class RandomStream {
 public:
  RandomStream(std::uint64_t master, std::string_view name, std::uint64_t counter = 0)
      : engine_(DeriveSeed(master, name, counter)) {}

  double Uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double Gaussian() { return normal_(engine_); }
  /// Uniform integer in [0, n).
  int UniformInt(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  std::mt19937_64 &Engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_RANDOM_H_
