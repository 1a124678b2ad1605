// include/xdomain/model/checkpoint.h

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

#ifndef XDOMAIN_MODEL_CHECKPOINT_H_
#define XDOMAIN_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>

#include "xdomain/model/config.h"
#include "xdomain/numkit/optimizer.h"
#include "xdomain/numkit/tensor.h"

// Checkpoint file layout (all integers little-endian):
//
//   "XDCK" | u32 version (1) | u8 stage | u64 step | u32 tensor count
//   per tensor: u16 name length | name bytes | u8 rank | u32 dims[rank]
//               | f32 data (row-major)
//   16-byte config fingerprint
//
// Optimizer moments travel as ordinary tensors under the "optim/" prefix so
// that a stage can be resumed mid-way.

namespace xdomain {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  Stage stage = Stage::kPretrain;
  std::uint64_t step = 0;
  Fingerprint fingerprint{};
};

struct Checkpoint {
  CheckpointMeta meta;
  TensorMap tensors;
};

/// Values are stored as f32; tensors holding float-representable values
/// round-trip bit-exactly.
void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt);

/// Throws FormatError (kBadMagic, kBadVersion, kTruncated, kMalformed) or
/// IoError.  Nothing is returned unless the whole file decoded.
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

/// As above, and additionally rejects a fingerprint different from
/// `expected` with FormatError::kFingerprintMismatch.
Checkpoint LoadCheckpoint(const std::filesystem::path &path, const Fingerprint &expected);

/// Moves the "optim/" tensors of `tensors` into an optimizer state whose step
/// counter is `step`.
OptimState ExtractOptimState(TensorMap *tensors, std::uint64_t step);
/// Copies an optimizer state into `tensors` under the "optim/" prefix.
void StoreOptimState(const OptimState &state, TensorMap *tensors);

}  // namespace xdomain

#endif  // XDOMAIN_MODEL_CHECKPOINT_H_
