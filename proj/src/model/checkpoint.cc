// src/model/checkpoint.cc

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

#include "xdomain/model/checkpoint.h"

#include <cstring>
#include <limits>

#include "xdomain/numkit/binary-io.h"
#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

constexpr char kMagic[4] = {'X', 'D', 'C', 'K'};
constexpr const char *kOptimFirst = "optim/first/";
constexpr const char *kOptimSecond = "optim/second/";
constexpr const char *kOptimMax = "optim/max_second/";

void MoveWithPrefix(TensorMap *tensors, const std::string &prefix, TensorMap *out) {
  for (auto it = tensors->begin(); it != tensors->end();) {
    if (it->first.starts_with(prefix)) {
      (*out)[it->first.substr(prefix.size())] = std::move(it->second);
      it = tensors->erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  ByteWriter w;
  w.Raw(kMagic, 4);
  w.Le<std::uint32_t>(kCheckpointVersion);
  w.Le<std::uint8_t>(static_cast<std::uint8_t>(ckpt.meta.stage));
  w.Le<std::uint64_t>(ckpt.meta.step);
  w.Le<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto &[name, tensor] : ckpt.tensors) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw ContractError("checkpoint: tensor name too long");
    if (!tensor.AllFinite()) throw NumericError("checkpoint: tensor '" + name + "' is not finite");
    w.Le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.Raw(name.data(), name.size());
    w.Le<std::uint8_t>(static_cast<std::uint8_t>(tensor.Rank()));
    for (std::size_t d : tensor.Dims()) w.Le<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double x : tensor.Data()) w.F32(x);
  }
  w.Raw(ckpt.meta.fingerprint.data(), ckpt.meta.fingerprint.size());

  WriteFileBytes(path, w.Bytes());
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  ByteReader r(ReadFileBytes(path), "checkpoint");
  char magic[4];
  r.Raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError(FormatError::Kind::kBadMagic, "checkpoint: bad magic in '" + path.string() + "'");
  const auto version = r.Le<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError(FormatError::Kind::kBadVersion,
                      "checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ckpt;
  const auto stage = r.Le<std::uint8_t>();
  if (stage > static_cast<std::uint8_t>(Stage::kAdapt))
    throw FormatError(FormatError::Kind::kMalformed, "checkpoint: unknown stage byte");
  ckpt.meta.stage = static_cast<Stage>(stage);
  ckpt.meta.step = r.Le<std::uint64_t>();
  const auto count = r.Le<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.Le<std::uint16_t>(), '\0');
    r.Raw(name.data(), name.size());
    const auto rank = r.Le<std::uint8_t>();
    if (rank == 0) throw FormatError(FormatError::Kind::kMalformed, "checkpoint: rank-0 tensor");
    std::vector<std::size_t> dims(rank);
    std::size_t size = 1;
    for (auto &d : dims) {
      d = r.Le<std::uint32_t>();
      if (d == 0) throw FormatError(FormatError::Kind::kMalformed, "checkpoint: zero dimension");
      size *= d;
    }
    if (size > r.Remaining() / 4)
      throw FormatError(FormatError::Kind::kTruncated, "checkpoint: file is truncated");
    Tensor t(std::move(dims));
    for (double &x : t.Data()) x = r.F32();
    if (!ckpt.tensors.emplace(std::move(name), std::move(t)).second)
      throw FormatError(FormatError::Kind::kMalformed, "checkpoint: duplicate tensor name");
  }
  r.Raw(ckpt.meta.fingerprint.data(), ckpt.meta.fingerprint.size());
  if (r.Remaining() != 0)
    throw FormatError(FormatError::Kind::kMalformed, "checkpoint: trailing bytes");
  return ckpt;
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path, const Fingerprint &expected) {
  Checkpoint ckpt = LoadCheckpoint(path);
  if (ckpt.meta.fingerprint != expected)
    throw FormatError(FormatError::Kind::kFingerprintMismatch,
                      "checkpoint: config fingerprint " + ToHex(ckpt.meta.fingerprint) +
                          " does not match expected " + ToHex(expected));
  return ckpt;
}

OptimState ExtractOptimState(TensorMap *tensors, std::uint64_t step) {
  OptimState state;
  MoveWithPrefix(tensors, kOptimFirst, &state.first);
  MoveWithPrefix(tensors, kOptimSecond, &state.second);
  MoveWithPrefix(tensors, kOptimMax, &state.max_second);
  state.step = step;
  return state;
}

void StoreOptimState(const OptimState &state, TensorMap *tensors) {
  for (const auto &[name, t] : state.first) (*tensors)[kOptimFirst + name] = t;
  for (const auto &[name, t] : state.second) (*tensors)[kOptimSecond + name] = t;
  for (const auto &[name, t] : state.max_second) (*tensors)[kOptimMax + name] = t;
}

}  // namespace xdomain
