// include/xdomain/numkit/binary-io.h

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

#ifndef XDOMAIN_NUMKIT_BINARY_IO_H_
#define XDOMAIN_NUMKIT_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>

#include "xdomain/numkit/errors.h"

namespace xdomain {

/// Appends little-endian integers and f32 values to a byte string.
class ByteWriter {
 public:
  void Raw(const void *p, std::size_t n) {
    const char *c = static_cast<const char *>(p);
    buf_.append(c, n);
  }
  template <typename T>
  void Le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
  void F32(double v) { Le(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  const std::string &Bytes() const { return buf_; }

 private:
  std::string buf_;
};

/// Reads the counterpart of ByteWriter; running past the end throws
/// FormatError::kTruncated mentioning `what`.
class ByteReader {
 public:
  ByteReader(std::string bytes, std::string what) : buf_(std::move(bytes)), what_(std::move(what)) {}

  void Raw(void *p, std::size_t n) {
    Need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T Le() {
    Need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double F32() { return std::bit_cast<float>(Le<std::uint32_t>()); }
  std::size_t Remaining() const { return buf_.size() - pos_; }
  void Need(std::size_t n) const {
    if (buf_.size() - pos_ < n)
      throw FormatError(FormatError::Kind::kTruncated, what_ + ": file is truncated");
  }

 private:
  std::string buf_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string ReadFileBytes(const std::filesystem::path &path);
void WriteFileBytes(const std::filesystem::path &path, const std::string &bytes);

}  // namespace xdomain

#endif  // XDOMAIN_NUMKIT_BINARY_IO_H_
