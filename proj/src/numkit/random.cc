// src/numkit/random.cc

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

#include "xdomain/numkit/random.h"

#include <sodium.h>

#include <cstring>

#include "xdomain/numkit/errors.h"

namespace xdomain {

namespace {

void AppendLe64(std::string *out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

Fingerprint Digest(std::string_view bytes) {
  Fingerprint fp{};
  crypto_generichash(fp.data(), fp.size(), reinterpret_cast<const unsigned char *>(bytes.data()),
                     bytes.size(), nullptr, 0);
  return fp;
}

std::string ToHex(const Fingerprint &fp) {
  std::string hex(fp.size() * 2 + 1, '\0');
  sodium_bin2hex(hex.data(), hex.size(), fp.data(), fp.size());
  hex.pop_back();
  return hex;
}

Fingerprint FingerprintFromHex(std::string_view hex) {
  Fingerprint fp{};
  size_t len = 0;
  if (hex.size() != 2 * fp.size() ||
      sodium_hex2bin(fp.data(), fp.size(), hex.data(), hex.size(), nullptr, &len, nullptr) != 0 ||
      len != fp.size())
    throw ContractError("malformed fingerprint '" + std::string(hex) + "'");
  return fp;
}

std::uint64_t DeriveSeed(std::uint64_t master, std::string_view name, std::uint64_t counter) {
  std::string key;
  AppendLe64(&key, master);
  AppendLe64(&key, counter);
  key.append(name);
  unsigned char out[8];
  crypto_generichash(out, sizeof(out), reinterpret_cast<const unsigned char *>(key.data()),
                     key.size(), nullptr, 0);
  std::uint64_t seed = 0;
  for (int i = 7; i >= 0; --i) seed = (seed << 8) | out[i];
  return seed;
}

}  // namespace xdomain
