//
// Copyright 2026 The dstlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dstlab/common.h"

#include <openssl/sha.h>

#include <array>
#include <cctype>
#include <cstdio>

namespace dstlab {

std::string_view StatusName(SlotStatus status) {
  switch (status) {
    case SlotStatus::kActive:
      return "active";
    case SlotStatus::kDontCare:
      return "dontcare";
    case SlotStatus::kInactive:
      return "inactive";
  }
  return "inactive";
}

SlotStatus ParseStatus(std::string_view name) {
  if (name == "active") return SlotStatus::kActive;
  if (name == "dontcare" || name == "don't care" || name == "dont care") {
    return SlotStatus::kDontCare;
  }
  if (name == "inactive") return SlotStatus::kInactive;
  throw Error("unknown slot status '" + std::string(name) + "'");
}

std::string_view StatusModeName(StatusMode mode) {
  return mode == StatusMode::kHierarchical ? "hierarchical" : "flat";
}

StatusMode ParseStatusMode(std::string_view name) {
  if (name == "hierarchical") return StatusMode::kHierarchical;
  if (name == "flat") return StatusMode::kFlat;
  throw Error("unknown status mode '" + std::string(name) + "'");
}

std::string NormalizeValue(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  bool pending_space = false;
  for (unsigned char c : value) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string Sha256Hex(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
         digest.data());
  std::string hex;
  hex.reserve(2 * digest.size());
  char buf[3];
  for (unsigned char b : digest) {
    std::snprintf(buf, sizeof(buf), "%02x", b);
    hex += buf;
  }
  return hex;
}

}  // namespace dstlab
