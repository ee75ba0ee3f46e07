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

#ifndef DSTLAB_COMMON_H_
#define DSTLAB_COMMON_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dstlab {

// All contract violations and malformed inputs surface as this exception.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class SlotStatus { kActive = 0, kDontCare = 1, kInactive = 2 };

inline constexpr int kNumStatuses = 3;

std::string_view StatusName(SlotStatus status);
SlotStatus ParseStatus(std::string_view name);

enum class StatusMode { kHierarchical, kFlat };

std::string_view StatusModeName(StatusMode mode);
StatusMode ParseStatusMode(std::string_view name);

// Lowercase, trim, collapse internal whitespace.
std::string NormalizeValue(std::string_view value);

// SHA-256 hex digest.
std::string Sha256Hex(std::string_view bytes);

}  // namespace dstlab

#endif  // DSTLAB_COMMON_H_
