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

#ifndef DSTLAB_SCHEMA_H_
#define DSTLAB_SCHEMA_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dstlab/common.h"
#include "json.hpp"

namespace dstlab {

enum class SlotKind { kCategorical, kNonCategorical };

struct SlotSpec {
  std::string name;
  SlotKind kind = SlotKind::kNonCategorical;
  std::vector<std::string> candidate_values;
  std::string domain;

  bool categorical() const { return kind == SlotKind::kCategorical; }
};

struct SlotValue {
  SlotStatus status = SlotStatus::kInactive;
  std::string value;

  friend bool operator==(const SlotValue&, const SlotValue&) = default;
};

// Slot name -> (status, value). Slots absent from the map are inactive.
struct BeliefState {
  std::map<std::string, SlotValue> entries;

  SlotValue Get(const std::string& slot) const;
  void Set(const std::string& slot, SlotStatus status, std::string value = {});
  // Drops explicit inactive entries so equal states compare equal.
  BeliefState Canonical() const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

nlohmann::ordered_json BeliefStateToJson(const BeliefState& state);
BeliefState BeliefStateFromJson(const nlohmann::json& j);

// The task ontology. Immutable after construction; slot and domain order is
// declaration order.
class Schema {
 public:
  Schema() = default;
  // Validates every invariant; throws Error naming the offending slot/domain.
  Schema(std::vector<std::string> domains, std::vector<SlotSpec> slots);

  const std::vector<std::string>& domains() const { return domains_; }
  const std::vector<SlotSpec>& slots() const { return slots_; }
  const SlotSpec& slot(std::size_t i) const { return slots_[i]; }
  std::size_t num_domains() const { return domains_.size(); }
  std::size_t num_slots() const { return slots_.size(); }

  // Slot indices of domain `d`, in declaration order.
  const std::vector<std::size_t>& domain_slots(std::size_t d) const {
    return domain_slots_[d];
  }
  std::size_t slot_domain(std::size_t slot) const { return slot_domain_[slot]; }
  const std::vector<std::size_t>& categorical_slots() const {
    return categorical_;
  }
  const std::vector<std::size_t>& noncategorical_slots() const {
    return noncategorical_;
  }

  std::optional<std::size_t> FindSlot(std::string_view name) const;
  std::optional<std::size_t> FindDomain(std::string_view name) const;

  nlohmann::ordered_json ToJson() const;

  friend bool operator==(const Schema& a, const Schema& b);

 private:
  std::vector<std::string> domains_;
  std::vector<SlotSpec> slots_;
  std::vector<std::vector<std::size_t>> domain_slots_;
  std::vector<std::size_t> slot_domain_;
  std::vector<std::size_t> categorical_;
  std::vector<std::size_t> noncategorical_;
  std::map<std::string, std::size_t, std::less<>> slot_index_;
};

Schema SchemaFromJson(const nlohmann::json& j);
Schema ParseSchema(std::string_view text);
Schema LoadSchema(const std::filesystem::path& path);

// Empty iff every slot exists, active categorical values are candidates,
// inactive/don't-care slots carry no value and active slots carry one.
std::vector<std::string> ValidateState(const Schema& schema,
                                       const BeliefState& state);

// Indicator per domain: true iff any slot of the domain is not inactive.
std::vector<bool> ActiveDomains(const Schema& schema, const BeliefState& state);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

}  // namespace dstlab

#endif  // DSTLAB_SCHEMA_H_
