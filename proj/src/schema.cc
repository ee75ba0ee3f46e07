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

#include "dstlab/schema.h"

#include <fstream>
#include <set>
#include <sstream>

namespace dstlab {

SlotValue BeliefState::Get(const std::string& slot) const {
  auto it = entries.find(slot);
  return it == entries.end() ? SlotValue{} : it->second;
}

void BeliefState::Set(const std::string& slot, SlotStatus status,
                      std::string value) {
  entries[slot] = SlotValue{status, std::move(value)};
}

BeliefState BeliefState::Canonical() const {
  BeliefState out;
  for (const auto& [slot, v] : entries) {
    if (v.status != SlotStatus::kInactive) out.entries.emplace(slot, v);
  }
  return out;
}

nlohmann::ordered_json BeliefStateToJson(const BeliefState& state) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [slot, v] : state.entries) {
    j[slot] = {{"status", StatusName(v.status)}, {"value", v.value}};
  }
  return j;
}

BeliefState BeliefStateFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("belief state must be a JSON object");
  BeliefState state;
  for (const auto& [slot, v] : j.items()) {
    if (!v.is_object() || !v.contains("status")) {
      throw Error("state entry for slot '" + slot + "' lacks a status");
    }
    state.Set(slot, ParseStatus(v.at("status").get<std::string>()),
              v.value("value", std::string()));
  }
  return state;
}

Schema::Schema(std::vector<std::string> domains, std::vector<SlotSpec> slots)
    : domains_(std::move(domains)), slots_(std::move(slots)) {
  std::map<std::string, std::size_t, std::less<>> domain_index;
  for (std::size_t d = 0; d < domains_.size(); ++d) {
    if (!domain_index.emplace(domains_[d], d).second) {
      throw Error("duplicate domain '" + domains_[d] + "'");
    }
  }
  domain_slots_.resize(domains_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const SlotSpec& s = slots_[i];
    if (s.name.empty()) throw Error("slot with empty name");
    if (!slot_index_.emplace(s.name, i).second) {
      throw Error("duplicate slot name '" + s.name + "'");
    }
    auto d = domain_index.find(s.domain);
    if (d == domain_index.end()) {
      throw Error("slot '" + s.name + "' references unknown domain '" +
                  s.domain + "'");
    }
    if (s.categorical()) {
      std::set<std::string> distinct(s.candidate_values.begin(),
                                     s.candidate_values.end());
      if (distinct.size() < 2 || distinct.size() != s.candidate_values.size()) {
        throw Error("categorical slot '" + s.name +
                    "' needs at least 2 distinct candidate values");
      }
      categorical_.push_back(i);
    } else {
      if (!s.candidate_values.empty()) {
        throw Error("non-categorical slot '" + s.name +
                    "' must not list candidate values");
      }
      noncategorical_.push_back(i);
    }
    domain_slots_[d->second].push_back(i);
    slot_domain_.push_back(d->second);
  }
}

std::optional<std::size_t> Schema::FindSlot(std::string_view name) const {
  auto it = slot_index_.find(name);
  if (it == slot_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Schema::FindDomain(std::string_view name) const {
  for (std::size_t d = 0; d < domains_.size(); ++d) {
    if (domains_[d] == name) return d;
  }
  return std::nullopt;
}

nlohmann::ordered_json Schema::ToJson() const {
  nlohmann::ordered_json j;
  j["domains"] = domains_;
  j["slots"] = nlohmann::ordered_json::array();
  for (const SlotSpec& s : slots_) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["domain"] = s.domain;
    js["kind"] = s.categorical() ? "categorical" : "noncategorical";
    js["values"] = s.candidate_values;
    j["slots"].push_back(std::move(js));
  }
  return j;
}

bool operator==(const Schema& a, const Schema& b) {
  if (a.domains_ != b.domains_ || a.slots_.size() != b.slots_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.slots_.size(); ++i) {
    const SlotSpec& x = a.slots_[i];
    const SlotSpec& y = b.slots_[i];
    if (x.name != y.name || x.kind != y.kind || x.domain != y.domain ||
        x.candidate_values != y.candidate_values) {
      return false;
    }
  }
  return true;
}

Schema SchemaFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("domains") || !j.contains("slots")) {
    throw Error("schema document needs 'domains' and 'slots'");
  }
  std::vector<std::string> domains;
  for (const auto& d : j.at("domains")) domains.push_back(d.get<std::string>());
  std::vector<SlotSpec> slots;
  for (const auto& js : j.at("slots")) {
    SlotSpec s;
    s.name = js.at("name").get<std::string>();
    if (!js.contains("domain")) {
      throw Error("slot '" + s.name + "' has no domain");
    }
    s.domain = js.at("domain").get<std::string>();
    const std::string kind = js.value("kind", std::string("noncategorical"));
    if (kind == "categorical") {
      s.kind = SlotKind::kCategorical;
    } else if (kind == "noncategorical" || kind == "non-categorical") {
      s.kind = SlotKind::kNonCategorical;
    } else {
      throw Error("slot '" + s.name + "' has unknown kind '" + kind + "'");
    }
    if (js.contains("values")) {
      for (const auto& v : js.at("values")) {
        s.candidate_values.push_back(v.get<std::string>());
      }
    }
    slots.push_back(std::move(s));
  }
  return Schema(std::move(domains), std::move(slots));
}

Schema ParseSchema(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("schema parse error: ") + e.what());
  }
  try {
    return SchemaFromJson(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed schema: ") + e.what());
  }
}

Schema LoadSchema(const std::filesystem::path& path) {
  return ParseSchema(ReadFile(path));
}

std::vector<std::string> ValidateState(const Schema& schema,
                                       const BeliefState& state) {
  std::vector<std::string> violations;
  for (const auto& [name, v] : state.entries) {
    auto idx = schema.FindSlot(name);
    if (!idx) {
      violations.push_back("unknown slot '" + name + "'");
      continue;
    }
    const SlotSpec& spec = schema.slot(*idx);
    switch (v.status) {
      case SlotStatus::kActive:
        if (v.value.empty()) {
          violations.push_back("active slot '" + name + "' has empty value");
        } else if (spec.categorical()) {
          bool found = false;
          for (const auto& c : spec.candidate_values) found |= (c == v.value);
          if (!found) {
            violations.push_back("value '" + v.value +
                                 "' is not a candidate of slot '" + name + "'");
          }
        }
        break;
      case SlotStatus::kDontCare:
      case SlotStatus::kInactive:
        if (!v.value.empty()) {
          violations.push_back(std::string(StatusName(v.status)) + " slot '" +
                               name + "' carries value '" + v.value + "'");
        }
        break;
    }
  }
  return violations;
}

std::vector<bool> ActiveDomains(const Schema& schema,
                                const BeliefState& state) {
  std::vector<bool> active(schema.num_domains(), false);
  for (const auto& [name, v] : state.entries) {
    if (v.status == SlotStatus::kInactive) continue;
    if (auto idx = schema.FindSlot(name)) active[schema.slot_domain(*idx)] = true;
  }
  return active;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace dstlab
