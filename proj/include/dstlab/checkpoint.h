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

#ifndef DSTLAB_CHECKPOINT_H_
#define DSTLAB_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "dstlab/dst_model.h"
#include "json.hpp"

namespace dstlab {

// Binary container: magic line, 8-byte little-endian header length, JSON
// header (config, schema, vocabulary, tensor table, `meta`), raw doubles.
std::string SerializeModel(const DstModel& model,
                           const nlohmann::json& meta = nlohmann::json::object());
DstModel DeserializeModel(std::string_view bytes, nlohmann::json* meta = nullptr);

void SaveModel(const std::filesystem::path& path, const DstModel& model,
               const nlohmann::json& meta = nlohmann::json::object());
DstModel LoadModel(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

}  // namespace dstlab

#endif  // DSTLAB_CHECKPOINT_H_
