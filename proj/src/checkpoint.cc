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

#include "dstlab/checkpoint.h"

#include <cstring>

namespace dstlab {
namespace {

constexpr std::string_view kMagic = "DSTLAB-CKPT-1\n";

}  // namespace

std::string SerializeModel(const DstModel& model, const nlohmann::json& meta) {
  ModelWeights& w = const_cast<ModelWeights&>(model.weights);
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  std::string payload;
  ForEachTensor(w, [&](const std::string& name, Matrix& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    payload.append(reinterpret_cast<const char*>(m.data()),
                   static_cast<std::size_t>(m.size()) * sizeof(double));
  });
  nlohmann::ordered_json header;
  header["config"] = ModelConfigToJson(model.config);
  header["schema"] = model.schema.ToJson();
  header["vocab"] = model.tokenizer.VocabText();
  header["tensors"] = std::move(tensors);
  header["meta"] = meta;
  const std::string h = header.dump();
  std::string out(kMagic);
  std::uint64_t len = h.size();
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.append(buf, 8);
  out += h;
  out += payload;
  return out;
}

DstModel DeserializeModel(std::string_view bytes, nlohmann::json* meta) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw Error("not a dstlab checkpoint");
  bytes.remove_prefix(kMagic.size());
  if (bytes.size() < 8) throw Error("truncated checkpoint header");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)])) << (8 * i);
  }
  bytes.remove_prefix(8);
  if (bytes.size() < len) throw Error("truncated checkpoint header");
  const nlohmann::json header = nlohmann::json::parse(bytes.substr(0, len));
  bytes.remove_prefix(len);

  DstModel m;
  m.config = ModelConfigFromJson(header.at("config"));
  m.schema = SchemaFromJson(header.at("schema"));
  m.tokenizer = Tokenizer::FromVocabText(header.at("vocab").get<std::string>());
  Rng rng(0);
  m.weights.encoder = InitEncoder(m.config.encoder, rng);
  m.weights.heads = InitHeads(m.config.encoder.hidden_dim,
                              static_cast<int>(m.schema.num_domains()), rng);
  const auto& table = header.at("tensors");
  std::size_t index = 0;
  ForEachTensor(m.weights, [&](const std::string& name, Matrix& t) {
    if (index >= table.size() || table[index].at("name") != name) {
      throw Error("checkpoint tensor table does not match model layout at '" + name + "'");
    }
    if (table[index].at("rows").get<Eigen::Index>() != t.rows() ||
        table[index].at("cols").get<Eigen::Index>() != t.cols()) {
      throw Error("checkpoint tensor '" + name + "' has the wrong shape");
    }
    const std::size_t n = static_cast<std::size_t>(t.size()) * sizeof(double);
    if (bytes.size() < n) throw Error("truncated checkpoint payload");
    std::memcpy(t.data(), bytes.data(), n);
    bytes.remove_prefix(n);
    ++index;
  });
  if (index != table.size() || !bytes.empty()) {
    throw Error("checkpoint has trailing tensors or bytes");
  }
  if (meta != nullptr) *meta = header.value("meta", nlohmann::json::object());
  return m;
}

void SaveModel(const std::filesystem::path& path, const DstModel& model,
               const nlohmann::json& meta) {
  WriteFile(path, SerializeModel(model, meta));
}

DstModel LoadModel(const std::filesystem::path& path, nlohmann::json* meta) {
  return DeserializeModel(ReadFile(path), meta);
}

}  // namespace dstlab
