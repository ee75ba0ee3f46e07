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

#include "dstlab/synthetic.h"

#include <algorithm>
#include <optional>

#include "dstlab/rng.h"

namespace dstlab {
namespace {

using Strings = std::vector<std::string>;

const Strings kDays = {"monday", "tuesday", "wednesday", "thursday",
                       "friday", "saturday", "sunday"};
const Strings kPeople = {"1", "2", "3", "4", "5", "6", "7", "8"};
const Strings kAreas = {"north", "south", "east", "west", "centre"};
const Strings kPrices = {"cheap", "moderate", "expensive"};

SlotSpec Cat(std::string name, std::string domain, Strings values) {
  return SlotSpec{std::move(name), SlotKind::kCategorical, std::move(values),
                  std::move(domain)};
}

SlotSpec NonCat(std::string name, std::string domain) {
  return SlotSpec{std::move(name), SlotKind::kNonCategorical, {},
                  std::move(domain)};
}

Strings Times() {
  Strings out;
  const char* minutes[] = {"00", "15", "19", "30", "38", "45", "50"};
  for (int h = 6; h <= 22; ++h) {
    for (const char* m : minutes) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "%02d:%s", h, m);
      out.push_back(buf);
    }
  }
  return out;
}

const std::string& Pick(Rng& rng, const Strings& options) {
  if (options.empty()) throw Error("cannot sample from an empty template list");
  return options[static_cast<std::size_t>(
      UniformInt(rng, 0, static_cast<std::int64_t>(options.size()) - 1))];
}

std::string Fill(std::string text, const std::string& label,
                 const std::string& value) {
  auto replace = [&](const std::string& key, const std::string& with) {
    for (auto pos = text.find(key); pos != std::string::npos;
         pos = text.find(key, pos + with.size())) {
      text.replace(pos, key.size(), with);
    }
  };
  replace("{label}", label);
  replace("{value}", value);
  return text;
}

std::string DefaultLabel(const std::string& slot_name) {
  auto dash = slot_name.find('-');
  std::string suffix =
      dash == std::string::npos ? slot_name : slot_name.substr(dash + 1);
  static const std::map<std::string, std::string> kKnown = {
      {"pricerange", "price range"}, {"leaveat", "departure time"},
      {"arriveby", "arrival time"},  {"people", "number of people"},
      {"stars", "star rating"},      {"departure", "departure point"}};
  auto it = kKnown.find(suffix);
  return it == kKnown.end() ? suffix : it->second;
}

Strings ToStrings(const nlohmann::json& j) {
  Strings out;
  for (const auto& s : j) out.push_back(s.get<std::string>());
  return out;
}

std::map<std::string, Strings> ToStringMap(const nlohmann::json& j) {
  std::map<std::string, Strings> out;
  for (const auto& [k, v] : j.items()) out[k] = ToStrings(v);
  return out;
}

// Per-dialogue generation state.
class DialogueBuilder {
 public:
  DialogueBuilder(const SynthConfig& config, Rng& rng)
      : config_(config), schema_(config.schema), rng_(rng) {}

  Dialogue Build(std::string id) {
    Dialogue d;
    d.id = std::move(id);
    const std::size_t num_domains = schema_.num_domains();
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < num_domains; ++i) {
      if (!schema_.domain_slots(i).empty()) usable.push_back(i);
    }
    const std::size_t first = usable[static_cast<std::size_t>(
        UniformInt(rng_, 0, static_cast<std::int64_t>(usable.size()) - 1))];
    std::optional<std::size_t> second;
    if (usable.size() > 1 && Bernoulli(rng_, config_.domain_switch_prob)) {
      std::size_t k = static_cast<std::size_t>(
          UniformInt(rng_, 0, static_cast<std::int64_t>(usable.size()) - 2));
      std::vector<std::size_t> others;
      for (std::size_t u : usable) {
        if (u != first) others.push_back(u);
      }
      second = others[k];
    }
    const int num_user_turns = static_cast<int>(
        UniformInt(rng_, config_.min_user_turns, config_.max_user_turns));
    int switch_turn = num_user_turns;
    if (second) {
      switch_turn =
          num_user_turns == 1
              ? 0
              : static_cast<int>(UniformInt(rng_, 1, num_user_turns - 1));
    }
    for (std::size_t dom : {first, second.value_or(first)}) {
      Strings& remaining = remaining_[dom];
      if (!remaining.empty()) continue;
      for (std::size_t s : schema_.domain_slots(dom)) {
        remaining.push_back(schema_.slot(s).name);
      }
      std::shuffle(remaining.begin(), remaining.end(), rng_);
    }

    for (int t = 0; t < num_user_turns; ++t) {
      const bool in_second = second && t >= switch_turn;
      const std::size_t dom = in_second ? *second : first;
      Strings parts;
      if (t == 0) {
        parts.push_back(Intro(first));
        parts.push_back(Inform(first, 1 + Coin(0.5)));
        if (second && switch_turn == 0) {
          parts.push_back(Intro(*second));
          parts.push_back(Inform(*second, 1));
        }
      } else if (second && t == switch_turn) {
        parts.push_back(Intro(dom));
        parts.push_back(Inform(dom, 1 + Coin(0.5)));
      } else {
        UserFollowUp(dom, parts);
      }
      if (t > 0 && Coin(config_.chitchat_prob)) {
        parts.push_back(Pick(rng_, config_.templates.chitchat));
      }
      Turn user;
      user.speaker = Speaker::kUser;
      user.text = Join(parts);
      user.gold_state = state_;
      d.turns.push_back(std::move(user));

      Turn agent;
      agent.speaker = Speaker::kAgent;
      agent.text = AgentReply(dom);
      d.turns.push_back(std::move(agent));
    }
    return d;
  }

 private:
  bool Coin(double p) { return Bernoulli(rng_, p); }

  std::string Label(const std::string& slot) const {
    auto it = config_.templates.labels.find(slot);
    return it == config_.templates.labels.end() ? DefaultLabel(slot)
                                                : it->second;
  }

  std::string Intro(std::size_t dom) {
    auto it = config_.templates.domain_intro.find(schema_.domains()[dom]);
    if (it == config_.templates.domain_intro.end() || it->second.empty()) {
      return "i need help with a " + schema_.domains()[dom];
    }
    return Pick(rng_, it->second);
  }

  std::string SampleValue(const std::string& slot,
                          const std::string& avoid = {}) {
    const SlotSpec& spec = schema_.slot(*schema_.FindSlot(slot));
    const Strings* options = &spec.candidate_values;
    if (!spec.categorical()) {
      auto it = config_.value_pools.find(slot);
      if (it == config_.value_pools.end() || it->second.empty()) {
        throw Error("no value pool for non-categorical slot '" + slot + "'");
      }
      options = &it->second;
    }
    for (int attempt = 0; attempt < 16; ++attempt) {
      const std::string& v = Pick(rng_, *options);
      if (v != avoid) return v;
    }
    return Pick(rng_, *options);
  }

  std::string InformPhrase(const std::string& slot, const std::string& value) {
    auto it = config_.templates.slot_inform.find(slot);
    const std::string& tmpl =
        (it != config_.templates.slot_inform.end() && !it->second.empty())
            ? Pick(rng_, it->second)
            : Pick(rng_, config_.templates.generic_inform);
    return Fill(tmpl, Label(slot), value);
  }

  // Activates up to `count` not-yet-mentioned slots of the domain.
  std::string Inform(std::size_t dom, int count) {
    Strings phrases;
    Strings& remaining = remaining_[dom];
    for (int i = 0; i < count && !remaining.empty(); ++i) {
      std::string slot = remaining.back();
      remaining.pop_back();
      std::string value = SampleValue(slot);
      phrases.push_back(InformPhrase(slot, value));
      state_.Set(slot, SlotStatus::kActive, value);
    }
    if (phrases.empty()) return Pick(rng_, config_.templates.chitchat);
    std::string out = phrases[0];
    for (std::size_t i = 1; i < phrases.size(); ++i) out += " and " + phrases[i];
    return out;
  }

  void UserFollowUp(std::size_t dom, Strings& parts) {
    if (pending_offer_) {
      auto [slot, value] = *pending_offer_;
      pending_offer_.reset();
      if (Coin(config_.accept_prob)) {
        parts.push_back(Pick(rng_, config_.templates.user_accept));
        state_.Set(slot, SlotStatus::kActive, value);
        std::erase(remaining_[dom], slot);
        if (Coin(0.4)) parts.push_back(Inform(dom, 1));
        return;
      }
      parts.push_back(Pick(rng_, config_.templates.user_reject));
    }
    Strings& remaining = remaining_[dom];
    if (Coin(config_.revision_prob)) {
      Strings revisable;
      for (std::size_t s : schema_.domain_slots(dom)) {
        const std::string& name = schema_.slot(s).name;
        if (state_.Get(name).status == SlotStatus::kActive) {
          revisable.push_back(name);
        }
      }
      if (!revisable.empty()) {
        const std::string slot = Pick(rng_, revisable);
        const std::string value = SampleValue(slot, state_.Get(slot).value);
        parts.push_back(
            Fill(Pick(rng_, config_.templates.revision), Label(slot), value));
        state_.Set(slot, SlotStatus::kActive, value);
        return;
      }
    }
    if (!remaining.empty() && Coin(config_.dontcare_prob)) {
      std::string slot = remaining.back();
      remaining.pop_back();
      parts.push_back(Fill(Pick(rng_, config_.templates.dontcare), Label(slot),
                           std::string()));
      state_.Set(slot, SlotStatus::kDontCare);
      return;
    }
    if (remaining.empty() || Coin(config_.chitchat_prob)) {
      parts.push_back(Pick(rng_, config_.templates.chitchat));
      return;
    }
    parts.push_back(Inform(dom, 1 + Coin(0.35)));
  }

  std::string AgentReply(std::size_t dom) {
    const TemplateBank& bank = config_.templates;
    if (Coin(config_.offer_prob)) {
      Strings offerable;
      for (std::size_t s : schema_.domain_slots(dom)) {
        const std::string& name = schema_.slot(s).name;
        auto it = bank.agent_offer.find(name);
        if (it != bank.agent_offer.end() && !it->second.empty() &&
            state_.Get(name).status == SlotStatus::kInactive) {
          offerable.push_back(name);
        }
      }
      if (!offerable.empty()) {
        const std::string slot = Pick(rng_, offerable);
        const std::string value = SampleValue(slot);
        pending_offer_ = std::make_pair(slot, value);
        return Fill(Pick(rng_, bank.agent_offer.at(slot)), Label(slot), value);
      }
    }
    const Strings& remaining = remaining_[dom];
    if (!remaining.empty() && Coin(0.6)) {
      return Fill(Pick(rng_, bank.agent_request), Label(remaining.back()), "");
    }
    return Pick(rng_, bank.agent_generic);
  }

  static std::string Join(const Strings& parts) {
    std::string out;
    for (const std::string& p : parts) {
      if (p.empty()) continue;
      if (!out.empty()) out += " . ";
      out += p;
    }
    return out + " .";
  }

  const SynthConfig& config_;
  const Schema& schema_;
  Rng& rng_;
  BeliefState state_;
  std::map<std::size_t, Strings> remaining_;
  std::optional<std::pair<std::string, std::string>> pending_offer_;
};

}  // namespace

bool TemplateBank::empty() const {
  return slot_inform.empty() && generic_inform.empty();
}

Schema DefaultSynthSchema() {
  std::vector<SlotSpec> slots = {
      Cat("hotel-pricerange", "hotel", kPrices),
      Cat("hotel-area", "hotel", kAreas),
      Cat("hotel-stars", "hotel", {"1", "2", "3", "4", "5"}),
      Cat("hotel-type", "hotel", {"hotel", "guest house"}),
      Cat("hotel-day", "hotel", kDays),
      Cat("hotel-people", "hotel", kPeople),
      NonCat("hotel-name", "hotel"),
      Cat("restaurant-pricerange", "restaurant", kPrices),
      Cat("restaurant-area", "restaurant", kAreas),
      Cat("restaurant-food", "restaurant",
          {"chinese", "italian", "indian", "british", "thai", "french",
           "mexican", "japanese"}),
      Cat("restaurant-day", "restaurant", kDays),
      Cat("restaurant-people", "restaurant", kPeople),
      NonCat("restaurant-time", "restaurant"),
      NonCat("restaurant-name", "restaurant"),
      Cat("train-day", "train", kDays),
      Cat("train-people", "train", kPeople),
      NonCat("train-departure", "train"),
      NonCat("train-destination", "train"),
      NonCat("train-leaveat", "train"),
      NonCat("train-arriveby", "train"),
      NonCat("taxi-departure", "taxi"),
      NonCat("taxi-destination", "taxi"),
      NonCat("taxi-leaveat", "taxi"),
      NonCat("taxi-arriveby", "taxi"),
      Cat("attraction-area", "attraction", kAreas),
      Cat("attraction-type", "attraction",
          {"museum", "park", "theatre", "college", "nightclub", "church"}),
      NonCat("attraction-name", "attraction"),
  };
  return Schema({"hotel", "restaurant", "train", "taxi", "attraction"},
                std::move(slots));
}

SynthConfig DefaultSynthConfig() {
  SynthConfig c;
  c.schema = DefaultSynthSchema();
  const Strings places = {"cambridge",       "london kings cross",
                          "peterborough",    "birmingham new street",
                          "ely",             "norwich",
                          "stansted airport", "bishops stortford",
                          "leicester",       "stevenage",
                          "kings lynn",      "broxbourne"};
  const Strings venues = {"the junction",      "kings college",
                          "gonville hotel",    "the nirala",
                          "cambridge station", "acorn guest house",
                          "pizza hut city centre", "whipple museum",
                          "lovell lodge",      "curry garden"};
  const Strings times = Times();
  c.value_pools = {
      {"hotel-name",
       {"a and b guest house", "acorn guest house",
        "alexander bed and breakfast", "allenbell", "ashley hotel", "avalon",
        "bridge guest house", "el shaddai", "gonville hotel", "hamilton lodge",
        "huntingdon marriott hotel", "lovell lodge", "university arms hotel",
        "warkworth house", "worth house", "express by holiday inn"}},
      {"restaurant-name",
       {"pizza hut city centre", "golden wok", "the nirala", "curry garden",
        "la margherita", "meghna", "the gardenia", "saint johns chop house",
        "royal spice", "da vinci pizzeria", "yippee noodle bar", "hotpot",
        "the copper kettle", "bedouin"}},
      {"restaurant-time", times},
      {"train-departure", places},
      {"train-destination", places},
      {"train-leaveat", times},
      {"train-arriveby", times},
      {"taxi-departure", venues},
      {"taxi-destination", venues},
      {"taxi-leaveat", times},
      {"taxi-arriveby", times},
      {"attraction-name",
       {"kings college", "fitzwilliam museum", "cherry hinton water play",
        "the junction", "all saints church", "byard art",
        "scudamores punting co", "whipple museum", "the place", "clare hall",
        "cambridge arts theatre", "ballare"}},
  };

  TemplateBank& b = c.templates;
  b.domain_intro = {
      {"hotel",
       {"i am looking for a hotel", "i need a place to stay",
        "can you help me find somewhere to stay"}},
      {"restaurant",
       {"i am looking for a restaurant", "i want to find a place to eat",
        "can you recommend a restaurant"}},
      {"train",
       {"i need a train", "can you help me find a train",
        "i am looking for a train ticket"}},
      {"taxi", {"i need a taxi", "please book a taxi for me",
                "can you get me a cab"}},
      {"attraction",
       {"i want to visit an attraction", "what is there to see in town",
        "i am looking for something to do"}},
  };
  b.slot_inform = {
      {"hotel-pricerange",
       {"in the {value} price range", "it should be {value}"}},
      {"hotel-area", {"in the {value} of town", "located in the {value}"}},
      {"hotel-stars", {"with a {value} star rating", "it should have {value} stars"}},
      {"hotel-type", {"it should be a {value}", "i prefer a {value}"}},
      {"hotel-day", {"checking in on {value}", "starting from {value}"}},
      {"hotel-people", {"for {value} guests", "there will be {value} of us staying"}},
      {"hotel-name", {"i am interested in {value}", "the hotel is called {value}"}},
      {"restaurant-pricerange",
       {"with {value} prices", "the price range should be {value}"}},
      {"restaurant-area", {"in the {value} area", "somewhere in the {value}"}},
      {"restaurant-food", {"serving {value} food", "i want {value} cuisine"}},
      {"restaurant-day", {"a table on {value}", "we will dine on {value}"}},
      {"restaurant-people", {"a table for {value}", "for {value} diners"}},
      {"restaurant-time", {"at {value}", "reserve it for {value}"}},
      {"restaurant-name", {"i want to eat at {value}", "the restaurant is called {value}"}},
      {"train-day", {"travelling on {value}", "the journey is on {value}"}},
      {"train-people", {"{value} tickets please", "book seats for {value} people"}},
      {"train-departure", {"leaving from {value}", "departing from {value}"}},
      {"train-destination", {"going to {value}", "travelling to {value}"}},
      {"train-leaveat", {"leaving after {value}", "departing at {value}"}},
      {"train-arriveby", {"arriving by {value}", "it should arrive by {value}"}},
      {"taxi-departure", {"pick me up from {value}", "starting at {value}"}},
      {"taxi-destination", {"take me to {value}", "my destination is {value}"}},
      {"taxi-leaveat", {"i want to leave at {value}", "pick me up after {value}"}},
      {"taxi-arriveby", {"i must get there by {value}", "arrive no later than {value}"}},
      {"attraction-area", {"in the {value} part of the city", "around the {value}"}},
      {"attraction-type", {"maybe a {value}", "i would like to see a {value}"}},
      {"attraction-name", {"tell me about {value}", "i want to go to {value}"}},
  };
  b.generic_inform = {"the {label} should be {value}", "{label} : {value}"};
  b.dontcare = {"i do not care about the {label}", "any {label} is fine"};
  b.revision = {"actually , change the {label} to {value}",
                "sorry , i meant {value} for the {label}"};
  b.chitchat = {"thanks a lot",
                "that is great to hear",
                "i am visiting my family this week",
                "the weather is lovely today",
                "my friend recommended this service",
                "i hope it is not too busy",
                "this is my first time here",
                "i have been travelling all day"};
  b.agent_request = {"what {label} would you like ?",
                     "do you have a preferred {label} ?",
                     "could you tell me the {label} ?"};
  b.agent_offer = {
      {"hotel-name", {"there is {value} , would that work ?",
                      "i recommend {value} , it is very popular ."}},
      {"restaurant-name", {"how about {value} ?", "{value} has a free table ."}},
      {"attraction-name", {"you could visit {value} .", "{value} is worth a look ."}},
      {"train-leaveat", {"i have a train leaving at {value} , shall i book it ?",
                         "there is one that departs at {value} ."}},
  };
  b.agent_generic = {"is there anything else i can help you with ?",
                     "okay , let me check that for you .",
                     "sure , one moment please .",
                     "i have several options available ."};
  b.user_accept = {"that sounds good", "yes please book that",
                   "great , that works for me"};
  b.user_reject = {"no , i would like something else",
                   "hmm , not that one"};
  return c;
}

nlohmann::ordered_json SynthConfigToJson(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["num_dialogues"] = c.num_dialogues;
  j["schema"] = c.schema.ToJson();
  j["value_pools"] = c.value_pools;
  j["min_user_turns"] = c.min_user_turns;
  j["max_user_turns"] = c.max_user_turns;
  j["domain_switch_prob"] = c.domain_switch_prob;
  j["chitchat_prob"] = c.chitchat_prob;
  j["dontcare_prob"] = c.dontcare_prob;
  j["revision_prob"] = c.revision_prob;
  j["offer_prob"] = c.offer_prob;
  j["accept_prob"] = c.accept_prob;
  j["train_fraction"] = c.train_fraction;
  j["dev_fraction"] = c.dev_fraction;
  const TemplateBank& b = c.templates;
  nlohmann::ordered_json t;
  t["domain_intro"] = b.domain_intro;
  t["slot_inform"] = b.slot_inform;
  t["generic_inform"] = b.generic_inform;
  t["dontcare"] = b.dontcare;
  t["revision"] = b.revision;
  t["chitchat"] = b.chitchat;
  t["agent_request"] = b.agent_request;
  t["agent_offer"] = b.agent_offer;
  t["agent_generic"] = b.agent_generic;
  t["user_accept"] = b.user_accept;
  t["user_reject"] = b.user_reject;
  t["labels"] = b.labels;
  j["templates"] = std::move(t);
  return j;
}

SynthConfig SynthConfigFromJson(const nlohmann::json& j,
                                const std::filesystem::path& base_dir) {
  SynthConfig c = DefaultSynthConfig();
  try {
    if (j.contains("schema")) {
      const auto& js = j.at("schema");
      c.schema = js.is_string() ? LoadSchema(base_dir / js.get<std::string>())
                                : SchemaFromJson(js);
    }
    if (j.contains("value_pools")) c.value_pools = ToStringMap(j.at("value_pools"));
    c.num_dialogues = j.value("num_dialogues", c.num_dialogues);
    c.min_user_turns = j.value("min_user_turns", c.min_user_turns);
    c.max_user_turns = j.value("max_user_turns", c.max_user_turns);
    c.domain_switch_prob = j.value("domain_switch_prob", c.domain_switch_prob);
    c.chitchat_prob = j.value("chitchat_prob", c.chitchat_prob);
    c.dontcare_prob = j.value("dontcare_prob", c.dontcare_prob);
    c.revision_prob = j.value("revision_prob", c.revision_prob);
    c.offer_prob = j.value("offer_prob", c.offer_prob);
    c.accept_prob = j.value("accept_prob", c.accept_prob);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.dev_fraction = j.value("dev_fraction", c.dev_fraction);
    if (j.contains("templates")) {
      const auto& t = j.at("templates");
      TemplateBank b;
      auto list = [&](const char* key) {
        return t.contains(key) ? ToStrings(t.at(key)) : Strings{};
      };
      auto map = [&](const char* key) {
        return t.contains(key) ? ToStringMap(t.at(key))
                               : std::map<std::string, Strings>{};
      };
      b.domain_intro = map("domain_intro");
      b.slot_inform = map("slot_inform");
      b.generic_inform = list("generic_inform");
      b.dontcare = list("dontcare");
      b.revision = list("revision");
      b.chitchat = list("chitchat");
      b.agent_request = list("agent_request");
      b.agent_offer = map("agent_offer");
      b.agent_generic = list("agent_generic");
      b.user_accept = list("user_accept");
      b.user_reject = list("user_reject");
      if (t.contains("labels")) {
        for (const auto& [k, v] : t.at("labels").items()) {
          b.labels[k] = v.get<std::string>();
        }
      }
      c.templates = std::move(b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed synth config: ") + e.what());
  }
  return c;
}

Corpus GenerateSynthetic(const SynthConfig& config, std::uint64_t seed) {
  if (config.schema.num_slots() == 0) throw Error("schema has no slots");
  if (config.templates.empty()) throw Error("template bank is empty");
  const TemplateBank& b = config.templates;
  if (b.chitchat.empty() || b.agent_generic.empty() || b.agent_request.empty() ||
      b.dontcare.empty() || b.revision.empty() || b.user_accept.empty() ||
      b.user_reject.empty()) {
    throw Error("template bank is missing required template lists");
  }
  if (config.min_user_turns < 1 || config.max_user_turns < config.min_user_turns) {
    throw Error("invalid user-turn range");
  }
  Corpus corpus;
  corpus.schema = config.schema;
  corpus.split = Split::kTrain;
  corpus.dialogues.reserve(config.num_dialogues);
  for (std::size_t i = 0; i < config.num_dialogues; ++i) {
    Rng rng(DeriveSeed(DeriveSeed(seed, "synthetic"), i));
    DialogueBuilder builder(config, rng);
    corpus.dialogues.push_back(builder.Build(
        "synth-" + std::to_string(seed) + "-" + std::to_string(i)));
  }
  return corpus;
}

CorpusSplits SplitCorpus(const Corpus& corpus, double train_fraction,
                         double dev_fraction) {
  if (train_fraction < 0 || dev_fraction < 0 ||
      train_fraction + dev_fraction > 1.0) {
    throw Error("invalid split fractions");
  }
  const std::size_t n = corpus.dialogues.size();
  const auto n_train = static_cast<std::size_t>(train_fraction * n + 0.5);
  const auto n_dev =
      std::min(n - n_train, static_cast<std::size_t>(dev_fraction * n + 0.5));
  CorpusSplits out;
  for (Corpus* c : {&out.train, &out.dev, &out.test}) c->schema = corpus.schema;
  out.train.split = Split::kTrain;
  out.dev.split = Split::kDev;
  out.test.split = Split::kTest;
  for (std::size_t i = 0; i < n; ++i) {
    Corpus& dst = i < n_train ? out.train
                  : i < n_train + n_dev ? out.dev
                                        : out.test;
    dst.dialogues.push_back(corpus.dialogues[i]);
  }
  return out;
}

std::vector<std::string> GenerateAuxiliaryUtterances(std::size_t count,
                                                     std::uint64_t seed) {
  const Strings cities = {"paris", "boston", "tokyo", "berlin", "denver",
                          "madrid", "seattle", "dublin"};
  const Strings genres = {"comedy", "horror", "jazz", "rock", "drama",
                          "classical", "action"};
  const Strings numbers = {"two", "three", "four", "five", "ten", "twenty"};
  const Strings templates = {
      "i want to book a flight to {city} on {day}",
      "is there a direct flight from {city} to {city2} ?",
      "can you find me a {genre} movie playing on {day} night",
      "i would like {num} tickets for the evening show",
      "what is the balance on my checking account ?",
      "please transfer {num} dollars to my savings",
      "play some {genre} music for me",
      "will it rain in {city} on {day} ?",
      "set an alarm for {num} in the morning",
      "i need to rent a car in {city} for {num} days",
      "book me a table at a sushi bar in {city}",
      "how long is the flight to {city} ?",
      "my card was declined at the store yesterday",
      "remind me to call my mother on {day}",
      "what time does the pharmacy close on {day} ?",
      "i would like to change my seat to the aisle",
      "can i bring my dog on the bus to {city} ?",
      "thank you so much for the help",
      "sorry , could you repeat that ?",
      "i think that is all for today",
      "do you know a good {genre} concert this weekend ?",
      "the last time i went to {city} it was freezing",
  };
  Rng rng = MakeRng(seed, "auxiliary");
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string s = Pick(rng, templates);
    const std::string city = Pick(rng, cities);
    std::string city2 = Pick(rng, cities);
    auto replace = [&](const std::string& key, const std::string& with) {
      for (auto pos = s.find(key); pos != std::string::npos;
           pos = s.find(key, pos + with.size())) {
        s.replace(pos, key.size(), with);
      }
    };
    replace("{city2}", city2);
    replace("{city}", city);
    replace("{day}", Pick(rng, kDays));
    replace("{genre}", Pick(rng, genres));
    replace("{num}", Pick(rng, numbers));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dstlab
