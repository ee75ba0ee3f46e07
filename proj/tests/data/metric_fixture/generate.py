#!/usr/bin/env python3
#
# Copyright 2026 The dstlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Writes the 50-dialogue metric fixture and its hand-computed expectations.

Run from this directory: python3 generate.py
"""

import json
import random
from fractions import Fraction

SCHEMA = {
    "domains": ["hotel", "train", "taxi"],
    "slots": [
        {"name": "hotel-pricerange", "domain": "hotel", "kind": "categorical",
         "values": ["cheap", "moderate", "expensive"]},
        {"name": "hotel-area", "domain": "hotel", "kind": "categorical",
         "values": ["north", "south", "centre"]},
        {"name": "hotel-name", "domain": "hotel", "kind": "noncategorical"},
        {"name": "train-day", "domain": "train", "kind": "categorical",
         "values": ["monday", "friday", "sunday"]},
        {"name": "train-leaveat", "domain": "train", "kind": "noncategorical"},
        {"name": "taxi-destination", "domain": "taxi", "kind": "noncategorical"},
    ],
}
SPAN_VALUES = {
    "hotel-name": ["a and b guest house", "lovell lodge", "avalon"],
    "train-leaveat": ["14:19", "09:15", "17:45"],
    "taxi-destination": ["kings college", "the junction", "ely"],
}
LENGTHS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15]


def norm(v):
    return " ".join(v.lower().split())


def slot_names():
    return [s["name"] for s in SCHEMA["slots"]]


def sample_value(rng, slot):
    spec = next(s for s in SCHEMA["slots"] if s["name"] == slot)
    if spec["kind"] == "categorical":
        return rng.choice(spec["values"])
    return rng.choice(SPAN_VALUES[slot])


def make_dialogue(rng, idx):
    n = rng.choice(LENGTHS)
    turns, state = [], {}
    for t in range(n):
        speaker = "user" if t % 2 == 0 else "agent"
        turn = {"speaker": speaker, "text": f"utterance {t} of dialogue {idx}"}
        if speaker == "user":
            if rng.random() < 0.6:
                slot = rng.choice(slot_names())
                if rng.random() < 0.15:
                    state[slot] = {"status": "dontcare", "value": ""}
                else:
                    state[slot] = {"status": "active", "value": sample_value(rng, slot)}
            turn["state"] = {k: dict(v) for k, v in sorted(state.items())}
        turns.append(turn)
    return {"id": f"fx-{idx:02d}", "turns": turns}


def corrupt(rng, gold):
    """Returns a predicted state and a short note of the applied edit."""
    pred = {k: dict(v) for k, v in gold.items()}
    r = rng.random()
    if r < 0.45:
        return pred, "exact"
    slot = rng.choice(slot_names())
    g = gold.get(slot, {"status": "inactive", "value": ""})
    if r < 0.55 and g["status"] == "active":
        # Case and whitespace changes still match after normalization.
        pred[slot] = {"status": "active", "value": "  " + g["value"].upper() + " "}
        return pred, "case"
    if r < 0.7:
        options = [s for s in ("active", "dontcare", "inactive") if s != g["status"]]
        status = rng.choice(options)
        pred[slot] = {"status": status,
                      "value": sample_value(rng, slot) if status == "active" else ""}
        return pred, "status"
    if r < 0.85 and g["status"] == "active":
        spec = next(s for s in SCHEMA["slots"] if s["name"] == slot)
        pool = spec["values"] if spec["kind"] == "categorical" else SPAN_VALUES[slot]
        wrong = [v for v in pool if v != g["value"]]
        pred[slot] = {"status": "active", "value": rng.choice(wrong)}
        return pred, "value"
    return pred, "exact"


def full_state(state):
    out = {}
    for s in slot_names():
        v = state.get(s, {"status": "inactive", "value": ""})
        out[s] = {"status": v["status"], "value": v["value"]}
    return out


def turn_correct(pred, gold):
    for s in slot_names():
        p, g = pred[s], gold[s]
        if p["status"] != g["status"]:
            return False
        if g["status"] == "active" and norm(p["value"]) != norm(g["value"]):
            return False
    return True


def tally(rows):
    jga = [0, 0]
    status = [0, 0]
    cat = [0, 0]
    noncat = [0, 0]
    kinds = {s["name"]: s["kind"] for s in SCHEMA["slots"]}
    for pred, gold in rows:
        jga[1] += 1
        jga[0] += turn_correct(pred, gold)
        for s in slot_names():
            status[1] += 1
            status[0] += pred[s]["status"] == gold[s]["status"]
            if gold[s]["status"] != "active":
                continue
            ok = pred[s]["status"] == "active" and norm(pred[s]["value"]) == norm(gold[s]["value"])
            bucket = cat if kinds[s] == "categorical" else noncat
            bucket[1] += 1
            bucket[0] += ok
    return {"jga": jga, "status": status, "categorical": cat, "noncategorical": noncat,
            "turns": len(rows)}


def main():
    rng = random.Random(20240601)
    dialogues = [make_dialogue(rng, i) for i in range(50)]
    predictions, notes = [], {}
    per_dialogue = []
    for d in dialogues:
        rows = []
        for t, turn in enumerate(d["turns"]):
            if "state" not in turn:
                continue
            pred, note = corrupt(rng, turn["state"])
            notes[note] = notes.get(note, 0) + 1
            predictions.append({"dialogue_id": d["id"], "turn": t, "state": pred})
            rows.append((full_state(pred), full_state(turn["state"])))
        per_dialogue.append((len(d["turns"]), rows))

    lengths = sorted(n for n, _ in per_dialogue)
    n = len(lengths)
    short_max = min(L for L in lengths if Fraction(sum(x <= L for x in lengths), n) >= Fraction(3, 10))
    long_min = max(L for L in lengths if Fraction(sum(x >= L for x in lengths), n) >= Fraction(3, 10))

    def bucket(pred):
        rows = [r for L, rs in per_dialogue if pred(L) for r in rs]
        out = tally(rows)
        out["dialogues"] = sum(1 for L, _ in per_dialogue if pred(L))
        return out

    expected = {
        "thresholds": {"short_max_utts": short_max, "long_min_utts": long_min},
        "all": bucket(lambda L: True),
        "short": bucket(lambda L: L <= short_max),
        "long": bucket(lambda L: L >= long_min),
        "edits": notes,
    }

    with open("schema.json", "w") as f:
        json.dump(SCHEMA, f, indent=1)
    with open("dialogues.json", "w") as f:
        json.dump(dialogues, f, indent=1)
    with open("predictions.jsonl", "w") as f:
        for p in predictions:
            f.write(json.dumps(p) + "\n")
    with open("expected.json", "w") as f:
        json.dump(expected, f, indent=1)


if __name__ == "__main__":
    main()
