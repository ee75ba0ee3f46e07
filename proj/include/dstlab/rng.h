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

#ifndef DSTLAB_RNG_H_
#define DSTLAB_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace dstlab {

using Rng = std::mt19937_64;

// Derives an independent seed for a named sub-stream of a root seed, so that
// corpus, perturbation, init and masking randomness never interfere.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view stream);
std::uint64_t DeriveSeed(std::uint64_t root, std::uint64_t index);

inline Rng MakeRng(std::uint64_t root, std::string_view stream) {
  return Rng(DeriveSeed(root, stream));
}

double Uniform01(Rng& rng);
bool Bernoulli(Rng& rng, double p);
// Uniform integer in [lo, hi].
std::int64_t UniformInt(Rng& rng, std::int64_t lo, std::int64_t hi);
double Normal(Rng& rng, double mean, double stddev);

}  // namespace dstlab

#endif  // DSTLAB_RNG_H_
