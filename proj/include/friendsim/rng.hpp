// Copyright 2026 The friendsim Authors
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

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace friendsim {

/// The one generator used for every sampled quantity (64-bit Mersenne twister).
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of independent stream `k` derived from a master seed:
/// splitmix64(master + k * golden-ratio increment). Stream 0 is not the master
/// seed itself, so a run and its first sub-stream never coincide.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t k) {
    return splitmix64(master + (k + 1) * 0x9e3779b97f4a7c15ULL);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index drawn with the given (non-negative) weights. A zero-weight index is
/// never returned.
inline std::size_t sample_index(std::span<const double> weights, Rng &rng) {
    double total = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] > 0.0) {
            total += weights[k];
            last_positive = k;
        }
    }
    double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] > 0.0) {
            acc += weights[k];
            if (u < acc) {
                return k;
            }
        }
    }
    return last_positive;
}

}  // namespace friendsim
