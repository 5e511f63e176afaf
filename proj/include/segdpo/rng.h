// Copyright 2026 The segdpo Authors
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

#ifndef SEGDPO_RNG_H_
#define SEGDPO_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace segdpo {

// SplitMix64 finalizer. Used to derive independent per-item streams from a
// master seed so that parallel and serial runs consume identical randomness.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t DeriveSeed(uint64_t master, std::initializer_list<uint64_t> path) {
  uint64_t s = Mix64(master);
  for (uint64_t p : path) s = Mix64(s ^ Mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits; independent of the standard
  // library's distribution implementations.
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n);

  // Index drawn from the normalized probability vector by inverse CDF.
  int Categorical(std::span<const double> probs);

  uint64_t Next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace segdpo

#endif  // SEGDPO_RNG_H_
