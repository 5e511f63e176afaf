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

#include "segdpo/rng.h"

#include "segdpo/error.h"

namespace segdpo {

uint64_t Rng::UniformInt(uint64_t n) {
  if (n == 0) Fail(ErrorKind::kArgument, "UniformInt needs n > 0");
  // Rejection sampling keeps the draw unbiased for any n.
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  for (;;) {
    const uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

int Rng::Categorical(std::span<const double> probs) {
  if (probs.empty()) Fail(ErrorKind::kArgument, "Categorical over an empty support");
  const double u = Uniform01();
  double acc = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = static_cast<int>(i);
    if (u < acc) return last_positive;
  }
  if (last_positive < 0) Fail(ErrorKind::kNumeric, "Categorical with no positive mass");
  // Rounding left the total a hair under one.
  return last_positive;
}

}  // namespace segdpo
