/*
 * Copyright 2026 The IOBBA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef IOBBA_RANDOM_H_
#define IOBBA_RANDOM_H_

#include <cstdint>
#include <random>

namespace iobba {

// Seeded generator whose output sequence is fixed across compilers and
// standard libraries. std::mt19937_64 is fully specified by the standard;
// the std::*_distribution adaptors are not, so the transforms live here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via the polar Box-Muller method.
  double normal();

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

  // Index in [0, n).
  uint64_t below(uint64_t n);

  uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace iobba

#endif  // IOBBA_RANDOM_H_
