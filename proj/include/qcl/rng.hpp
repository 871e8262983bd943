/* Copyright 2026 The QCLand Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef QCL_RNG_HPP
#define QCL_RNG_HPP

#include <cstdint>
#include <random>

namespace qcl {

// Seed derivation is counter based: every consumer of randomness owns a
// named stream, and stream seeds are derived from the master seed with
// splitmix64 so that any single run/particle/generation is reproducible in
// isolation, independent of scheduling order.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a hash of a short tag, used to name derivation streams.
constexpr std::uint64_t stream_tag(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (; *s != '\0'; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001b3ULL;
  return h;
}

/// Derive a child seed from (master, stream, index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(stream ^ splitmix64(index)));
}

/// mt19937_64 with explicit uniform conversions so the produced doubles do
/// not depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Fair 0/1 draw.
  int coin() { return static_cast<int>(gen_() >> 63); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qcl

#endif  // QCL_RNG_HPP
