// Copyright 2026 The idmpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IDMPF__RNG_HPP_
#define IDMPF__RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace idmpf
{

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for an independent stream, e.g. one per vehicle. Order-independent by construction.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t key)
{
  return mix64(mix64(root) ^ mix64(key + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t key, std::uint64_t salt)
{
  return derive_seed(derive_seed(root, salt), key);
}

/// FNV-1a, for mixing string keys such as scenario ids into seeds.
inline std::uint64_t hash_key(std::string_view key)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return h;
}

/// U[0, 1) from the top 53 bits; stable across standard library implementations.
template <class Engine>
double uniform01(Engine & engine)
{
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; stable across standard library implementations.
template <class Engine>
std::uint64_t uniform_index(Engine & engine, std::uint64_t n)
{
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t draw = engine();
  while (draw >= limit) {
    draw = engine();
  }
  return draw % n;
}

}  // namespace idmpf

#endif  // IDMPF__RNG_HPP_
