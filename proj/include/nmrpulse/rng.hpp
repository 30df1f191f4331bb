// Copyright 2026 The nmrpulse Authors.
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

// Counter-based random streams. Every draw is a pure function of
// (master seed, path, counter), so results never depend on evaluation order
// or on how work is split across threads.

#pragma once

#include <cstdint>

namespace nmrpulse::rng {

/// Tags separating independent consumers of randomness.
enum class Domain : std::uint64_t {
  kGates = 1,
  kValidationGates = 2,
  kInit = 3,
  kDropout = 4,
  kShuffle = 5,
  kScenario = 6,
  kSweep = 7,
  kSweepGates = 8,
};

/// One addressable stream: identical (seed, path) gives identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t a = 0, std::uint64_t b = 0,
            std::uint64_t c = 0, std::uint64_t d = 0);

  /// Child stream keyed by one more path component.
  RngStream child(std::uint64_t index) const;

  /// Raw 64-bit value at `counter`.
  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const;
  /// Standard normal via Box–Muller on counters (2k, 2k+1).
  double normal(std::uint64_t counter) const;

  std::uint64_t key() const noexcept { return key_; }

 private:
  struct FromKey {};
  RngStream(FromKey, std::uint64_t key) : key_(key) {}
  std::uint64_t key_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace nmrpulse::rng
