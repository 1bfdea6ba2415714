// Copyright 2026 The wcfa Authors
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

#ifndef WCFA_RNG_HPP_
#define WCFA_RNG_HPP_

#include <array>
#include <cstdint>

namespace wcfa {

/// Counter-based random stream built on Philox4x32-10.
///
/// A stream is identified by a 64-bit key and a 64-bit stream id; the key
/// selects the permutation and the stream id occupies the upper half of the
/// 128-bit counter, so streams sharing a key never overlap. `split(i)` derives
/// the i-th child stream, which is how parallel tasks obtain independent,
/// reproducible randomness regardless of how many threads run them.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  RngStream split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  double standard_normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }

  using Block = std::array<std::uint32_t, 4>;
  static Block philox4x32_10(Block counter, std::uint64_t key);

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  int buffered_ = 0;  // remaining 32-bit words in buffer_
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wcfa

#endif  // WCFA_RNG_HPP_
