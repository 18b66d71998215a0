// Copyright 2026 The bbcsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbc {

using ProcessId = std::uint32_t;
using Round     = std::uint32_t;
using Bytes     = std::vector<std::uint8_t>;
using ByteView  = std::span<const std::uint8_t>;
using Digest    = std::array<std::uint8_t, 32>;

/// Per-instance domain separator mixed into every signed payload.
using InstanceTag = std::array<std::uint8_t, 32>;

enum class Bin : std::uint8_t
{
  zero = 0,
  one  = 1,
};

constexpr Bin negate(Bin b) noexcept
{
  return b == Bin::zero ? Bin::one : Bin::zero;
}

constexpr Bin bin_of(bool bit) noexcept
{
  return bit ? Bin::one : Bin::zero;
}

constexpr int to_int(Bin b) noexcept
{
  return static_cast<int>(b);
}

/// Value carried by an AUX vote. `c_val` stands for "whatever the previous
/// round's coin turns out to be" and only appears with combined messages.
enum class AuxValue : std::uint8_t
{
  zero  = 0,
  one   = 1,
  c_val = 2,
};

constexpr AuxValue to_aux(Bin b) noexcept
{
  return static_cast<AuxValue>(b);
}

constexpr std::optional<Bin> to_bin(AuxValue v) noexcept
{
  if (v == AuxValue::c_val)
  {
    return std::nullopt;
  }
  return static_cast<Bin>(v);
}

std::string to_string(Bin b);
std::string to_string(AuxValue v);

/// System size and fault bound. Construction enforces n >= 3t + 1.
struct Params
{
  std::uint32_t n = 0;
  std::uint32_t t = 0;

  static Params make(std::uint32_t n, std::uint32_t t);

  /// n - t: the quorum used by every wait and by the coin threshold.
  constexpr std::uint32_t quorum() const noexcept
  {
    return n - t;
  }

  /// t + 1: enough signers to include at least one non-faulty process.
  constexpr std::uint32_t weak_quorum() const noexcept
  {
    return t + 1;
  }

  bool operator==(Params const &) const = default;
};

constexpr std::uint32_t max_faults(std::uint32_t n) noexcept
{
  return n == 0 ? 0 : (n - 1) / 3;
}

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

class MalformedMessage : public Error
{
public:
  using Error::Error;
};

class ProtocolError : public Error
{
public:
  using Error::Error;
};

/// Fixed-capacity bitset of process indices with a cached population count.
class SignerSet
{
public:
  SignerSet() = default;
  explicit SignerSet(std::uint32_t n);

  /// Returns true if `id` was not present before.
  bool insert(ProcessId id);
  bool contains(ProcessId id) const;
  std::uint32_t size() const noexcept
  {
    return count_;
  }
  std::uint32_t capacity() const noexcept
  {
    return capacity_;
  }

  /// Members in ascending order.
  std::vector<ProcessId> members() const;

  SignerSet &operator|=(SignerSet const &other);

  bool operator==(SignerSet const &) const = default;

private:
  std::vector<std::uint64_t> words_;
  std::uint32_t              capacity_ = 0;
  std::uint32_t              count_    = 0;
};

/// SplitMix64 finalizer; the project's only seed-derivation primitive.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept
{
  return mix64(mix64(base ^ mix64(a)) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

std::string to_hex(ByteView bytes);
Bytes       from_hex(std::string_view hex);

}  // namespace bbc
