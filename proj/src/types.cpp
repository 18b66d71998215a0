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

#include "bbc/types.hpp"

#include <bit>

namespace bbc {

std::string to_string(Bin b)
{
  return b == Bin::zero ? "0" : "1";
}

std::string to_string(AuxValue v)
{
  switch (v)
  {
  case AuxValue::zero:
    return "0";
  case AuxValue::one:
    return "1";
  case AuxValue::c_val:
    return "c_val";
  }
  return "?";
}

Params Params::make(std::uint32_t n, std::uint32_t t)
{
  if (n == 0)
  {
    throw ConfigError("process count must be positive");
  }
  if (n < 3 * t + 1)
  {
    throw ConfigError("fault bound violates n >= 3t + 1 (n=" + std::to_string(n) +
                      ", t=" + std::to_string(t) + ")");
  }
  return Params{n, t};
}

SignerSet::SignerSet(std::uint32_t n)
  : words_((n + 63) / 64, 0)
  , capacity_{n}
{}

bool SignerSet::insert(ProcessId id)
{
  if (id >= capacity_)
  {
    return false;
  }
  auto &word = words_[id / 64];
  auto  mask = std::uint64_t{1} << (id % 64);
  if ((word & mask) != 0)
  {
    return false;
  }
  word |= mask;
  ++count_;
  return true;
}

bool SignerSet::contains(ProcessId id) const
{
  if (id >= capacity_)
  {
    return false;
  }
  return (words_[id / 64] >> (id % 64)) & 1U;
}

std::vector<ProcessId> SignerSet::members() const
{
  std::vector<ProcessId> out;
  out.reserve(count_);
  for (std::size_t w = 0; w < words_.size(); ++w)
  {
    auto bits = words_[w];
    while (bits != 0)
    {
      auto bit = static_cast<ProcessId>(std::countr_zero(bits));
      out.push_back(static_cast<ProcessId>(w * 64) + bit);
      bits &= bits - 1;
    }
  }
  return out;
}

SignerSet &SignerSet::operator|=(SignerSet const &other)
{
  if (other.capacity_ > capacity_)
  {
    words_.resize(other.words_.size(), 0);
    capacity_ = other.capacity_;
  }
  count_ = 0;
  for (std::size_t w = 0; w < words_.size(); ++w)
  {
    if (w < other.words_.size())
    {
      words_[w] |= other.words_[w];
    }
    count_ += static_cast<std::uint32_t>(std::popcount(words_[w]));
  }
  return *this;
}

std::string to_hex(ByteView bytes)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes)
  {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int nibble(char c)
{
  if (c >= '0' && c <= '9')
  {
    return c - '0';
  }
  if (c >= 'a' && c <= 'f')
  {
    return c - 'a' + 10;
  }
  if (c >= 'A' && c <= 'F')
  {
    return c - 'A' + 10;
  }
  return -1;
}

}  // namespace

Bytes from_hex(std::string_view hex)
{
  if (hex.size() % 2 != 0)
  {
    throw MalformedMessage("hex string must have even length");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
  {
    auto hi = nibble(hex[i]);
    auto lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0)
    {
      throw MalformedMessage("invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

}  // namespace bbc
