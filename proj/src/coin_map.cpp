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

#include "bbc/coin_map.hpp"

namespace bbc {

void CoinMap::set(Round round, Bin bit)
{
  if (round == 0)
  {
    throw ProtocolError("round 0 has no coin");
  }
  if (bits_.size() <= round)
  {
    bits_.resize(round + 1, -1);
  }
  auto &slot = bits_[round];
  if (slot >= 0)
  {
    if (slot != to_int(bit))
    {
      throw ProtocolError("coin for round " + std::to_string(round) + " rewritten");
    }
    return;
  }
  slot = static_cast<std::int8_t>(to_int(bit));
  ++count_;
}

std::optional<Bin> CoinMap::get(Round round) const
{
  if (round >= bits_.size() || bits_[round] < 0)
  {
    return std::nullopt;
  }
  return static_cast<Bin>(bits_[round]);
}

std::vector<Round> CoinMap::missing(Round first, Round last) const
{
  std::vector<Round> out;
  for (std::uint64_t r = first; r <= last; ++r)
  {
    if (!contains(static_cast<Round>(r)))
    {
      out.push_back(static_cast<Round>(r));
    }
  }
  return out;
}

Round CoinMap::highest() const noexcept
{
  for (auto r = bits_.size(); r > 0; --r)
  {
    if (bits_[r - 1] >= 0)
    {
      return static_cast<Round>(r - 1);
    }
  }
  return 0;
}

}  // namespace bbc
