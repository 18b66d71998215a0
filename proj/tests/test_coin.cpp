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

#include "bbc/coin.hpp"
#include "bbc/simnet.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace bbc;
using bbc::testing::Group;

namespace {

// Values produced by tests/oracles/coin_frequency.py.
constexpr std::uint64_t kProviderSeed = 2026;
constexpr std::uint64_t kRunSeed      = 7;
constexpr std::uint64_t kOverrideSeed = 99;
constexpr std::size_t   kOnes         = 4984;
constexpr std::size_t   kOverrideOnes = 4970;
constexpr char const   *kFirst64      = "0111110100000100100111000001110111011101000011000001001010100100";
constexpr char const   *kOverride64   = "1000011011110000100000010001110101111011111100000000001000011011";

std::string bits_string(std::vector<Bin> const &bits)
{
  std::string s;
  for (auto b : bits)
  {
    s += b == Bin::one ? '1' : '0';
  }
  return s;
}

}  // namespace

TEST_CASE("shares verify, are deterministic and bound to their round")
{
  Group g(4, 1);
  auto  s = g.share(0, 1);
  CHECK(verify_share(*g.provider, s));
  CHECK(g.share(0, 1) == s);
  auto moved  = s;
  moved.round = 2;
  CHECK_FALSE(verify_share(*g.provider, moved));
  CHECK_FALSE(g.provider->verify(s.sig, 0, coin_signing_bytes(g.tag, 2)));
  auto relabeled       = s;
  relabeled.sig.signer = 1;
  CHECK_FALSE(verify_share(*g.provider, relabeled));
  auto foreign = s;
  foreign.instance[5] ^= 1;
  CHECK_FALSE(verify_share(*g.provider, foreign));
}

TEST_CASE("a round is revealed exactly at n - t shares")
{
  Group     g(4, 1);
  CoinState state(g.provider, g.tag, CoinSource{});
  CHECK_FALSE(state.add_share(g.share(0, 1)).has_value());
  CHECK_FALSE(state.add_share(g.share(1, 1)).has_value());
  CHECK_FALSE(state.add_share(g.share(1, 1)).has_value());
  CHECK_FALSE(state.coins().contains(1));
  CHECK(state.share_count(1) == 2);
  auto bit = state.add_share(g.share(2, 1));
  REQUIRE(bit.has_value());
  CHECK(*bit == g.coin_bit(1));
  CHECK(state.coins().get(1) == bit);
  REQUIRE(state.aggregate(1) != nullptr);
  CHECK(*state.aggregate(1) == g.coin(1));

  CHECK_FALSE(state.add_share(g.share(3, 1)).has_value());
  CHECK(state.coins().get(1) == bit);
  CHECK(state.coins().revealed() == 1);
}

TEST_CASE("every quorum of every process reveals the same bit")
{
  Group g(4, 1);
  for (Round r = 1; r <= 20; ++r)
  {
    std::set<Bin> seen;
    for (ProcessId skip = 0; skip < 4; ++skip)
    {
      CoinState state(g.provider, g.tag, CoinSource{});
      std::optional<Bin> bit;
      for (ProcessId i = 4; i-- > 0;)
      {
        if (i != skip)
        {
          bit = state.add_share(g.share(i, r));
        }
      }
      REQUIRE(bit.has_value());
      seen.insert(*bit);
    }
    CHECK(seen.size() == 1);
  }
}

TEST_CASE("adopting an aggregate reveals the round and forged ones are refused")
{
  Group     g(4, 1);
  CoinState state(g.provider, g.tag, CoinSource{});
  auto      tsig = g.coin(3);
  auto      bad  = tsig;
  bad.aggregate[0] ^= 1;
  CHECK_FALSE(state.adopt(3, bad).has_value());
  CHECK_FALSE(state.adopt(4, tsig).has_value());
  CHECK(state.adopt(3, tsig) == g.coin_bit(3));
  CHECK(state.coins().get(3) == g.coin_bit(3));
}

TEST_CASE("override mode still needs the aggregate but takes its bit from the seed")
{
  Group      g(4, 1);
  CoinSource src{kOverrideSeed};
  for (Round r = 1; r <= 64; ++r)
  {
    CHECK(src.bit(*g.provider, g.coin(r), g.tag, r) == override_bit(kOverrideSeed, r));
  }
  auto bad = g.coin(1);
  bad.aggregate[9] ^= 4;
  CHECK_THROWS_AS(src.bit(*g.provider, bad, g.tag, 1), crypto::InvalidSignature);
  CHECK_THROWS_AS(src.bit(*g.provider, g.coin(1), g.tag, 2), crypto::InvalidSignature);

  CoinState state(g.provider, g.tag, src);
  state.add_share(g.share(0, 5));
  state.add_share(g.share(2, 5));
  CHECK_FALSE(state.coins().contains(5));
  CHECK(state.add_share(g.share(3, 5)) == override_bit(kOverrideSeed, 5));
}

TEST_CASE("coin bits match the independent model")
{
  auto params   = Params::make(4, 1);
  auto provider = crypto::make_provider("mock-prf", params, kProviderSeed);
  auto tag      = sim::instance_tag(kRunSeed);

  std::vector<Bin> bits;
  std::size_t      ones = 0;
  for (Round r = 1; r <= 10000; ++r)
  {
    std::vector<crypto::Signature> shares;
    for (ProcessId i = 0; i < params.quorum(); ++i)
    {
      shares.push_back(provider->sign(i, coin_signing_bytes(tag, r)));
    }
    auto bit = provider->coin_bit(provider->aggregate(shares));
    ones += bit == Bin::one ? 1 : 0;
    if (bits.size() < 64)
    {
      bits.push_back(bit);
    }
  }
  CHECK(bits_string(bits) == kFirst64);
  CHECK(ones == kOnes);
  double const frac = static_cast<double>(ones) / 10000.0;
  CHECK(frac >= 0.47);
  CHECK(frac <= 0.53);
}

TEST_CASE("override bits match the independent model")
{
  std::vector<Bin> bits;
  std::size_t      ones = 0;
  for (Round r = 1; r <= 10000; ++r)
  {
    auto b = override_bit(kOverrideSeed, r);
    ones += b == Bin::one ? 1 : 0;
    if (bits.size() < 64)
    {
      bits.push_back(b);
    }
  }
  CHECK(bits_string(bits) == kOverride64);
  CHECK(ones == kOverrideOnes);
}

TEST_CASE("coin map is append-only")
{
  CoinMap m;
  m.set(2, Bin::one);
  m.set(2, Bin::one);
  CHECK_THROWS(m.set(2, Bin::zero));
  CHECK(m.get(2) == Bin::one);
  CHECK_FALSE(m.get(1).has_value());
  CHECK(m.missing(1, 3) == std::vector<Round>{1, 3});
  CHECK(m.highest() == 2);
  CHECK(m.revealed() == 1);
}
