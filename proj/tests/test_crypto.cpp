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

#include "bbc/crypto.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace bbc;
using namespace bbc::crypto;

namespace {

Bytes msg(std::string_view s)
{
  return Bytes(s.begin(), s.end());
}

std::vector<Signature> shares_of(Provider const &p, std::vector<ProcessId> const &who, Bytes const &m)
{
  std::vector<Signature> out;
  for (auto i : who)
  {
    out.push_back(p.sign(i, m));
  }
  return out;
}

/// Calls f on every subset of {0..n-1} given as a sorted index list.
template <typename F>
void for_each_subset(std::uint32_t n, F f)
{
  for (std::uint32_t mask = 0; mask < (1U << n); ++mask)
  {
    std::vector<ProcessId> s;
    for (ProcessId i = 0; i < n; ++i)
    {
      if ((mask >> i) & 1U)
      {
        s.push_back(i);
      }
    }
    f(s);
  }
}

}  // namespace

TEST_CASE("sign and verify round trip for every signer")
{
  for (auto const &name : provider_names())
  {
    auto p = make_provider(name, Params::make(4, 1), 5);
    auto m = msg("AUX(1,0)");
    for (ProcessId i = 0; i < 4; ++i)
    {
      auto s = p->sign(i, m);
      CHECK(p->verify(s, i, m));
      CHECK_FALSE(p->verify(s, (i + 1) % 4, m));
    }
  }
}

TEST_CASE("signing is deterministic")
{
  auto p = make_provider("mock-prf", Params::make(4, 1), 5);
  CHECK(p->sign(0, msg("m")) == p->sign(0, msg("m")));
  auto q = make_provider("mock-prf", Params::make(4, 1), 5);
  CHECK(p->sign(2, msg("m")) == q->sign(2, msg("m")));
  auto other = make_provider("mock-prf", Params::make(4, 1), 6);
  CHECK(p->sign(2, msg("m")) != other->sign(2, msg("m")));
}

TEST_CASE("tampered signatures and foreign messages do not verify")
{
  auto p = make_provider("mock-prf", Params::make(4, 1), 5);
  auto m = msg("payload");
  auto s = p->sign(1, m);

  auto flipped = s;
  flipped.mac[7] ^= 0x01;
  CHECK_FALSE(p->verify(flipped, 1, m));

  auto digest_flip = s;
  digest_flip.digest[0] ^= 0x80;
  CHECK_FALSE(p->verify(digest_flip, 1, m));

  CHECK_FALSE(p->verify(s, 1, msg("payloaD")));

  auto relabeled   = s;
  relabeled.signer = 2;
  CHECK_FALSE(p->verify(relabeled, 2, m));

  auto out_of_range   = s;
  out_of_range.signer = 99;
  CHECK_FALSE(p->verify(out_of_range, 99, m));
}

TEST_CASE("unknown signer index is refused")
{
  auto p = make_provider("mock-prf", Params::make(4, 1), 5);
  CHECK_THROWS_AS(p->sign(4, msg("m")), ConfigError);
  CHECK_THROWS_AS(Signer(p, 4), ConfigError);
  CHECK_THROWS_AS(make_provider("bls-real", Params::make(4, 1), 5), ConfigError);
}

TEST_CASE("two quorums of the same message aggregate identically")
{
  auto p = make_provider("mock-prf", Params::make(4, 1), 5);
  auto m = msg("COIN(3)");
  auto a = p->aggregate(shares_of(*p, {0, 1, 2}, m));
  auto b = p->aggregate(shares_of(*p, {1, 2, 3}, m));
  CHECK(a == b);
  CHECK(p->verify_threshold(a, m));
  CHECK_FALSE(p->verify_threshold(a, msg("COIN(4)")));
}

TEST_CASE("aggregation below n - t distinct shares is refused")
{
  auto p = make_provider("mock-prf", Params::make(4, 1), 5);
  auto m = msg("COIN(1)");
  CHECK_THROWS_AS(p->aggregate(shares_of(*p, {0, 1}, m)), ThresholdUnavailable);
  CHECK_THROWS_AS(p->aggregate(shares_of(*p, {0, 0, 1}, m)), ThresholdUnavailable);
  CHECK_THROWS_AS(p->aggregate(std::vector<Signature>{}), ThresholdUnavailable);

  auto forged = shares_of(*p, {0, 1}, m);
  auto fake   = forged.back();
  fake.signer = 3;
  forged.push_back(fake);
  CHECK_THROWS_AS(p->aggregate(forged), ThresholdUnavailable);
}

TEST_CASE("shares over different messages cannot be mixed")
{
  auto p      = make_provider("mock-prf", Params::make(4, 1), 5);
  auto shares = shares_of(*p, {0, 1}, msg("COIN(1)"));
  shares.push_back(p->sign(2, msg("COIN(2)")));
  CHECK_THROWS_AS(p->aggregate(shares), MixedMessages);
}

TEST_CASE("exhaustive subset independence and threshold for n up to 7")
{
  for (std::uint32_t n = 1; n <= 7; ++n)
  {
    auto const t = max_faults(n);
    auto       p = make_provider("mock-prf", Params::make(n, t), 100 + n);
    auto       m = msg("COIN(" + std::to_string(n) + ")");
    std::set<ThresholdSignature> seen;
    std::set<Bin>                bits;
    std::size_t                  refused = 0;
    for_each_subset(n, [&](std::vector<ProcessId> const &s) {
      if (s.size() < n - t)
      {
        if (!s.empty())
        {
          CHECK_THROWS_AS(p->aggregate(shares_of(*p, s, m)), ThresholdUnavailable);
        }
        ++refused;
        return;
      }
      auto tsig = p->aggregate(shares_of(*p, s, m));
      seen.insert(tsig);
      bits.insert(p->coin_bit(tsig));
    });
    CAPTURE(n);
    CHECK(seen.size() == 1);
    CHECK(bits.size() == 1);
    CHECK(refused > 0);
  }
}

TEST_CASE("coin bit is deterministic, binary and rejects forged aggregates")
{
  auto p    = make_provider("mock-prf", Params::make(7, 2), 9);
  auto m    = msg("COIN(5)");
  auto tsig = p->aggregate(shares_of(*p, {0, 1, 2, 3, 4}, m));
  auto bit  = p->coin_bit(tsig);
  CHECK(p->coin_bit(tsig) == bit);
  CHECK((bit == Bin::zero || bit == Bin::one));

  auto forged = tsig;
  forged.aggregate[3] ^= 0x10;
  CHECK_THROWS_AS(p->coin_bit(forged), InvalidSignature);
}

TEST_CASE("coin bits over many messages take both values")
{
  auto        p = make_provider("mock-prf", Params::make(4, 1), 3);
  std::size_t ones = 0;
  for (int r = 0; r < 200; ++r)
  {
    auto m = msg("COIN-" + std::to_string(r));
    ones += p->coin_bit(p->aggregate(shares_of(*p, {0, 1, 2}, m))) == Bin::one ? 1 : 0;
  }
  CHECK(ones > 0);
  CHECK(ones < 200);
}
