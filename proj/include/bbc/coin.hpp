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

#include "bbc/coin_map.hpp"
#include "bbc/crypto.hpp"
#include "bbc/messages.hpp"

#include <map>
#include <memory>
#include <optional>

namespace bbc {

CoinShare make_share(crypto::Signer const &signer, InstanceTag const &instance, Round round);
bool      verify_share(crypto::Provider const &provider, CoinShare const &share);

/// Bit drawn from the seeded generator in override mode.
Bin override_bit(std::uint64_t seed, Round round);

/// Turns a round's aggregate into its coin bit. Without an override seed
/// this is the provider's coin_bit; with one, the aggregate is still
/// required and checked but the bit comes from override_bit.
class CoinSource
{
public:
  CoinSource() = default;
  explicit CoinSource(std::optional<std::uint64_t> override_seed)
    : override_{override_seed}
  {}

  /// Throws crypto::InvalidSignature if `tsig` is not the round's aggregate.
  Bin bit(crypto::Provider const &provider, crypto::ThresholdSignature const &tsig,
          InstanceTag const &instance, Round round) const;

  std::optional<std::uint64_t> override_seed() const noexcept
  {
    return override_;
  }

private:
  std::optional<std::uint64_t> override_;
};

/// Share collection and reveal for every round of one instance.
class CoinState
{
public:
  CoinState(std::shared_ptr<crypto::Provider const> provider, InstanceTag instance, CoinSource source);

  /// Records a verified share. Returns the bit when this share completes
  /// the round; later shares for a revealed round change nothing.
  std::optional<Bin> add_share(CoinShare const &share);

  /// Installs a round's aggregate learnt elsewhere (a decision proof).
  /// Returns the bit, or nothing if the aggregate does not verify.
  std::optional<Bin> adopt(Round round, crypto::ThresholdSignature const &tsig);

  CoinMap const &coins() const noexcept
  {
    return coins_;
  }

  crypto::ThresholdSignature const *aggregate(Round round) const;

  std::uint32_t share_count(Round round) const;

  CoinSource const &source() const noexcept
  {
    return source_;
  }

private:
  struct Pending
  {
    SignerSet                      signers;
    std::vector<crypto::Signature> shares;
  };

  std::shared_ptr<crypto::Provider const>         provider_;
  InstanceTag                                     instance_;
  CoinSource                                      source_;
  CoinMap                                         coins_;
  std::map<Round, Pending>                        pending_;
  std::map<Round, crypto::ThresholdSignature>     aggregates_;
};

}  // namespace bbc
