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

namespace bbc {

CoinShare make_share(crypto::Signer const &signer, InstanceTag const &instance, Round round)
{
  if (round == 0)
  {
    throw ProtocolError("round 0 has no coin");
  }
  return CoinShare{instance, round, signer.sign(coin_signing_bytes(instance, round))};
}

bool verify_share(crypto::Provider const &provider, CoinShare const &share)
{
  return share.round >= 1 &&
         provider.verify(share.sig, share.sig.signer, coin_signing_bytes(share.instance, share.round));
}

Bin override_bit(std::uint64_t seed, Round round)
{
  return bin_of((derive_seed(seed, 0x636f696eULL, round) >> 63) != 0);
}

Bin CoinSource::bit(crypto::Provider const &provider, crypto::ThresholdSignature const &tsig,
                    InstanceTag const &instance, Round round) const
{
  if (!provider.verify_threshold(tsig, coin_signing_bytes(instance, round)))
  {
    throw crypto::InvalidSignature("coin aggregate does not match round " + std::to_string(round));
  }
  if (override_)
  {
    return override_bit(*override_, round);
  }
  return provider.coin_bit(tsig);
}

CoinState::CoinState(std::shared_ptr<crypto::Provider const> provider, InstanceTag instance,
                     CoinSource source)
  : provider_{std::move(provider)}
  , instance_{instance}
  , source_{source}
{}

std::optional<Bin> CoinState::add_share(CoinShare const &share)
{
  if (share.round == 0 || coins_.contains(share.round))
  {
    return std::nullopt;
  }
  auto const n  = provider_->params().n;
  auto       it = pending_.find(share.round);
  if (it == pending_.end())
  {
    it = pending_.emplace(share.round, Pending{SignerSet(n), {}}).first;
  }
  auto &p = it->second;
  if (!p.signers.insert(share.sig.signer))
  {
    return std::nullopt;
  }
  p.shares.push_back(share.sig);
  if (p.signers.size() < provider_->params().quorum())
  {
    return std::nullopt;
  }
  auto tsig = provider_->aggregate(p.shares);
  pending_.erase(it);
  return adopt(share.round, tsig);
}

std::optional<Bin> CoinState::adopt(Round round, crypto::ThresholdSignature const &tsig)
{
  if (auto known = coins_.get(round))
  {
    return known;
  }
  Bin bit;
  try
  {
    bit = source_.bit(*provider_, tsig, instance_, round);
  }
  catch (crypto::InvalidSignature const &)
  {
    return std::nullopt;
  }
  coins_.set(round, bit);
  aggregates_.emplace(round, tsig);
  pending_.erase(round);
  return bit;
}

crypto::ThresholdSignature const *CoinState::aggregate(Round round) const
{
  auto it = aggregates_.find(round);
  return it == aggregates_.end() ? nullptr : &it->second;
}

std::uint32_t CoinState::share_count(Round round) const
{
  if (coins_.contains(round))
  {
    return provider_->params().quorum();
  }
  auto it = pending_.find(round);
  return it == pending_.end() ? 0 : it->second.signers.size();
}

}  // namespace bbc
