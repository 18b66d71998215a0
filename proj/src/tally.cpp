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

#include "bbc/tally.hpp"

#include <algorithm>

namespace bbc {

std::optional<Bin> resolve_vote(AuxMsg const &aux, CoinMap const &coins)
{
  if (auto b = to_bin(aux.value))
  {
    return b;
  }
  if (aux.round < 2)
  {
    return std::nullopt;
  }
  return coins.get(aux.round - 1);
}

Tally::Tally(std::uint32_t n)
  : n_{n}
{}

Tally::RoundCells &Tally::cells(Round round)
{
  auto it = rounds_.find(round);
  if (it == rounds_.end())
  {
    RoundCells fresh{{SignerSet(n_), SignerSet(n_), SignerSet(n_)}, SignerSet(n_), SignerSet(n_)};
    it = rounds_.emplace(round, std::move(fresh)).first;
  }
  return it->second;
}

Tally::RoundCells const *Tally::find(Round round) const
{
  auto it = rounds_.find(round);
  return it == rounds_.end() ? nullptr : &it->second;
}

bool Tally::record(SignedAux const &vote)
{
  auto &c     = cells(vote.aux.round);
  auto  added = c.votes[static_cast<std::size_t>(vote.aux.value)].insert(vote.signer());
  if (added)
  {
    c.any.insert(vote.signer());
  }
  return added;
}

bool Tally::record(CoinShare const &share)
{
  return cells(share.round).coin.insert(share.sig.signer);
}

bool Tally::contains(Round round, AuxValue value, ProcessId signer) const
{
  auto const *c = find(round);
  return c != nullptr && c->votes[static_cast<std::size_t>(value)].contains(signer);
}

std::uint32_t Tally::cell_size(Round round, AuxValue value) const
{
  auto const *c = find(round);
  return c == nullptr ? 0 : c->votes[static_cast<std::size_t>(value)].size();
}

SignerSet const *Tally::cell(Round round, AuxValue value) const
{
  auto const *c = find(round);
  return c == nullptr ? nullptr : &c->votes[static_cast<std::size_t>(value)];
}

std::uint32_t Tally::union_size(Round round) const
{
  auto const *c = find(round);
  return c == nullptr ? 0 : c->any.size();
}

SignerSet Tally::support(Round round, Bin b, CoinMap const &coins) const
{
  SignerSet   out(n_);
  auto const *c = find(round);
  if (c == nullptr)
  {
    return out;
  }
  out |= c->votes[static_cast<std::size_t>(b)];
  if (round >= 2 && coins.get(round - 1) == b)
  {
    out |= c->votes[static_cast<std::size_t>(AuxValue::c_val)];
  }
  return out;
}

std::uint32_t Tally::coin_signers(Round round) const
{
  auto const *c = find(round);
  return c == nullptr ? 0 : c->coin.size();
}

namespace {

bool store_less(SignedAux const &a, SignedAux const &b)
{
  if (a.signer() != b.signer())
  {
    return a.signer() < b.signer();
  }
  return a.aux.value < b.aux.value;
}

}  // namespace

bool AuxStore::insert(SignedAux const &vote)
{
  auto &bucket = rounds_[vote.aux.round];
  auto  it     = std::lower_bound(bucket.begin(), bucket.end(), vote, store_less);
  if (it != bucket.end() && !store_less(vote, *it))
  {
    return false;
  }
  bucket.insert(it, vote);
  ++size_;
  return true;
}

bool AuxStore::contains(SignedAux const &vote) const
{
  auto it = rounds_.find(vote.aux.round);
  if (it == rounds_.end())
  {
    return false;
  }
  return std::binary_search(it->second.begin(), it->second.end(), vote, store_less);
}

std::span<SignedAux const> AuxStore::at_round(Round round) const
{
  auto it = rounds_.find(round);
  if (it == rounds_.end())
  {
    return {};
  }
  return it->second;
}

}  // namespace bbc
