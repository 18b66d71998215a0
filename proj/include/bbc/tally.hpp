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
#include "bbc/messages.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace bbc {

/// Binary value a vote stands for: itself, or for c_val the coin of the
/// previous round. Empty while that coin is unknown or for c_val in
/// rounds 0 and 1, where it is meaningless.
std::optional<Bin> resolve_vote(AuxMsg const &aux, CoinMap const &coins);

/// Distinct-signer counts over top-level votes and coin shares.
///
/// Cells are keyed by the raw AuxValue; an equivocating signer may sit in
/// several cells of one round but is counted once by union_size().
class Tally
{
public:
  explicit Tally(std::uint32_t n);

  /// Idempotent. Returns true if the vote was new.
  bool record(SignedAux const &vote);
  bool record(CoinShare const &share);

  bool             contains(Round round, AuxValue value, ProcessId signer) const;
  std::uint32_t    cell_size(Round round, AuxValue value) const;
  SignerSet const *cell(Round round, AuxValue value) const;

  /// Distinct signers over every cell of the round.
  std::uint32_t union_size(Round round) const;

  /// Signers whose round vote resolves to `b` (c_val counted through the
  /// coin of round - 1).
  SignerSet support(Round round, Bin b, CoinMap const &coins) const;

  std::uint32_t coin_signers(Round round) const;

  std::uint32_t n() const noexcept
  {
    return n_;
  }

private:
  struct RoundCells
  {
    std::array<SignerSet, 3> votes;
    SignerSet                any;
    SignerSet                coin;
  };

  RoundCells       &cells(Round round);
  RoundCells const *find(Round round) const;

  std::uint32_t               n_;
  std::map<Round, RoundCells> rounds_;
};

/// Every signed vote a process knows about (received votes plus proof
/// elements), kept per round in canonical order. This is the pool proofs
/// are built from.
class AuxStore
{
public:
  bool insert(SignedAux const &vote);
  bool contains(SignedAux const &vote) const;

  /// Votes of one round, sorted by (signer, value). Empty span if none.
  std::span<SignedAux const> at_round(Round round) const;

  std::size_t size() const noexcept
  {
    return size_;
  }

private:
  std::map<Round, std::vector<SignedAux>> rounds_;
  std::size_t                             size_ = 0;
};

}  // namespace bbc
