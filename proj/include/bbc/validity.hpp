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
#include "bbc/tally.hpp"

#include <span>
#include <vector>

namespace bbc::validity {

enum class Verdict : std::uint8_t
{
  valid,
  invalid,
  deferred,
};

std::string to_string(Verdict v);

struct Outcome
{
  Verdict verdict = Verdict::invalid;

  /// Coin rounds whose absence caused a deferral.
  std::vector<Round> missing;

  static Outcome valid()
  {
    return {Verdict::valid, {}};
  }
  static Outcome invalid()
  {
    return {Verdict::invalid, {}};
  }

  bool operator==(Outcome const &) const = default;
};

/// No subset of the available votes proves the requested (round, value).
class InsufficientStore : public Error
{
public:
  using Error::Error;
};

/// Largest round p < r with coins[p] == !est, or 0. Requires the coins of
/// rounds 1..r-1.
Round prev_round(Round r, Bin est, CoinMap const &coins);

/// Coin rounds in 1..r-1 the map does not know yet.
std::vector<Round> missing_coins(Round r, CoinMap const &coins);

/// The validity predicate over already signature-checked proofs. Proof
/// elements with c_val count for the coin of the round before their own.
Outcome is_valid(Round r, Bin est, std::span<SignedAux const> proofs, CoinMap const &coins,
                 Params params);

/// Validity of a vote: c_val is resolved through the coin of round - 1 and
/// is never valid in rounds 0 and 1.
Outcome check_vote(AuxMsg const &vote, std::span<SignedAux const> proofs, CoinMap const &coins,
                   Params params);

/// Like check_vote but also draws on the votes already held in `store`.
Outcome check_vote(AuxMsg const &vote, std::span<SignedAux const> proofs, AuxStore const &store,
                   CoinMap const &coins, Params params);

/// Smallest proof for (r, b) from `store`: t + 1 round-0 votes or n - t
/// votes of round prev_round, lowest signers first. Needs coins 1..r-1.
std::vector<SignedAux> minimal_proof(Round r, Bin b, AuxStore const &store, CoinMap const &coins,
                                     Params params);

/// Proofs for an outgoing AUX(r, est).
///
/// With `combined`, the coin of round r - 1 may still be hidden; the result
/// is then the union of one minimal proof per possible coin value (a value
/// the store cannot prove under one hypothesis is skipped). Throws
/// InsufficientStore when nothing can be built.
std::vector<SignedAux> build_proofs(Round r, AuxValue est, AuxStore const &store,
                                    CoinMap const &coins, Params params, bool combined);

/// The part of a validated proof set worth keeping: a minimal proof for the
/// vote's own value, and with `combined` one for every binary value the
/// proofs establish.
std::vector<SignedAux> minimize(AuxMsg const &vote, std::span<SignedAux const> proofs,
                                CoinMap const &coins, Params params, bool combined);

}  // namespace bbc::validity
