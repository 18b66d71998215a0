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

#include "bbc/validity.hpp"

#include <algorithm>
#include <variant>

namespace bbc::validity {
namespace {

std::uint32_t count_signers(std::span<SignedAux const> proofs, Round round, Bin b,
                            CoinMap const &coins, std::uint32_t n)
{
  SignerSet seen(n);
  for (auto const &p : proofs)
  {
    if (p.aux.round != round || p.signer() >= n)
    {
      continue;
    }
    if (resolve_vote(p.aux, coins) == b)
    {
      seen.insert(p.signer());
    }
  }
  return seen.size();
}

/// Either the binary value a vote must be proven for, or a final outcome.
std::variant<Bin, Outcome> target_of(AuxMsg const &vote, CoinMap const &coins)
{
  if (vote.value == AuxValue::c_val && vote.round < 2)
  {
    return Outcome::invalid();
  }
  if (vote.round == 0)
  {
    return Outcome::valid();
  }
  auto missing = missing_coins(vote.round, coins);
  if (!missing.empty())
  {
    return Outcome{Verdict::deferred, std::move(missing)};
  }
  return *resolve_vote(vote, coins);
}

std::vector<SignedAux> pick(std::span<SignedAux const> candidates, Round round, Bin b,
                            CoinMap const &coins, std::uint32_t want, std::uint32_t n)
{
  std::vector<SignedAux> out;
  SignerSet              taken(n);
  for (auto const &c : candidates)
  {
    if (out.size() == want)
    {
      break;
    }
    if (c.aux.round != round || c.signer() >= n || taken.contains(c.signer()))
    {
      continue;
    }
    if (resolve_vote(c.aux, coins) == b)
    {
      taken.insert(c.signer());
      out.push_back(c);
    }
  }
  if (out.size() < want)
  {
    throw InsufficientStore("cannot prove AUX(" + std::to_string(round) + ") support for " +
                            to_string(b));
  }
  return out;
}

std::vector<SignedAux> under_hypotheses(Round r, std::optional<Bin> fixed, AuxStore const &store,
                                        CoinMap const &coins, Params params)
{
  std::vector<SignedAux> out;
  bool                   any = false;
  for (auto h : {Bin::zero, Bin::one})
  {
    auto guess = coins;
    guess.set(r - 1, h);
    try
    {
      auto part = minimal_proof(r, fixed.value_or(h), store, guess, params);
      out.insert(out.end(), part.begin(), part.end());
      any = true;
    }
    catch (InsufficientStore const &)
    {
    }
  }
  if (!any)
  {
    throw InsufficientStore("no coin hypothesis for round " + std::to_string(r - 1) +
                            " can be proven");
  }
  canonicalize(out);
  return out;
}

}  // namespace

std::string to_string(Verdict v)
{
  switch (v)
  {
  case Verdict::valid:
    return "valid";
  case Verdict::invalid:
    return "invalid";
  case Verdict::deferred:
    return "deferred";
  }
  return "?";
}

Round prev_round(Round r, Bin est, CoinMap const &coins)
{
  auto const want = negate(est);
  for (Round p = r; p-- > 1;)
  {
    auto c = coins.get(p);
    if (!c)
    {
      throw ProtocolError("prev_round needs the coin of round " + std::to_string(p));
    }
    if (*c == want)
    {
      return p;
    }
  }
  return 0;
}

std::vector<Round> missing_coins(Round r, CoinMap const &coins)
{
  if (r < 2)
  {
    return {};
  }
  return coins.missing(1, r - 1);
}

Outcome is_valid(Round r, Bin est, std::span<SignedAux const> proofs, CoinMap const &coins,
                 Params params)
{
  if (r == 0)
  {
    return Outcome::valid();
  }
  auto missing = missing_coins(r, coins);
  if (!missing.empty())
  {
    return Outcome{Verdict::deferred, std::move(missing)};
  }
  auto p = r == 1 ? 0 : prev_round(r, est, coins);
  if (p == 0)
  {
    return count_signers(proofs, 0, est, coins, params.n) >= params.weak_quorum() ? Outcome::valid()
                                                                                  : Outcome::invalid();
  }
  return count_signers(proofs, p, est, coins, params.n) >= params.quorum() ? Outcome::valid()
                                                                           : Outcome::invalid();
}

Outcome check_vote(AuxMsg const &vote, std::span<SignedAux const> proofs, CoinMap const &coins,
                   Params params)
{
  auto target = target_of(vote, coins);
  if (auto const *done = std::get_if<Outcome>(&target))
  {
    return *done;
  }
  return is_valid(vote.round, std::get<Bin>(target), proofs, coins, params);
}

Outcome check_vote(AuxMsg const &vote, std::span<SignedAux const> proofs, AuxStore const &store,
                   CoinMap const &coins, Params params)
{
  auto target = target_of(vote, coins);
  if (auto const *done = std::get_if<Outcome>(&target))
  {
    return *done;
  }
  auto const b = std::get<Bin>(target);
  auto const p = vote.round == 1 ? 0 : prev_round(vote.round, b, coins);

  std::vector<SignedAux> pool(proofs.begin(), proofs.end());
  auto                   from_store = store.at_round(p);
  pool.insert(pool.end(), from_store.begin(), from_store.end());
  return is_valid(vote.round, b, pool, coins, params);
}

std::vector<SignedAux> minimal_proof(Round r, Bin b, AuxStore const &store, CoinMap const &coins,
                                     Params params)
{
  if (r == 0)
  {
    return {};
  }
  auto p = r == 1 ? 0 : prev_round(r, b, coins);
  if (p == 0)
  {
    return pick(store.at_round(0), 0, b, coins, params.weak_quorum(), params.n);
  }
  return pick(store.at_round(p), p, b, coins, params.quorum(), params.n);
}

std::vector<SignedAux> build_proofs(Round r, AuxValue est, AuxStore const &store,
                                    CoinMap const &coins, Params params, bool combined)
{
  if (r == 0)
  {
    if (est == AuxValue::c_val)
    {
      throw ProtocolError("c_val in round 0");
    }
    return {};
  }
  if (est == AuxValue::c_val && (!combined || r < 2))
  {
    throw ProtocolError("c_val is only sent with combined messages from round 2 on");
  }

  auto missing = missing_coins(r, coins);
  if (missing.empty())
  {
    auto b = est == AuxValue::c_val ? *coins.get(r - 1) : *to_bin(est);
    return minimal_proof(r, b, store, coins, params);
  }
  if (!combined || missing.size() != 1 || missing.front() != r - 1)
  {
    throw InsufficientStore("coins for rounds before " + std::to_string(r) + " unknown");
  }
  return under_hypotheses(r, to_bin(est), store, coins, params);
}

std::vector<SignedAux> minimize(AuxMsg const &vote, std::span<SignedAux const> proofs,
                                CoinMap const &coins, Params params, bool combined)
{
  if (vote.round == 0)
  {
    return {};
  }
  AuxStore pool;
  for (auto const &p : proofs)
  {
    pool.insert(p);
  }
  if (!combined)
  {
    return minimal_proof(vote.round, *resolve_vote(vote, coins), pool, coins, params);
  }
  std::vector<SignedAux> out;
  for (auto b : {Bin::zero, Bin::one})
  {
    if (is_valid(vote.round, b, proofs, coins, params).verdict == Verdict::valid)
    {
      auto part = minimal_proof(vote.round, b, pool, coins, params);
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  canonicalize(out);
  return out;
}

}  // namespace bbc::validity
