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

#include "bbc/process.hpp"

#include <algorithm>
#include <stdexcept>

namespace bbc {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime  = 0x100000001b3ULL;

void fnv(std::uint64_t &h, std::uint64_t v)
{
  for (int i = 0; i < 8; ++i)
  {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

}  // namespace

std::string to_string(Phase p)
{
  switch (p)
  {
  case Phase::idle:
    return "idle";
  case Phase::await_round0:
    return "await_round0";
  case Phase::await_aux:
    return "await_aux";
  case Phase::await_coin:
    return "await_coin";
  case Phase::decided:
    return "decided";
  case Phase::stopped:
    return "stopped";
  }
  return "?";
}

void ProtocolOutput::append(ProtocolOutput &&other)
{
  std::move(other.out.begin(), other.out.end(), std::back_inserter(out));
  std::move(other.accepted.begin(), other.accepted.end(), std::back_inserter(accepted));
  coins.insert(coins.end(), other.coins.begin(), other.coins.end());
  if (other.decided)
  {
    decided = other.decided;
  }
  stopped = stopped || other.stopped;
  dropped = dropped || other.dropped;
}

Process::Process(ProcessConfig config, crypto::Signer signer)
  : config_{config}
  , signer_{std::move(signer)}
  , tally_{config.params.n}
  , coin_{signer_.shared_provider(), config.instance, config.coin_source}
  , proof_sent_to_{config.params.n}
  , peak_(config.params.n, 0)
{
  if (signer_.provider().params() != config_.params)
  {
    throw ConfigError("provider parameters differ from the process configuration");
  }
  if (signer_.id() >= config_.params.n)
  {
    throw ConfigError("process id out of range");
  }
}

ProtocolOutput Process::start(Bin proposal)
{
  if (phase_ != Phase::idle)
  {
    throw ProtocolError("process already started");
  }
  ProtocolOutput out;
  round_ = 0;
  est_   = to_aux(proposal);
  phase_ = Phase::await_round0;
  broadcast_aux(0, *est_, std::nullopt, out);
  return out;
}

ProtocolOutput Process::on_message(ProcessId from, Message const &msg)
{
  return std::visit(
      [&](auto const &m) -> ProtocolOutput {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AuxProofMsg>)
        {
          return on_aux(from, m);
        }
        else if constexpr (std::is_same_v<T, CoinShare>)
        {
          return on_coin_share(from, m);
        }
        else if constexpr (std::is_same_v<T, CombinedMsg>)
        {
          return on_combined(from, m);
        }
        else if constexpr (std::is_same_v<T, DecisionProof>)
        {
          return on_decision_proof(from, m);
        }
        else if constexpr (std::is_same_v<T, ProofRequest>)
        {
          return on_proof_request(from, m);
        }
        else
        {
          return on_proof_response(from, m);
        }
      },
      msg);
}

bool Process::verified(SignedAux const &vote)
{
  if (verified_.contains(vote))
  {
    return true;
  }
  ++stats_.signature_checks;
  if (!verify_aux(signer_.provider(), vote))
  {
    return false;
  }
  verified_.insert(vote);
  return true;
}

bool Process::well_formed(ProcessId from, AuxProofMsg const &msg) const
{
  auto const &aux = msg.vote.aux;
  auto const  n   = config_.params.n;
  if (aux.instance != config_.instance || msg.vote.signer() != from || from >= n)
  {
    return false;
  }
  if (aux.value == AuxValue::c_val && (!config_.mode.combine_messages || aux.round < 2))
  {
    return false;
  }
  if (aux.round > round_ + config_.horizon)
  {
    return false;
  }
  if (aux.round == 0 && !msg.proofs.empty())
  {
    return false;
  }
  return std::all_of(msg.proofs.begin(), msg.proofs.end(), [&](SignedAux const &p) {
    return p.aux.instance == config_.instance && p.aux.round < aux.round && p.signer() < n;
  });
}

void Process::note_peak(ProcessId from, Round round)
{
  peak_[from] = std::max(peak_[from], round);
}

ProtocolOutput Process::halted_reaction(ProcessId from, Round round, bool request)
{
  ProtocolOutput out;
  if (from == id() || (!request && round <= participation_))
  {
    ++stats_.ignored;
    return out;
  }
  if (phase_ == Phase::decided)
  {
    release_proof(std::nullopt, out);
    phase_      = Phase::stopped;
    out.stopped = true;
  }
  else if (!proof_sent_to_.contains(from))
  {
    release_proof(from, out);
  }
  else
  {
    ++stats_.ignored;
  }
  return out;
}

ProtocolOutput Process::on_aux(ProcessId from, AuxProofMsg const &msg)
{
  ProtocolOutput out;
  if (!well_formed(from, msg) || !verified(msg.vote))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  note_peak(from, msg.vote.aux.round);
  if (halted())
  {
    return halted_reaction(from, msg.vote.aux.round, false);
  }
  if (!std::all_of(msg.proofs.begin(), msg.proofs.end(), [&](SignedAux const &p) { return verified(p); }))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  admit(from, msg, out);
  progress(out);
  return out;
}

ProtocolOutput Process::on_coin_share(ProcessId from, CoinShare const &share)
{
  ProtocolOutput out;
  if (config_.mode.combine_messages || share.instance != config_.instance || share.sig.signer != from ||
      share.round == 0 || share.round > round_ + config_.horizon ||
      !verify_share(signer_.provider(), share))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  note_peak(from, share.round);
  if (halted())
  {
    return halted_reaction(from, share.round, false);
  }
  take_share(share, out);
  progress(out);
  return out;
}

ProtocolOutput Process::on_combined(ProcessId from, CombinedMsg const &msg)
{
  ProtocolOutput out;
  auto const    &share = msg.coin;
  if (!config_.mode.combine_messages || share.instance != config_.instance ||
      share.sig.signer != from || share.round == 0 || share.round + 1 != msg.aux.vote.aux.round ||
      !well_formed(from, msg.aux) || !verify_share(signer_.provider(), share) ||
      !verified(msg.aux.vote))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  note_peak(from, msg.aux.vote.aux.round);
  if (halted())
  {
    return halted_reaction(from, msg.aux.vote.aux.round, false);
  }
  if (!std::all_of(msg.aux.proofs.begin(), msg.aux.proofs.end(),
                   [&](SignedAux const &p) { return verified(p); }))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  take_share(share, out);
  admit(from, msg.aux, out);
  progress(out);
  return out;
}

ProtocolOutput Process::on_decision_proof(ProcessId, DecisionProof const &proof)
{
  ProtocolOutput out;
  if (halted() || phase_ == Phase::idle)
  {
    ++stats_.ignored;
    return out;
  }
  if (!check_decision_proof(proof))
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  auto learn = [&](Round r, crypto::ThresholdSignature const &tsig) {
    bool known = coins().contains(r);
    if (auto bit = coin_.adopt(r, tsig); bit && !known)
    {
      out.coins.emplace_back(r, *bit);
    }
  };
  if (proof.prev_coin)
  {
    learn(proof.round - 1, *proof.prev_coin);
  }
  learn(proof.round, proof.coin);

  decision_   = Decision{proof.round, proof.value, true};
  proof_      = proof;
  phase_      = Phase::stopped;
  out.decided = decision_;
  out.stopped = true;
  return out;
}

ProtocolOutput Process::on_proof_request(ProcessId from, ProofRequest const &req)
{
  ProtocolOutput out;
  if (req.requester != from || req.instance != config_.instance || from >= config_.params.n)
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }
  if (halted())
  {
    return halted_reaction(from, req.round, true);
  }
  auto it = sent_.find({req.round, req.value});
  if (it == sent_.end())
  {
    ++stats_.requests_unanswered;
    return out;
  }
  out.out.push_back(Outbound{from, ProofResponse{config_.instance, req.round, req.value, it->second}});
  ++stats_.proof_responses_sent;
  return out;
}

ProtocolOutput Process::on_proof_response(ProcessId from, ProofResponse const &resp)
{
  ProtocolOutput out;
  if (halted())
  {
    ++stats_.ignored;
    return out;
  }
  auto const n  = config_.params.n;
  bool       ok = resp.instance == config_.instance &&
            std::all_of(resp.proofs.begin(), resp.proofs.end(), [&](SignedAux const &p) {
              return p.aux.instance == config_.instance && p.aux.round < resp.round && p.signer() < n &&
                     verified(p);
            });
  if (!ok)
  {
    ++stats_.dropped;
    out.dropped = true;
    return out;
  }

  bool matched = false;
  for (std::size_t i = 0; i < awaiting_.size();)
  {
    auto const &aux = awaiting_[i].msg.vote.aux;
    if (awaiting_[i].from != from || aux.round != resp.round || aux.value != resp.value)
    {
      ++i;
      continue;
    }
    matched     = true;
    auto parked = std::move(awaiting_[i]);
    awaiting_.erase(awaiting_.begin() + static_cast<std::ptrdiff_t>(i));
    parked.msg.proofs = resp.proofs;

    auto outcome = validity::check_vote(parked.msg.vote.aux, parked.msg.proofs, store_, coins(),
                                        config_.params);
    switch (outcome.verdict)
    {
    case validity::Verdict::valid:
      ++stats_.responses_resolved;
      accept(parked.msg, *resolve_vote(parked.msg.vote.aux, coins()), out);
      break;
    case validity::Verdict::deferred:
      ++stats_.responses_resolved;
      deferred_.push_back(std::move(parked));
      break;
    case validity::Verdict::invalid:
      ++stats_.invalid_after_response;
      break;
    }
  }
  if (!matched)
  {
    ++stats_.ignored;
    return out;
  }
  retry_awaiting(out);
  progress(out);
  return out;
}

void Process::admit(ProcessId from, AuxProofMsg const &msg, ProtocolOutput &out)
{
  auto const &aux = msg.vote.aux;
  if (tally_.contains(aux.round, aux.value, msg.vote.signer()))
  {
    ++stats_.ignored;
    return;
  }
  auto outcome = config_.mode.include_proofs
                     ? validity::check_vote(aux, msg.proofs, coins(), config_.params)
                     : validity::check_vote(aux, msg.proofs, store_, coins(), config_.params);
  switch (outcome.verdict)
  {
  case validity::Verdict::valid:
    accept(msg, *resolve_vote(aux, coins()), out);
    if (!config_.mode.include_proofs)
    {
      retry_awaiting(out);
    }
    break;
  case validity::Verdict::deferred:
    if (std::none_of(deferred_.begin(), deferred_.end(),
                     [&](Parked const &p) { return p.msg.vote == msg.vote; }))
    {
      ++stats_.deferred;
      deferred_.push_back(Parked{from, msg});
    }
    break;
  case validity::Verdict::invalid:
    if (config_.mode.include_proofs)
    {
      ++stats_.dropped;
      out.dropped = true;
    }
    else
    {
      request_proofs(from, msg, out);
    }
    break;
  }
}

void Process::accept(AuxProofMsg const &msg, Bin resolved, ProtocolOutput &out)
{
  if (!msg.proofs.empty())
  {
    try
    {
      for (auto const &p : validity::minimize(msg.vote.aux, msg.proofs, coins(), config_.params,
                                              config_.mode.combine_messages))
      {
        store_.insert(p);
      }
    }
    catch (validity::InsufficientStore const &)
    {
      // proofs were only partial; the store supplied the rest
    }
  }
  store_.insert(msg.vote);
  if (tally_.record(msg.vote))
  {
    ++stats_.accepted;
    out.accepted.push_back(Accepted{msg.vote, resolved});
  }
}

void Process::request_proofs(ProcessId from, AuxProofMsg const &msg, ProtocolOutput &out)
{
  auto const &aux = msg.vote.aux;
  if (requested_.emplace(from, aux.round, aux.value).second)
  {
    out.out.push_back(Outbound{from, ProofRequest{config_.instance, aux.round, aux.value, id()}});
    ++stats_.proof_requests_sent;
  }
  if (std::none_of(awaiting_.begin(), awaiting_.end(),
                   [&](Parked const &p) { return p.msg.vote == msg.vote; }))
  {
    awaiting_.push_back(Parked{from, msg});
  }
}

void Process::retry_awaiting(ProtocolOutput &out)
{
  bool changed = true;
  while (changed)
  {
    changed = false;
    for (std::size_t i = 0; i < awaiting_.size(); ++i)
    {
      auto const &parked  = awaiting_[i];
      auto        outcome = validity::check_vote(parked.msg.vote.aux, parked.msg.proofs, store_,
                                                 coins(), config_.params);
      if (outcome.verdict != validity::Verdict::valid)
      {
        continue;
      }
      auto msg = std::move(awaiting_[i].msg);
      awaiting_.erase(awaiting_.begin() + static_cast<std::ptrdiff_t>(i));
      accept(msg, *resolve_vote(msg.vote.aux, coins()), out);
      changed = true;
      break;
    }
  }
}

void Process::retry_deferred(ProtocolOutput &out)
{
  auto parked = std::move(deferred_);
  deferred_.clear();
  for (auto &p : parked)
  {
    if (tally_.contains(p.msg.vote.aux.round, p.msg.vote.aux.value, p.msg.vote.signer()))
    {
      continue;
    }
    admit(p.from, p.msg, out);
  }
}

void Process::take_share(CoinShare const &share, ProtocolOutput &out)
{
  tally_.record(share);
  bool known = coins().contains(share.round);
  auto bit   = coin_.add_share(share);
  if (bit && !known)
  {
    out.coins.emplace_back(share.round, *bit);
    retry_deferred(out);
  }
}

void Process::progress(ProtocolOutput &out)
{
  auto const q = config_.params.quorum();
  for (;;)
  {
    switch (phase_)
    {
    case Phase::await_round0:
      if (tally_.union_size(0) < q)
      {
        return;
      }
      est_ = tally_.cell_size(0, AuxValue::zero) >= config_.params.weak_quorum() ? AuxValue::zero
                                                                                  : AuxValue::one;
      advance_round(out);
      break;

    case Phase::await_aux:
    {
      if (tally_.union_size(round_) < q)
      {
        return;
      }
      est_ = AuxValue::c_val;
      for (auto b : {Bin::zero, Bin::one})
      {
        if (tally_.support(round_, b, coins()).size() >= q)
        {
          est_ = to_aux(b);
        }
      }
      auto share = make_share(signer_, config_.instance, round_);
      phase_     = Phase::await_coin;
      if (config_.mode.combine_messages)
      {
        auto next = *est_;
        if (auto c = coins().get(round_); next == AuxValue::c_val && c)
        {
          next = to_aux(*c);
        }
        broadcast_aux(round_ + 1, next, share, out);
      }
      else
      {
        out.out.push_back(Outbound{std::nullopt, share});
      }
      break;
    }

    case Phase::await_coin:
    {
      auto c = coins().get(round_);
      if (!c)
      {
        return;
      }
      if (est_ == AuxValue::c_val)
      {
        est_ = to_aux(*c);
      }
      if (!decision_ && tally_.support(round_, *c, coins()).size() >= q)
      {
        decide(round_, *c, out);
        return;
      }
      if (config_.mode.combine_messages)
      {
        ++round_;
        phase_ = Phase::await_aux;
      }
      else
      {
        advance_round(out);
      }
      break;
    }

    default:
      return;
    }
  }
}

void Process::advance_round(ProtocolOutput &out)
{
  ++round_;
  phase_ = Phase::await_aux;
  broadcast_aux(round_, *est_, std::nullopt, out);
}

void Process::broadcast_aux(Round round, AuxValue value, std::optional<CoinShare> coin,
                            ProtocolOutput &out)
{
  AuxMsg aux{config_.instance, round, value};
  auto   proofs = try_build_proofs(round, value);

  auto hypotheses = validity::missing_coins(round, coins());
  if (hypotheses.empty())
  {
    if (validity::check_vote(aux, proofs, coins(), config_.params).verdict != validity::Verdict::valid)
    {
      throw std::logic_error("own AUX(" + std::to_string(round) + ", " + to_string(value) +
                             ") fails validation");
    }
  }
  else
  {
    for (auto h : {Bin::zero, Bin::one})
    {
      auto guess = coins();
      guess.set(round - 1, h);
      if (validity::check_vote(aux, proofs, guess, config_.params).verdict != validity::Verdict::valid)
      {
        throw std::logic_error("own AUX(" + std::to_string(round) + ", " + to_string(value) +
                               ") fails validation for coin " + to_string(h));
      }
    }
  }

  sent_[{round, value}] = proofs;
  participation_        = std::max(participation_, round);

  AuxProofMsg msg{sign_aux(signer_, aux), config_.mode.include_proofs ? proofs : std::vector<SignedAux>{}};
  if (coin)
  {
    out.out.push_back(Outbound{std::nullopt, CombinedMsg{*coin, std::move(msg)}});
  }
  else
  {
    out.out.push_back(Outbound{std::nullopt, std::move(msg)});
  }
}

std::vector<SignedAux> Process::try_build_proofs(Round round, AuxValue value) const
{
  return validity::build_proofs(round, value, store_, coins(), config_.params,
                                config_.mode.combine_messages);
}

std::vector<SignedAux> Process::own_proofs(Round round, AuxValue value) const
{
  auto it = sent_.find({round, value});
  return it == sent_.end() ? std::vector<SignedAux>{} : it->second;
}

void Process::decide(Round round, Bin value, ProtocolOutput &out)
{
  decision_   = Decision{round, value, false};
  out.decided = decision_;
  proof_      = make_decision_proof(round, value);
  if (config_.mode.lazy_stop)
  {
    phase_      = Phase::decided;
    bool behind = false;
    for (ProcessId p = 0; p < config_.params.n; ++p)
    {
      behind = behind || (p != id() && peak_[p] > participation_);
    }
    if (!behind)
    {
      return;
    }
  }
  release_proof(std::nullopt, out);
  phase_      = Phase::stopped;
  out.stopped = true;
}

DecisionProof Process::make_decision_proof(Round round, Bin value) const
{
  DecisionProof proof;
  proof.instance = config_.instance;
  proof.round    = round;
  proof.value    = value;

  SignerSet taken(config_.params.n);
  bool      uses_prev = false;
  for (auto const &v : store_.at_round(round))
  {
    if (proof.votes.size() == config_.params.quorum())
    {
      break;
    }
    if (taken.contains(v.signer()) || !tally_.contains(round, v.aux.value, v.signer()) ||
        resolve_vote(v.aux, coins()) != value)
    {
      continue;
    }
    taken.insert(v.signer());
    uses_prev = uses_prev || v.aux.value == AuxValue::c_val;
    proof.votes.push_back(v);
  }
  if (proof.votes.size() < config_.params.quorum())
  {
    throw std::logic_error("decision without n - t supporting votes");
  }
  proof.coin = *coin_.aggregate(round);
  if (uses_prev)
  {
    proof.prev_coin = *coin_.aggregate(round - 1);
  }
  canonicalize(proof.votes);
  return proof;
}

bool Process::check_decision_proof(DecisionProof const &proof) const
{
  auto const &provider = signer_.provider();
  auto const &source   = coin_.source();
  if (proof.instance != config_.instance || proof.round == 0)
  {
    return false;
  }
  std::optional<Bin> prev;
  try
  {
    if (source.bit(provider, proof.coin, proof.instance, proof.round) != proof.value)
    {
      return false;
    }
    if (proof.prev_coin)
    {
      if (proof.round < 2)
      {
        return false;
      }
      prev = source.bit(provider, *proof.prev_coin, proof.instance, proof.round - 1);
    }
  }
  catch (crypto::InvalidSignature const &)
  {
    return false;
  }

  SignerSet signers(config_.params.n);
  for (auto const &v : proof.votes)
  {
    bool counts = v.aux.instance == proof.instance && v.aux.round == proof.round &&
                  v.signer() < config_.params.n &&
                  (v.aux.value == to_aux(proof.value) || (v.aux.value == AuxValue::c_val && prev == proof.value));
    if (!counts)
    {
      return false;
    }
    if (!verified_.contains(v) && !verify_aux(provider, v))
    {
      return false;
    }
    signers.insert(v.signer());
  }
  return signers.size() >= config_.params.quorum();
}

void Process::release_proof(std::optional<ProcessId> to, ProtocolOutput &out)
{
  out.out.push_back(Outbound{to, *proof_});
  ++stats_.decision_proofs_sent;
  if (to)
  {
    proof_sent_to_.insert(*to);
  }
  else
  {
    for (ProcessId p = 0; p < config_.params.n; ++p)
    {
      proof_sent_to_.insert(p);
    }
  }
}

std::uint64_t Process::digest() const
{
  std::uint64_t h = kFnvOffset;
  fnv(h, id());
  fnv(h, static_cast<std::uint64_t>(phase_));
  fnv(h, round_);
  fnv(h, participation_);
  fnv(h, est_ ? static_cast<std::uint64_t>(*est_) : 0xff);
  fnv(h, decision_ ? (std::uint64_t{decision_->round} << 2 | static_cast<std::uint64_t>(decision_->value) << 1 |
                      (decision_->adopted ? 1 : 0))
                   : ~std::uint64_t{0});
  fnv(h, coins().revealed());
  fnv(h, coins().highest());
  fnv(h, store_.size());
  fnv(h, stats_.accepted);
  fnv(h, deferred_.size());
  fnv(h, awaiting_.size());
  return h;
}

}  // namespace bbc
