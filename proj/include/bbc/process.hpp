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

#include "bbc/coin.hpp"
#include "bbc/messages.hpp"
#include "bbc/tally.hpp"
#include "bbc/validity.hpp"

#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

namespace bbc {

struct ModeFlags
{
  /// Piggyback COIN(r) on AUX(r + 1); enables c_val votes.
  bool combine_messages = false;
  /// Ship proofs with every AUX. When off, receivers ask for them.
  bool include_proofs = true;
  /// Hold the decision proof until another process shows it lags behind.
  bool lazy_stop = true;

  bool operator==(ModeFlags const &) const = default;
};

enum class Phase : std::uint8_t
{
  idle,
  await_round0,
  await_aux,
  await_coin,
  decided,  // lazy stop: proof armed, waiting for a trigger
  stopped,
};

std::string to_string(Phase p);

struct Decision
{
  Round round = 0;
  Bin   value = Bin::zero;
  /// Decided by adopting another process's proof.
  bool adopted = false;

  bool operator==(Decision const &) const = default;
};

/// One message to send. An empty `to` is a broadcast to every process,
/// the sender included.
struct Outbound
{
  std::optional<ProcessId> to;
  Message                  msg;
};

/// A top-level vote that passed validation, with the binary value it
/// stood for at acceptance.
struct Accepted
{
  SignedAux vote;
  Bin       resolved = Bin::zero;
};

struct ProtocolOutput
{
  std::vector<Outbound>              out;
  std::vector<Accepted>              accepted;
  std::vector<std::pair<Round, Bin>> coins;
  std::optional<Decision>            decided;
  bool                               stopped = false;
  /// Inbound message discarded (bad signature, invalid, wrong mode...).
  bool dropped = false;

  void append(ProtocolOutput &&other);
};

struct ProcessStats
{
  std::uint64_t accepted              = 0;
  std::uint64_t dropped               = 0;
  std::uint64_t ignored               = 0;
  std::uint64_t deferred              = 0;
  std::uint64_t proof_requests_sent   = 0;
  std::uint64_t proof_responses_sent  = 0;
  std::uint64_t responses_resolved    = 0;
  std::uint64_t invalid_after_response = 0;
  std::uint64_t requests_unanswered   = 0;
  std::uint64_t decision_proofs_sent  = 0;
  std::uint64_t signature_checks      = 0;

  bool operator==(ProcessStats const &) const = default;
};

struct ProcessConfig
{
  Params      params;
  ModeFlags   mode;
  InstanceTag instance{};
  CoinSource  coin_source;
  /// Votes and coin shares further than this ahead of the local round are
  /// dropped.
  Round horizon = 64;
};

/// One honest participant, driven by delivered messages.
///
/// Every handler runs to completion and reports its effects in a
/// ProtocolOutput; nothing is sent behind the caller's back.
class Process
{
public:
  Process(ProcessConfig config, crypto::Signer signer);

  ProtocolOutput start(Bin proposal);

  /// Dispatches on the message type. `from` is the authenticated channel
  /// sender.
  ProtocolOutput on_message(ProcessId from, Message const &msg);

  ProtocolOutput on_aux(ProcessId from, AuxProofMsg const &msg);
  ProtocolOutput on_coin_share(ProcessId from, CoinShare const &share);
  ProtocolOutput on_combined(ProcessId from, CombinedMsg const &msg);
  ProtocolOutput on_decision_proof(ProcessId from, DecisionProof const &proof);
  ProtocolOutput on_proof_request(ProcessId from, ProofRequest const &req);
  ProtocolOutput on_proof_response(ProcessId from, ProofResponse const &resp);

  ProcessId id() const noexcept
  {
    return signer_.id();
  }
  Round round() const noexcept
  {
    return round_;
  }
  std::optional<AuxValue> estimate() const noexcept
  {
    return est_;
  }
  Phase phase() const noexcept
  {
    return phase_;
  }
  std::optional<Decision> const &decision() const noexcept
  {
    return decision_;
  }
  /// Highest round this process broadcast an AUX for.
  Round participation_round() const noexcept
  {
    return participation_;
  }
  bool halted() const noexcept
  {
    return phase_ == Phase::decided || phase_ == Phase::stopped;
  }

  CoinMap const &coins() const noexcept
  {
    return coin_.coins();
  }
  Tally const &tally() const noexcept
  {
    return tally_;
  }
  AuxStore const &store() const noexcept
  {
    return store_;
  }
  ProcessStats const &stats() const noexcept
  {
    return stats_;
  }
  ProcessConfig const &config() const noexcept
  {
    return config_;
  }
  std::optional<DecisionProof> const &decision_proof() const noexcept
  {
    return proof_;
  }

  /// Messages parked until a coin is revealed or proofs arrive.
  std::size_t pending_deferred() const noexcept
  {
    return deferred_.size();
  }
  std::size_t pending_requests() const noexcept
  {
    return awaiting_.size();
  }

  /// Proofs this process would attach to its own AUX(round, value).
  std::vector<SignedAux> own_proofs(Round round, AuxValue value) const;

  /// Builds proofs from the local store; used by faulty wrappers that want
  /// plausible votes. Throws validity::InsufficientStore.
  std::vector<SignedAux> try_build_proofs(Round round, AuxValue value) const;

  /// Summary hash of the protocol state, for traces.
  std::uint64_t digest() const;

private:
  struct Parked
  {
    ProcessId   from;
    AuxProofMsg msg;
  };

  bool verified(SignedAux const &vote);
  bool well_formed(ProcessId from, AuxProofMsg const &msg) const;
  void note_peak(ProcessId from, Round round);

  void           admit(ProcessId from, AuxProofMsg const &msg, ProtocolOutput &out);
  void           accept(AuxProofMsg const &msg, Bin resolved, ProtocolOutput &out);
  void           request_proofs(ProcessId from, AuxProofMsg const &msg, ProtocolOutput &out);
  void           retry_deferred(ProtocolOutput &out);
  void           retry_awaiting(ProtocolOutput &out);
  void           take_share(CoinShare const &share, ProtocolOutput &out);
  void           progress(ProtocolOutput &out);
  void           advance_round(ProtocolOutput &out);
  void           broadcast_aux(Round round, AuxValue value, std::optional<CoinShare> coin,
                               ProtocolOutput &out);
  void           decide(Round round, Bin value, ProtocolOutput &out);
  DecisionProof  make_decision_proof(Round round, Bin value) const;
  bool           check_decision_proof(DecisionProof const &proof) const;
  void           release_proof(std::optional<ProcessId> to, ProtocolOutput &out);
  ProtocolOutput halted_reaction(ProcessId from, Round round, bool request);

  ProcessConfig           config_;
  crypto::Signer          signer_;
  Phase                   phase_ = Phase::idle;
  Round                   round_ = 0;
  Round                   participation_ = 0;
  std::optional<AuxValue> est_;
  std::optional<Decision> decision_;

  Tally     tally_;
  AuxStore  store_;
  CoinState coin_;

  std::set<SignedAux>                               verified_;
  std::vector<Parked>                               deferred_;
  std::vector<Parked>                               awaiting_;
  std::set<std::tuple<ProcessId, Round, AuxValue>>  requested_;
  std::map<std::pair<Round, AuxValue>, std::vector<SignedAux>> sent_;

  std::optional<DecisionProof> proof_;
  SignerSet                    proof_sent_to_;
  /// Highest round seen in an authenticated vote or share, per sender.
  std::vector<Round> peak_;

  ProcessStats stats_;
};

}  // namespace bbc
