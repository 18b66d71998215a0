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

#include "bbc/crypto.hpp"
#include "bbc/types.hpp"

#include <compare>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace bbc {

/// AUX(round, value) bound to one consensus instance.
struct AuxMsg
{
  InstanceTag instance{};
  Round       round = 0;
  AuxValue    value = AuxValue::zero;

  auto operator<=>(AuxMsg const &) const = default;
};

struct SignedAux
{
  AuxMsg            aux;
  crypto::Signature sig;

  ProcessId signer() const noexcept
  {
    return sig.signer;
  }

  auto operator<=>(SignedAux const &) const = default;
};

/// A vote plus the signed AUX messages that make it valid.
struct AuxProofMsg
{
  SignedAux              vote;
  std::vector<SignedAux> proofs;

  bool operator==(AuxProofMsg const &) const = default;
};

struct CoinShare
{
  InstanceTag       instance{};
  Round             round = 0;
  crypto::Signature sig;

  bool operator==(CoinShare const &) const = default;
};

/// COIN(r) piggybacked on AUX(r + 1).
struct CombinedMsg
{
  CoinShare   coin;
  AuxProofMsg aux;

  bool operator==(CombinedMsg const &) const = default;
};

/// n - t votes AUX(round, value) plus the round's coin aggregate whose bit
/// equals `value`. `prev_coin` accompanies votes carrying c_val, which
/// resolve to the coin of `round - 1`.
struct DecisionProof
{
  InstanceTag                               instance{};
  Round                                     round = 0;
  Bin                                       value = Bin::zero;
  std::vector<SignedAux>                    votes;
  crypto::ThresholdSignature                coin;
  std::optional<crypto::ThresholdSignature> prev_coin;

  bool operator==(DecisionProof const &) const = default;
};

struct ProofRequest
{
  InstanceTag instance{};
  Round       round     = 0;
  AuxValue    value     = AuxValue::zero;
  ProcessId   requester = 0;

  bool operator==(ProofRequest const &) const = default;
};

struct ProofResponse
{
  InstanceTag            instance{};
  Round                  round = 0;
  AuxValue               value = AuxValue::zero;
  std::vector<SignedAux> proofs;

  bool operator==(ProofResponse const &) const = default;
};

using Message =
    std::variant<AuxProofMsg, CoinShare, CombinedMsg, DecisionProof, ProofRequest, ProofResponse>;

enum class MessageKind : std::uint8_t
{
  aux            = 1,
  coin           = 2,
  combined       = 3,
  decision_proof = 4,
  proof_request  = 5,
  proof_response = 6,
};

MessageKind      kind_of(Message const &msg);
std::string_view kind_name(MessageKind kind);

/// Round the message belongs to; for combined messages, the AUX round.
Round round_of(Message const &msg);

/// Bytes covered by a vote signature.
Bytes signing_bytes(AuxMsg const &aux);

/// Bytes covered by a coin share and by the round's threshold signature.
Bytes coin_signing_bytes(InstanceTag const &instance, Round round);

SignedAux sign_aux(crypto::Signer const &signer, AuxMsg const &aux);
bool      verify_aux(crypto::Provider const &provider, SignedAux const &vote);

/// Sorts by (signer, value, round) and removes exact duplicates.
void canonicalize(std::vector<SignedAux> &set);

/// Bounds applied while decoding.
struct DecodeLimits
{
  std::uint32_t n = 0;

  /// Largest SignedAux set accepted in one message (2n).
  std::uint32_t max_set() const noexcept
  {
    return 2 * n;
  }
};

/// Canonical encoding: fixed field order, little-endian fixed-width integers,
/// sets in canonical order. Logically equal messages encode identically.
Bytes encode(Message const &msg);

/// Strict inverse of encode. Throws MalformedMessage on truncation, trailing
/// bytes, unknown tags, out-of-range values, non-canonical set order or a
/// set exceeding the limits.
Message decode(ByteView bytes, DecodeLimits limits);

/// Per-message-type building blocks, exposed for traces and tests.
void      encode_signed_aux(Bytes &out, SignedAux const &vote);
SignedAux decode_signed_aux(ByteView bytes);

}  // namespace bbc
