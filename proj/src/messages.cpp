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

#include "bbc/messages.hpp"

#include <algorithm>
#include <map>

namespace bbc {
namespace {

constexpr std::uint8_t kAuxSigningDomain  = 'A';
constexpr std::uint8_t kCoinSigningDomain = 'C';

bool canonical_less(SignedAux const &a, SignedAux const &b)
{
  if (a.signer() != b.signer())
  {
    return a.signer() < b.signer();
  }
  if (a.aux.value != b.aux.value)
  {
    return a.aux.value < b.aux.value;
  }
  if (a.aux.round != b.aux.round)
  {
    return a.aux.round < b.aux.round;
  }
  return a < b;
}

class Writer
{
public:
  explicit Writer(Bytes &out)
    : out_{out}
  {}

  void u8(std::uint8_t v)
  {
    out_.push_back(v);
  }

  void u32(std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i)
    {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }

  template <std::size_t N>
  void raw(std::array<std::uint8_t, N> const &a)
  {
    out_.insert(out_.end(), a.begin(), a.end());
  }

  void signature(crypto::Signature const &sig)
  {
    u32(sig.signer);
    raw(sig.digest);
    raw(sig.mac);
  }

  void tsig(crypto::ThresholdSignature const &sig)
  {
    raw(sig.digest);
    raw(sig.aggregate);
  }

  void aux(AuxMsg const &a)
  {
    raw(a.instance);
    u32(a.round);
    u8(static_cast<std::uint8_t>(a.value));
  }

  void signed_aux(SignedAux const &v)
  {
    aux(v.aux);
    signature(v.sig);
  }

  void set(std::vector<SignedAux> const &items)
  {
    auto sorted = items;
    canonicalize(sorted);
    u32(static_cast<std::uint32_t>(sorted.size()));
    for (auto const &item : sorted)
    {
      signed_aux(item);
    }
  }

  void aux_proof(AuxProofMsg const &m)
  {
    signed_aux(m.vote);
    set(m.proofs);
  }

  void coin(CoinShare const &c)
  {
    raw(c.instance);
    u32(c.round);
    signature(c.sig);
  }

private:
  Bytes &out_;
};

class Reader
{
public:
  Reader(ByteView in, DecodeLimits limits)
    : in_{in}
    , limits_{limits}
  {}

  void need(std::size_t n) const
  {
    if (in_.size() - pos_ < n)
    {
      throw MalformedMessage("truncated message");
    }
  }

  std::uint8_t u8()
  {
    need(1);
    return in_[pos_++];
  }

  std::uint32_t u32()
  {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
    {
      v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    }
    return v;
  }

  template <std::size_t N>
  void raw(std::array<std::uint8_t, N> &a)
  {
    need(N);
    std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), N, a.begin());
    pos_ += N;
  }

  AuxValue aux_value()
  {
    auto v = u8();
    if (v > static_cast<std::uint8_t>(AuxValue::c_val))
    {
      throw MalformedMessage("aux value out of range");
    }
    return static_cast<AuxValue>(v);
  }

  Bin bin()
  {
    auto v = u8();
    if (v > 1)
    {
      throw MalformedMessage("binary value out of range");
    }
    return static_cast<Bin>(v);
  }

  crypto::Signature signature()
  {
    crypto::Signature sig;
    sig.signer = u32();
    raw(sig.digest);
    raw(sig.mac);
    if (limits_.n != 0 && sig.signer >= limits_.n)
    {
      throw MalformedMessage("signer index out of range");
    }
    return sig;
  }

  crypto::ThresholdSignature tsig()
  {
    crypto::ThresholdSignature sig;
    raw(sig.digest);
    raw(sig.aggregate);
    return sig;
  }

  AuxMsg aux()
  {
    AuxMsg a;
    raw(a.instance);
    a.round = u32();
    a.value = aux_value();
    return a;
  }

  SignedAux signed_aux()
  {
    SignedAux v;
    v.aux = aux();
    v.sig = signature();
    return v;
  }

  std::vector<SignedAux> set()
  {
    auto count = u32();
    if (limits_.n != 0 && count > limits_.max_set())
    {
      throw MalformedMessage("signed set exceeds limit");
    }
    // Each element is at least 105 bytes; reject absurd counts before allocating.
    need(static_cast<std::size_t>(count) * 105);
    std::vector<SignedAux> items;
    items.reserve(count);
    std::map<Round, std::uint32_t> per_round;
    for (std::uint32_t i = 0; i < count; ++i)
    {
      items.push_back(signed_aux());
      if (i > 0 && !canonical_less(items[i - 1], items[i]))
      {
        throw MalformedMessage("signed set not in canonical order");
      }
      if (limits_.n != 0 && ++per_round[items.back().aux.round] > limits_.n)
      {
        throw MalformedMessage("more than n votes for one round");
      }
    }
    return items;
  }

  AuxProofMsg aux_proof()
  {
    AuxProofMsg m;
    m.vote   = signed_aux();
    m.proofs = set();
    return m;
  }

  CoinShare coin()
  {
    CoinShare c;
    raw(c.instance);
    c.round = u32();
    c.sig   = signature();
    return c;
  }

  void finish() const
  {
    if (pos_ != in_.size())
    {
      throw MalformedMessage("trailing bytes");
    }
  }

private:
  ByteView     in_;
  DecodeLimits limits_;
  std::size_t  pos_ = 0;
};

}  // namespace

MessageKind kind_of(Message const &msg)
{
  return static_cast<MessageKind>(msg.index() + 1);
}

std::string_view kind_name(MessageKind kind)
{
  switch (kind)
  {
  case MessageKind::aux:
    return "aux";
  case MessageKind::coin:
    return "coin";
  case MessageKind::combined:
    return "combined";
  case MessageKind::decision_proof:
    return "decision_proof";
  case MessageKind::proof_request:
    return "proof_request";
  case MessageKind::proof_response:
    return "proof_response";
  }
  return "unknown";
}

Round round_of(Message const &msg)
{
  struct Visitor
  {
    Round operator()(AuxProofMsg const &m) const
    {
      return m.vote.aux.round;
    }
    Round operator()(CoinShare const &m) const
    {
      return m.round;
    }
    Round operator()(CombinedMsg const &m) const
    {
      return m.aux.vote.aux.round;
    }
    Round operator()(DecisionProof const &m) const
    {
      return m.round;
    }
    Round operator()(ProofRequest const &m) const
    {
      return m.round;
    }
    Round operator()(ProofResponse const &m) const
    {
      return m.round;
    }
  };
  return std::visit(Visitor{}, msg);
}

Bytes signing_bytes(AuxMsg const &aux)
{
  Bytes  out;
  Writer w(out);
  w.u8(kAuxSigningDomain);
  w.aux(aux);
  return out;
}

Bytes coin_signing_bytes(InstanceTag const &instance, Round round)
{
  Bytes  out;
  Writer w(out);
  w.u8(kCoinSigningDomain);
  w.raw(instance);
  w.u32(round);
  return out;
}

SignedAux sign_aux(crypto::Signer const &signer, AuxMsg const &aux)
{
  return SignedAux{aux, signer.sign(signing_bytes(aux))};
}

bool verify_aux(crypto::Provider const &provider, SignedAux const &vote)
{
  return provider.verify(vote.sig, vote.signer(), signing_bytes(vote.aux));
}

void canonicalize(std::vector<SignedAux> &set)
{
  std::sort(set.begin(), set.end(), canonical_less);
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

Bytes encode(Message const &msg)
{
  Bytes  out;
  Writer w(out);
  w.u8(static_cast<std::uint8_t>(kind_of(msg)));
  struct Visitor
  {
    Writer &w;
    void    operator()(AuxProofMsg const &m) const
    {
      w.aux_proof(m);
    }
    void operator()(CoinShare const &m) const
    {
      w.coin(m);
    }
    void operator()(CombinedMsg const &m) const
    {
      w.coin(m.coin);
      w.aux_proof(m.aux);
    }
    void operator()(DecisionProof const &m) const
    {
      w.raw(m.instance);
      w.u32(m.round);
      w.u8(static_cast<std::uint8_t>(m.value));
      w.set(m.votes);
      w.tsig(m.coin);
      w.u8(m.prev_coin ? 1 : 0);
      if (m.prev_coin)
      {
        w.tsig(*m.prev_coin);
      }
    }
    void operator()(ProofRequest const &m) const
    {
      w.raw(m.instance);
      w.u32(m.round);
      w.u8(static_cast<std::uint8_t>(m.value));
      w.u32(m.requester);
    }
    void operator()(ProofResponse const &m) const
    {
      w.raw(m.instance);
      w.u32(m.round);
      w.u8(static_cast<std::uint8_t>(m.value));
      w.set(m.proofs);
    }
  };
  std::visit(Visitor{w}, msg);
  return out;
}

Message decode(ByteView bytes, DecodeLimits limits)
{
  Reader r(bytes, limits);
  auto   tag = r.u8();
  Message msg;
  switch (static_cast<MessageKind>(tag))
  {
  case MessageKind::aux:
    msg = r.aux_proof();
    break;
  case MessageKind::coin:
    msg = r.coin();
    break;
  case MessageKind::combined:
  {
    CombinedMsg m;
    m.coin = r.coin();
    m.aux  = r.aux_proof();
    msg    = std::move(m);
    break;
  }
  case MessageKind::decision_proof:
  {
    DecisionProof m;
    r.raw(m.instance);
    m.round = r.u32();
    m.value = r.bin();
    m.votes = r.set();
    m.coin  = r.tsig();
    auto has_prev = r.u8();
    if (has_prev > 1)
    {
      throw MalformedMessage("bad optional flag");
    }
    if (has_prev == 1)
    {
      m.prev_coin = r.tsig();
    }
    msg = std::move(m);
    break;
  }
  case MessageKind::proof_request:
  {
    ProofRequest m;
    r.raw(m.instance);
    m.round     = r.u32();
    m.value     = r.aux_value();
    m.requester = r.u32();
    msg         = m;
    break;
  }
  case MessageKind::proof_response:
  {
    ProofResponse m;
    r.raw(m.instance);
    m.round  = r.u32();
    m.value  = r.aux_value();
    m.proofs = r.set();
    msg      = std::move(m);
    break;
  }
  default:
    throw MalformedMessage("unknown message tag " + std::to_string(tag));
  }
  r.finish();
  return msg;
}

void encode_signed_aux(Bytes &out, SignedAux const &vote)
{
  Writer w(out);
  w.signed_aux(vote);
}

SignedAux decode_signed_aux(ByteView bytes)
{
  Reader r(bytes, DecodeLimits{});
  auto   v = r.signed_aux();
  r.finish();
  return v;
}

}  // namespace bbc
