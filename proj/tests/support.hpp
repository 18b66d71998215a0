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

#include "bbc/process.hpp"

#include <memory>
#include <vector>

namespace bbc::testing {

/// Keys, signers and an instance tag for hand-driven processes.
struct Group
{
  Params                                  params;
  std::shared_ptr<crypto::Provider const> provider;
  InstanceTag                             tag{};
  std::vector<crypto::Signer>             signers;

  explicit Group(std::uint32_t n, std::uint32_t t, std::uint64_t seed = 11)
    : params{Params::make(n, t)}
    , provider{crypto::make_provider("mock-prf", params, seed)}
  {
    tag.fill(0x5a);
    for (ProcessId i = 0; i < n; ++i)
    {
      signers.emplace_back(provider, i);
    }
  }

  ProcessConfig config(ModeFlags mode = {}, std::optional<std::uint64_t> override_seed = {}) const
  {
    ProcessConfig c;
    c.params      = params;
    c.mode        = mode;
    c.instance    = tag;
    c.coin_source = CoinSource{override_seed};
    return c;
  }

  Process process(ProcessId i, ModeFlags mode = {}, std::optional<std::uint64_t> override_seed = {}) const
  {
    return Process(config(mode, override_seed), signers.at(i));
  }

  SignedAux vote(ProcessId who, Round r, AuxValue v) const
  {
    return sign_aux(signers.at(who), AuxMsg{tag, r, v});
  }

  SignedAux vote(ProcessId who, Round r, Bin b) const
  {
    return vote(who, r, to_aux(b));
  }

  AuxProofMsg aux(ProcessId who, Round r, AuxValue v, std::vector<SignedAux> proofs = {}) const
  {
    canonicalize(proofs);
    return AuxProofMsg{vote(who, r, v), std::move(proofs)};
  }

  AuxProofMsg aux(ProcessId who, Round r, Bin b, std::vector<SignedAux> proofs = {}) const
  {
    return aux(who, r, to_aux(b), std::move(proofs));
  }

  CoinShare share(ProcessId who, Round r) const
  {
    return make_share(signers.at(who), tag, r);
  }

  crypto::ThresholdSignature coin(Round r) const
  {
    std::vector<crypto::Signature> shares;
    for (ProcessId i = 0; i < params.quorum(); ++i)
    {
      shares.push_back(share(i, r).sig);
    }
    return provider->aggregate(shares);
  }

  Bin coin_bit(Round r) const
  {
    return provider->coin_bit(coin(r));
  }
};

inline std::vector<AuxProofMsg> aux_broadcasts(ProtocolOutput const &out)
{
  std::vector<AuxProofMsg> v;
  for (auto const &o : out.out)
  {
    if (auto const *a = std::get_if<AuxProofMsg>(&o.msg); a && !o.to)
    {
      v.push_back(*a);
    }
  }
  return v;
}

template <typename T>
std::size_t count_kind(ProtocolOutput const &out)
{
  std::size_t k = 0;
  for (auto const &o : out.out)
  {
    k += std::holds_alternative<T>(o.msg) ? 1 : 0;
  }
  return k;
}

}  // namespace bbc::testing
