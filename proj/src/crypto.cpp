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

#include "bbc/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstring>

namespace bbc::crypto {
namespace {

bool sodium_ready()
{
  static bool const ready = sodium_init() >= 0;
  return ready;
}

Digest keyed_hash(Digest const &key, ByteView data)
{
  Digest out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), key.data(), key.size());
  return out;
}

void append_le(Bytes &out, std::uint64_t value, std::size_t width)
{
  for (std::size_t i = 0; i < width; ++i)
  {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

Bytes key_label(std::string_view label, std::uint64_t seed)
{
  Bytes out(label.begin(), label.end());
  append_le(out, seed, 8);
  return out;
}

}  // namespace

Digest hash(ByteView data)
{
  (void)sodium_ready();
  Digest out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

KeyRing KeyRing::derive(Params params, std::uint64_t master_seed)
{
  KeyRing ring;
  ring.params      = Params::make(params.n, params.t);
  ring.master_seed = master_seed;
  ring.signing_keys.reserve(params.n);
  for (ProcessId i = 0; i < params.n; ++i)
  {
    auto label = key_label("bbc/sig", master_seed);
    append_le(label, i, 4);
    ring.signing_keys.push_back(hash(label));
  }
  ring.threshold_key = hash(key_label("bbc/thr", master_seed));
  return ring;
}

MockPrfProvider::MockPrfProvider(Params params, std::uint64_t master_seed)
  : ring_{KeyRing::derive(params, master_seed)}
{}

std::string_view MockPrfProvider::name() const
{
  return kName;
}

Params MockPrfProvider::params() const
{
  return ring_.params;
}

Signature MockPrfProvider::sign(ProcessId signer, ByteView message) const
{
  if (signer >= ring_.params.n)
  {
    throw ConfigError("unknown signer index " + std::to_string(signer));
  }
  Signature sig;
  sig.signer = signer;
  sig.digest = hash(message);
  sig.mac    = keyed_hash(ring_.signing_keys[signer], sig.digest);
  return sig;
}

bool MockPrfProvider::share_valid(Signature const &sig) const
{
  if (sig.signer >= ring_.params.n)
  {
    return false;
  }
  auto expected = keyed_hash(ring_.signing_keys[sig.signer], sig.digest);
  return sodium_memcmp(expected.data(), sig.mac.data(), expected.size()) == 0;
}

bool MockPrfProvider::verify(Signature const &sig, ProcessId signer, ByteView message) const
{
  if (sig.signer != signer || hash(message) != sig.digest)
  {
    return false;
  }
  return share_valid(sig);
}

ThresholdSignature MockPrfProvider::aggregate(std::span<Signature const> shares) const
{
  if (shares.empty())
  {
    throw ThresholdUnavailable("no shares supplied");
  }
  auto const &digest = shares.front().digest;
  SignerSet   signers(ring_.params.n);
  for (auto const &share : shares)
  {
    if (share.digest != digest)
    {
      throw MixedMessages("shares cover different messages");
    }
    if (share_valid(share))
    {
      signers.insert(share.signer);
    }
  }
  if (signers.size() < ring_.params.quorum())
  {
    throw ThresholdUnavailable("have " + std::to_string(signers.size()) + " distinct shares, need " +
                               std::to_string(ring_.params.quorum()));
  }
  return ThresholdSignature{digest, keyed_hash(ring_.threshold_key, digest)};
}

bool MockPrfProvider::threshold_valid(ThresholdSignature const &tsig) const
{
  auto expected = keyed_hash(ring_.threshold_key, tsig.digest);
  return sodium_memcmp(expected.data(), tsig.aggregate.data(), expected.size()) == 0;
}

bool MockPrfProvider::verify_threshold(ThresholdSignature const &tsig, ByteView message) const
{
  return hash(message) == tsig.digest && threshold_valid(tsig);
}

Bin MockPrfProvider::coin_bit(ThresholdSignature const &tsig) const
{
  if (!threshold_valid(tsig))
  {
    throw InvalidSignature("threshold signature does not verify");
  }
  auto h = hash(tsig.aggregate);
  return bin_of((h[0] & 0x80U) != 0);
}

Signer::Signer(std::shared_ptr<Provider const> provider, ProcessId id)
  : provider_{std::move(provider)}
  , id_{id}
{
  if (!provider_ || id_ >= provider_->params().n)
  {
    throw ConfigError("signer index out of range");
  }
}

Signature Signer::sign(ByteView message) const
{
  return provider_->sign(id_, message);
}

std::shared_ptr<Provider const> make_provider(std::string_view name, Params params,
                                              std::uint64_t master_seed)
{
  if (name == MockPrfProvider::kName)
  {
    return std::make_shared<MockPrfProvider>(params, master_seed);
  }
  throw ConfigError("unknown crypto provider '" + std::string(name) + "'");
}

std::vector<std::string> provider_names()
{
  return {std::string(MockPrfProvider::kName)};
}

}  // namespace bbc::crypto
