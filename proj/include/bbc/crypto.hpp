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

#include "bbc/types.hpp"

#include <compare>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace bbc::crypto {

/// A process signature over one message. `digest` is the hash of the signed
/// bytes so shares can be grouped and checked without the original payload.
struct Signature
{
  ProcessId signer = 0;
  Digest    digest{};
  Digest    mac{};

  auto operator<=>(Signature const &) const = default;
};

/// The unique (n - t) aggregate for one message digest.
struct ThresholdSignature
{
  Digest digest{};
  Digest aggregate{};

  auto operator<=>(ThresholdSignature const &) const = default;
};

class ThresholdUnavailable : public Error
{
public:
  using Error::Error;
};

class MixedMessages : public Error
{
public:
  using Error::Error;
};

class InvalidSignature : public Error
{
public:
  using Error::Error;
};

/// Plain (unkeyed) 256-bit hash. Also serves as the random oracle.
Digest hash(ByteView data);

/// Key material for the deterministic test provider.
struct KeyRing
{
  Params              params;
  std::uint64_t       master_seed = 0;
  std::vector<Digest> signing_keys;
  Digest              threshold_key{};

  static KeyRing derive(Params params, std::uint64_t master_seed);
};

/// Signing, verification, (n - t) aggregation and coin derivation.
///
/// Implementations are immutable once built and may be shared between
/// threads. Every adapter must pass the conformance suite in tests/.
class Provider
{
public:
  virtual ~Provider() = default;

  virtual std::string_view name() const   = 0;
  virtual Params           params() const = 0;

  /// Throws ConfigError for an unknown signer.
  virtual Signature sign(ProcessId signer, ByteView message) const = 0;

  /// Never throws; anything malformed simply fails to verify.
  virtual bool verify(Signature const &sig, ProcessId signer, ByteView message) const = 0;

  /// Combines shares over a single message. Duplicates from one signer count
  /// once; invalid shares are ignored. Throws ThresholdUnavailable when fewer
  /// than n - t distinct valid shares remain and MixedMessages when the
  /// shares disagree on the message.
  virtual ThresholdSignature aggregate(std::span<Signature const> shares) const = 0;

  virtual bool verify_threshold(ThresholdSignature const &tsig, ByteView message) const = 0;

  /// First bit of the oracle hash of the aggregate. Throws InvalidSignature
  /// if the aggregate does not verify against its digest.
  virtual Bin coin_bit(ThresholdSignature const &tsig) const = 0;
};

/// Keyed-PRF realisation of the idealised signature assumptions.
///
///   share(i, m)  = PRF(key_i,  H(m))
///   aggregate(m) = PRF(key_thr, H(m))
///
/// The aggregate is computable from the master key alone, so the threshold
/// rule is enforced by `aggregate` refusing to emit it below n - t shares.
class MockPrfProvider final : public Provider
{
public:
  static constexpr std::string_view kName = "mock-prf";

  MockPrfProvider(Params params, std::uint64_t master_seed);

  std::string_view   name() const override;
  Params             params() const override;
  Signature          sign(ProcessId signer, ByteView message) const override;
  bool               verify(Signature const &sig, ProcessId signer, ByteView message) const override;
  ThresholdSignature aggregate(std::span<Signature const> shares) const override;
  bool               verify_threshold(ThresholdSignature const &tsig, ByteView message) const override;
  Bin                coin_bit(ThresholdSignature const &tsig) const override;

  KeyRing const &keyring() const noexcept
  {
    return ring_;
  }

private:
  bool share_valid(Signature const &sig) const;
  bool threshold_valid(ThresholdSignature const &tsig) const;

  KeyRing ring_;
};

/// A capability to sign as exactly one process. Processes (faulty ones
/// included) only ever receive their own Signer.
class Signer
{
public:
  Signer(std::shared_ptr<Provider const> provider, ProcessId id);

  Signature sign(ByteView message) const;
  ProcessId id() const noexcept
  {
    return id_;
  }
  Provider const &provider() const noexcept
  {
    return *provider_;
  }
  std::shared_ptr<Provider const> const &shared_provider() const noexcept
  {
    return provider_;
  }

private:
  std::shared_ptr<Provider const> provider_;
  ProcessId                       id_;
};

/// Builds a provider by name ("mock-prf"). Throws ConfigError otherwise.
std::shared_ptr<Provider const> make_provider(std::string_view name, Params params,
                                              std::uint64_t master_seed);

std::vector<std::string> provider_names();

}  // namespace bbc::crypto
