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
#include "bbc/trace.hpp"

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bbc::sim {

enum class AdversaryKind : std::uint8_t
{
  fifo,
  random,
  heuristic,
};

enum class FaultKind : std::uint8_t
{
  crash,
  silent,
  equivocate,
  garbage,
  flip_value,
};

std::string   to_string(AdversaryKind kind);
AdversaryKind parse_adversary(std::string_view text);
std::string   to_string(FaultKind kind);
FaultKind     parse_fault_kind(std::string_view text);

struct FaultSpec
{
  ProcessId process = 0;
  FaultKind kind    = FaultKind::silent;
  /// Simulator step at which a crash fault stops the process.
  std::uint64_t crash_step = 0;

  bool operator==(FaultSpec const &) const = default;
};

/// Parses "kind:pid[@step],..." e.g. "crash:3@40,equivocate:2". An empty
/// string means no faults.
std::vector<FaultSpec> parse_faults(std::string_view text);
std::string            format_faults(std::vector<FaultSpec> const &faults);

struct SimConfig
{
  Params                   params;
  ModeFlags                mode;
  std::vector<Bin>         proposals;
  AdversaryKind            adversary = AdversaryKind::fifo;
  /// Largest number of younger deliveries allowed to overtake a queued
  /// event; 0 selects 50 n.
  std::uint64_t            fairness_bound = 0;
  std::vector<FaultSpec>   faults;
  std::uint64_t            seed     = 0;
  std::string              provider = "mock-prf";
  std::optional<std::uint64_t> coin_override;
  std::uint64_t            step_cap = 1'000'000;
  /// Test policy: deliveries to this process wait until nothing else is
  /// queued, and it receives coin shares and decision proofs before votes.
  std::optional<ProcessId> delayed;
  Round                    horizon      = 64;
  bool                     record_trace = true;

  std::uint64_t effective_fairness() const noexcept
  {
    return fairness_bound == 0 ? 50ULL * params.n : fairness_bound;
  }

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;

  bool faulty(ProcessId p) const;

  nlohmann::ordered_json to_json() const;
  static SimConfig       from_json(nlohmann::json const &j);

  bool operator==(SimConfig const &) const = default;
};

/// Per-instance domain tag derived from the run seed.
InstanceTag instance_tag(std::uint64_t seed);

/// Seed of the signing provider for a run.
std::uint64_t provider_seed(std::uint64_t seed);

enum class RunStatus : std::uint8_t
{
  finished,
  stalled,
};

struct ProcessResult
{
  ProcessId               id     = 0;
  bool                    honest = true;
  bool                    crashed = false;
  Bin                     proposal = Bin::zero;
  std::optional<Decision> decision;
  Round                   participation = 0;
  Phase                   phase         = Phase::idle;
  ProcessStats            stats;
  std::size_t             pending_deferred = 0;
  std::size_t             pending_requests = 0;
  std::uint64_t           digest           = 0;

  bool operator==(ProcessResult const &) const = default;
};

struct InstanceResult
{
  RunStatus   status = RunStatus::finished;
  std::string stall_reason;
  std::uint64_t steps = 0;

  std::vector<ProcessResult> processes;

  /// Network copies to other processes (self-delivery excluded).
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent    = 0;
  std::array<std::uint64_t, 7> sent_by_kind{};
  /// Honest broadcasts carrying votes or coin shares, keyed by
  /// (process, round) and attributed to the AUX round they carry (coin
  /// shares alone to their own round).
  std::map<std::pair<ProcessId, Round>, std::uint32_t> broadcasts;
  std::uint64_t malformed_dropped = 0;
  /// Largest number of younger deliveries that overtook a delivered event.
  std::uint64_t max_postponement = 0;

  Trace trace;

  bool finished() const noexcept
  {
    return status == RunStatus::finished;
  }

  /// Same outcome ignoring the trace.
  bool same_outcome(InstanceResult const &other) const;
};

InstanceResult run_instance(SimConfig const &config);

/// Re-executes the run described by the trace header, choosing every
/// delivery from the recorded sequence numbers, and checks each produced
/// record against the stored one. Throws ReplayDivergence on the first
/// difference.
InstanceResult replay(Trace const &trace);

/// As above, but first requires the header to describe `expected`; throws
/// ConfigError otherwise.
InstanceResult replay(Trace const &trace, SimConfig const &expected);

}  // namespace bbc::sim
