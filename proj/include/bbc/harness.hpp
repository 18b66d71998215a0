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

#include "bbc/audit.hpp"
#include "bbc/simnet.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bbc::harness {

enum class CoinMode : std::uint8_t
{
  real,
  override_seeded,
};

std::string to_string(CoinMode m);
CoinMode    parse_coin_mode(std::string_view text);

struct ExperimentConfig
{
  std::vector<std::uint32_t>   ns = {4, 7, 10};
  /// Faults tolerated; unset means floor((n - 1) / 3) for each n.
  std::optional<std::uint32_t> t;
  std::uint32_t                instances = 50;
  std::uint32_t                warmup    = 5;
  /// "random", "zeros" or "ones".
  std::string                  proposals = "random";
  CoinMode                     coin      = CoinMode::override_seeded;
  ModeFlags                    mode;
  sim::AdversaryKind           adversary = sim::AdversaryKind::fifo;
  /// "none", a fault kind alone (t processes of that kind, highest ids
  /// first) or an explicit list "kind:pid[@step],...".
  std::string                  faults = "none";
  std::uint64_t                seed   = 1;
  std::uint64_t                fairness_bound = 0;
  std::uint64_t                step_cap       = 1'000'000;
  std::uint32_t                jobs           = 1;
  /// Also replay every measured instance and compare outcomes.
  bool                         check_replay = false;
  /// Directory for per-instance trace files; empty keeps none.
  std::string                  trace_dir;

  /// Throws ConfigError.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  /// Missing keys keep the values already in `base`.
  static ExperimentConfig from_json(nlohmann::json const &j, ExperimentConfig base);
  static ExperimentConfig from_json(nlohmann::json const &j);

  bool operator==(ExperimentConfig const &) const = default;
};

/// Simulator configuration of instance `index` (warmup instances first)
/// for group size n.
sim::SimConfig instance_config(ExperimentConfig const &config, std::uint32_t n, std::uint32_t index);

struct Row
{
  std::uint32_t n        = 0;
  std::uint32_t t        = 0;
  std::uint32_t index    = 0;
  std::uint64_t seed     = 0;
  std::string   proposals;
  std::string   status;
  int           value = -1;
  /// Largest decision round among honest processes.
  Round decision_round = 0;
  /// Largest round any honest process broadcast a vote for.
  Round         participation_round = 0;
  std::uint64_t steps               = 0;
  std::uint64_t messages            = 0;
  std::uint64_t bytes               = 0;
  std::uint64_t decision_proofs     = 0;
  std::uint64_t dropped             = 0;
  std::uint64_t deferred            = 0;
  std::uint64_t proof_requests      = 0;
  std::uint64_t violations          = 0;

  bool operator==(Row const &) const = default;
};

struct Stat
{
  double min = 0;
  double avg = 0;
  double max = 0;

  bool operator==(Stat const &) const = default;
};

struct Aggregate
{
  std::uint32_t n         = 0;
  std::uint64_t instances = 0;
  Stat          decision_round;
  Stat          participation_round;
  std::uint64_t messages_total = 0;
  double        messages_avg   = 0;
  std::uint64_t bytes_total    = 0;
  double        bytes_avg      = 0;
  std::uint64_t dropped        = 0;
  std::uint64_t deferred       = 0;
  std::uint64_t proof_requests = 0;
  std::uint64_t decision_proofs = 0;
  std::uint64_t violations     = 0;

  bool operator==(Aggregate const &) const = default;
};

/// Aggregates per n, in order of first appearance.
std::vector<Aggregate> aggregate(std::vector<Row> const &rows);

struct Report
{
  ExperimentConfig       config;
  std::vector<Aggregate> groups;
  std::vector<Row>       rows;
  /// Human-readable property violations, at most a few per instance.
  std::vector<std::string> failures;

  /// No violation and no stalled instance.
  bool green() const;
};

/// One executed instance with everything the acceptance checks need.
struct Outcome
{
  sim::SimConfig            config;
  sim::InstanceResult       result;
  std::vector<sim::Finding> findings;
  bool                      replay_ok = true;
  Row                       row;
};

/// Runs and audits one instance. Traces are dropped unless `keep_trace`.
Outcome run_one(sim::SimConfig const &config, bool check_replay, bool keep_trace);

/// Row of an audited instance.
Row make_row(sim::SimConfig const &config, sim::InstanceResult const &result, std::size_t violations,
             std::uint32_t index);

/// Warmup instances first (excluded), then the measured ones.
Report run_experiment(ExperimentConfig const &config);

/// Runs `work(i)` for i in [0, count) on up to `jobs` threads.
void parallel_for(std::size_t count, std::uint32_t jobs, std::function<void(std::size_t)> const &work);

struct ModeDiff
{
  Report        base;
  Report        combined;
  std::uint64_t pairs         = 0;
  std::uint64_t value_matches = 0;
  /// Combined rows with participation round = decision round + 1.
  std::uint64_t participation_plus_one = 0;
  /// Honest combined-mode processes that decided on their own, and how
  /// many of them took part in exactly one round after deciding.
  std::uint64_t self_deciders          = 0;
  std::uint64_t self_deciders_plus_one = 0;
  /// Largest number of vote/coin broadcasts one honest process made for
  /// one round r >= 1.
  std::uint32_t max_broadcasts_base     = 0;
  std::uint32_t max_broadcasts_combined = 0;
  double        decision_round_delta    = 0;
  double        messages_delta          = 0;

  bool all_match() const noexcept
  {
    return pairs > 0 && value_matches == pairs;
  }
};

/// Base and combined mode over identical seeds and coins.
ModeDiff compare_modes(ExperimentConfig const &config);

enum class Format : std::uint8_t
{
  json,
  csv,
};

Format parse_format(std::string_view text);

/// Stable field order. JSON carries config, per-n aggregates and rows; CSV
/// has a header and one line per measured instance.
void emit(std::ostream &out, Report const &report, Format format);
std::string emit(Report const &report, Format format);

nlohmann::ordered_json to_json(ModeDiff const &diff);

/// Rows back from either format.
std::vector<Row> parse_rows(std::string const &text, Format format);

/// Aggregates as stored in a JSON report.
std::vector<Aggregate> parse_aggregates(std::string const &json_text);

}  // namespace bbc::harness
