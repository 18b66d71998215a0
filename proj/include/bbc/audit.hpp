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

#include "bbc/simnet.hpp"

#include <string>
#include <vector>

namespace bbc::sim {

enum class Check : std::uint8_t
{
  agreement,
  validity,
  termination,
  unanimity,
  double_quorum,
  provability,
  decision_window,
  coins,
  fairness,
  reliability,
};

inline constexpr std::size_t kCheckCount = 10;

std::string to_string(Check c);

struct Finding
{
  Check       check;
  std::string detail;
};

/// Mechanical property scan of one finished run. Checks needing the trace
/// (double_quorum, provability, decision_window, coins, fairness,
/// reliability) are skipped when the run was made without one.
///
/// - agreement, validity, termination: the three consensus properties on
///   honest processes; validity also requires every accepted vote of round
///   r >= 1 to stand for a value some honest process proposed.
/// - unanimity: with override coins and unanimous honest input v, every
///   honest decision is in the first round r >= 1 whose coin is v.
/// - double_quorum: per round, the honest-accepted vote cells of 0 and 1
///   never both reach n - t distinct signers.
/// - provability: an honest process accepted (r, b) only if b could be proven
///   in every earlier round r' >= 1 given the votes honest processes
///   actually signed plus every faulty signer.
/// - decision_window: decisions fall in the first deciding round or the
///   first later round with the same coin.
/// - coins: all processes agree on each revealed coin (and on the override
///   bits, when set).
/// - fairness: no delivered event was overtaken by more younger
///   deliveries than the bound.
/// - reliability: each delivery matches one send copy (bytes, sender,
///   target), nothing is delivered twice or to a crashed process.
std::vector<Finding> audit(SimConfig const &config, InstanceResult const &result);

std::size_t count(std::vector<Finding> const &findings, Check check);

}  // namespace bbc::sim
