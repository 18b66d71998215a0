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

#include "bbc/audit.hpp"
#include "bbc/simnet.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

using namespace bbc;
using namespace bbc::sim;

namespace {

SimConfig make_config(std::string const &proposals, std::uint64_t seed, AdversaryKind adversary = AdversaryKind::fifo,
                      std::string const &faults = "", ModeFlags mode = {})
{
  SimConfig c;
  auto const n = static_cast<std::uint32_t>(proposals.size());
  c.params     = Params::make(n, max_faults(n));
  c.mode       = mode;
  for (char ch : proposals)
  {
    c.proposals.push_back(ch == '1' ? Bin::one : Bin::zero);
  }
  c.adversary     = adversary;
  c.faults        = parse_faults(faults);
  c.seed          = seed;
  c.coin_override = derive_seed(seed, 0x636f696e);
  return c;
}

std::set<int> honest_values(InstanceResult const &r)
{
  std::set<int> v;
  for (auto const &p : r.processes)
  {
    if (p.honest)
    {
      v.insert(p.decision ? to_int(p.decision->value) : -1);
    }
  }
  return v;
}

std::string trace_text(Trace const &t)
{
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

}  // namespace

TEST_CASE("unanimous fault-free runs decide the proposal")
{
  for (auto adv : {AdversaryKind::fifo, AdversaryKind::random, AdversaryKind::heuristic})
  {
    for (char v : {'0', '1'})
    {
      auto cfg    = make_config(std::string(4, v), 3, adv);
      cfg.params  = Params::make(4, 0);
      auto result = run_instance(cfg);
      CHECK(result.finished());
      CHECK(honest_values(result) == std::set<int>{v - '0'});
      CHECK(audit(cfg, result).empty());
    }
  }
}

TEST_CASE("a crash at step zero leaves three agreeing processes")
{
  auto cfg    = make_config("0110", 2026, AdversaryKind::fifo, "crash:3@0");
  auto result = run_instance(cfg);
  REQUIRE(result.finished());
  CHECK(result.processes[3].crashed);
  CHECK_FALSE(result.processes[3].decision.has_value());
  auto values = honest_values(result);
  REQUIRE(values.size() == 1);
  // Regression value recorded from the first run of this configuration.
  CHECK(*values.begin() == 1);
  CHECK(audit(cfg, result).empty());
}

TEST_CASE("identical configurations give byte-identical traces")
{
  for (auto adv : {AdversaryKind::fifo, AdversaryKind::random, AdversaryKind::heuristic})
  {
    auto cfg = make_config("0110101", 17, adv, "equivocate:6,garbage:5");
    auto a   = run_instance(cfg);
    auto b   = run_instance(cfg);
    CHECK(trace_text(a.trace) == trace_text(b.trace));
    CHECK(a.same_outcome(b));
    auto other = cfg;
    other.seed = 18;
    CHECK(trace_text(run_instance(other).trace) != trace_text(a.trace));
  }
}

TEST_CASE("garbage is dropped and counted without harming honest progress")
{
  auto cfg    = make_config("0101", 9, AdversaryKind::random, "garbage:2");
  auto result = run_instance(cfg);
  CHECK(result.finished());
  CHECK(result.malformed_dropped + result.processes[0].stats.dropped + result.processes[1].stats.dropped +
            result.processes[3].stats.dropped >
        0);
  CHECK(honest_values(result).size() == 1);
  CHECK(audit(cfg, result).empty());
}

TEST_CASE("silent and equivocating processes cannot stop agreement")
{
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
  {
    for (auto faults : {"silent:6,silent:5", "equivocate:6,equivocate:0", "flip-value:1,garbage:4"})
    {
      for (auto adv : {AdversaryKind::random, AdversaryKind::heuristic})
      {
        auto cfg    = make_config("0110100", seed, adv, faults);
        auto result = run_instance(cfg);
        CAPTURE(seed);
        CAPTURE(faults);
        CHECK(result.finished());
        CHECK(honest_values(result).size() == 1);
        auto findings = audit(cfg, result);
        CHECK(findings.empty());
      }
    }
  }
}

TEST_CASE("replay reproduces the run")
{
  ModeFlags off{.combine_messages = true, .include_proofs = false, .lazy_stop = true};
  auto      cfg    = make_config("1001101", 5, AdversaryKind::heuristic, "crash:6@30,equivocate:2", off);
  auto      result = run_instance(cfg);
  auto      again  = replay(result.trace);
  CHECK(again.same_outcome(result));
  CHECK(trace_text(again.trace) == trace_text(result.trace));
  CHECK(replay(result.trace, cfg).same_outcome(result));
}

TEST_CASE("tampered traces diverge")
{
  auto cfg    = make_config("0110", 8, AdversaryKind::random);
  auto result = run_instance(cfg);
  REQUIRE(result.trace.records.size() > 10);

  auto digest_changed = result.trace;
  digest_changed.records[8].digest ^= 1;
  CHECK_THROWS_AS(replay(digest_changed), ReplayDivergence);

  auto payload_changed = result.trace;
  for (auto &r : payload_changed.records)
  {
    if (r.kind == RecordKind::accept)
    {
      r.payload.back() ^= 1;
      break;
    }
  }
  CHECK_THROWS_AS(replay(payload_changed), ReplayDivergence);

  auto truncated = result.trace;
  truncated.records.pop_back();
  CHECK_THROWS_AS(replay(truncated), ReplayDivergence);
}

TEST_CASE("replaying under a different configuration is refused")
{
  auto cfg    = make_config("0110", 8);
  auto result = run_instance(cfg);
  auto other  = cfg;
  other.mode.combine_messages = true;
  CHECK_THROWS_AS(replay(result.trace, other), ConfigError);
  other      = cfg;
  other.seed = 9;
  CHECK_THROWS_AS(replay(result.trace, other), ConfigError);
}

TEST_CASE("trace files round trip")
{
  auto cfg    = make_config("0110101", 12, AdversaryKind::random, "crash:1@20");
  auto result = run_instance(cfg);
  auto path   = std::filesystem::temp_directory_path() / "bbc_trace_roundtrip.trace";
  save_trace(path.string(), result.trace);
  auto loaded = load_trace(path.string());
  std::filesystem::remove(path);
  CHECK(loaded == result.trace);
  CHECK(replay(loaded).same_outcome(result));
  CHECK(SimConfig::from_json(loaded.header) == cfg);
}

TEST_CASE("configuration errors are reported")
{
  auto cfg = make_config("0110", 1);
  CHECK_NOTHROW(cfg.validate());
  auto bad      = cfg;
  bad.proposals = {Bin::zero};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad        = cfg;
  bad.faults = parse_faults("silent:1,silent:2");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad        = cfg;
  bad.faults = parse_faults("silent:9");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(parse_faults("nonsense:1"), ConfigError);
  CHECK_THROWS_AS(parse_faults("silent:1@4"), ConfigError);
  CHECK_THROWS_AS(Params::make(4, 2), ConfigError);
  CHECK_THROWS_AS(parse_adversary("polite"), ConfigError);
}

TEST_CASE("fault specs format and parse symmetrically")
{
  auto f = parse_faults("crash:3@40,equivocate:2,garbage:0");
  REQUIRE(f.size() == 3);
  CHECK(f[0] == FaultSpec{3, FaultKind::crash, 40});
  CHECK(parse_faults(format_faults(f)) == f);
  CHECK(parse_faults("").empty());
}

TEST_CASE("simulator config survives JSON")
{
  auto cfg    = make_config("0110101", 77, AdversaryKind::heuristic, "flip-value:4",
                            ModeFlags{.combine_messages = true, .include_proofs = false, .lazy_stop = false});
  cfg.delayed = 2;
  CHECK(SimConfig::from_json(nlohmann::json::parse(cfg.to_json().dump())) == cfg);
  cfg.coin_override.reset();
  CHECK(SimConfig::from_json(nlohmann::json::parse(cfg.to_json().dump())) == cfg);
}

TEST_CASE("scheduler respects the fairness bound")
{
  for (std::uint64_t bound : {1U, 5U, 40U})
  {
    auto cfg           = make_config("0110101", 31, AdversaryKind::heuristic);
    cfg.fairness_bound = bound;
    auto result        = run_instance(cfg);
    CAPTURE(bound);
    CHECK(result.finished());
    CHECK(result.max_postponement <= bound);
    CHECK(count(audit(cfg, result), Check::fairness) == 0);
  }
}

TEST_CASE("the delayed process still decides the common value")
{
  auto cfg    = make_config("0110101", 4);
  cfg.delayed = 6;
  auto result = run_instance(cfg);
  CHECK(result.finished());
  CHECK(honest_values(result).size() == 1);
  CHECK(result.processes[6].decision.has_value());
}

TEST_CASE("step cap yields a stalled result")
{
  auto cfg     = make_config("0110101", 4);
  cfg.step_cap = 10;
  auto result  = run_instance(cfg);
  CHECK_FALSE(result.finished());
  CHECK_FALSE(result.stall_reason.empty());
  auto findings = audit(cfg, result);
  CHECK(count(findings, Check::termination) > 0);
}
