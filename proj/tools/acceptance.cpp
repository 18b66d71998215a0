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

#include "bbc/coin.hpp"
#include "bbc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

using namespace bbc;
using namespace bbc::harness;

namespace {

/// Pinned tolerances.
constexpr std::uint32_t kGridInstances     = 100;
constexpr double        kGridBudgetSeconds = 600.0;
constexpr std::uint32_t kRoundInstances    = 300;
constexpr double        kMeanRoundLow      = 2.0;
constexpr double        kMeanRoundHigh     = 4.5;
constexpr Round         kMaxRound          = 15;
constexpr std::uint32_t kUnanimousPerCell  = 20;
constexpr std::uint32_t kPairsPerN         = 100;
constexpr std::uint32_t kCoinMessages      = 10'000;
constexpr double        kCoinLow           = 0.47;
constexpr double        kCoinHigh          = 0.53;
constexpr std::uint32_t kLazyPerN          = 100;
constexpr std::uint32_t kDelayedPerN       = 20;

std::uint32_t jobs()
{
  return std::max(1U, std::thread::hardware_concurrency());
}

struct Verdict
{
  int         id = 0;
  bool        pass = false;
  std::string text;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, std::string text)
{
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", text.c_str());
  std::fflush(stdout);
  verdicts.push_back({id, pass, std::move(text)});
}

template <class... Args>
std::string cat(Args const &...args)
{
  std::ostringstream s;
  (s << ... << args);
  return s.str();
}

/// Findings per check over a set of audited runs.
struct CheckCounts
{
  std::array<std::uint64_t, sim::kCheckCount> by_check{};
  std::uint64_t                               runs = 0;

  void add(std::vector<sim::Finding> const &findings)
  {
    ++runs;
    for (auto const &f : findings)
    {
      ++by_check[static_cast<std::size_t>(f.check)];
    }
  }
  void add(CheckCounts const &o)
  {
    runs += o.runs;
    for (std::size_t i = 0; i < by_check.size(); ++i)
    {
      by_check[i] += o.by_check[i];
    }
  }
  std::uint64_t operator[](sim::Check c) const
  {
    return by_check[static_cast<std::size_t>(c)];
  }
};

struct GridPoint
{
  std::uint32_t      n = 0;
  sim::AdversaryKind adversary{};
  std::string        faults;
  bool               combine = false;
  bool               proofs  = true;
};

struct GridResult
{
  CheckCounts         tally;
  std::uint64_t stopped   = 0;
  std::uint64_t replay_ok = 0;
  std::uint64_t bytes     = 0;
  std::uint64_t deferred  = 0;
  std::uint64_t requests  = 0;
  std::uint64_t resolved  = 0;
  std::uint64_t invalid_after_response = 0;
  std::uint64_t pending_deferred       = 0;
};

bool all_honest_decided(sim::InstanceResult const &r)
{
  return r.finished() && std::all_of(r.processes.begin(), r.processes.end(), [](auto const &p) {
           return !p.honest || p.decision.has_value();
         });
}

ExperimentConfig point_config(GridPoint const &g, std::uint32_t instances)
{
  ExperimentConfig c;
  c.ns                    = {g.n};
  c.instances             = instances;
  c.warmup                = 0;
  c.adversary             = g.adversary;
  c.faults                = g.faults;
  c.mode.combine_messages = g.combine;
  c.mode.include_proofs   = g.proofs;
  c.seed                  = 1000 + g.n;
  return c;
}

/// Criteria 1, 2, 5, 6, 10 and the replay half of 11 share this sweep.
CheckCounts grid(std::vector<GridPoint> &points, std::vector<GridResult> &results, double &seconds)
{
  for (std::uint32_t n : {4U, 7U, 10U})
  {
    for (auto adv : {sim::AdversaryKind::fifo, sim::AdversaryKind::random, sim::AdversaryKind::heuristic})
    {
      for (std::string f : {"none", "crash", "silent", "equivocate", "garbage"})
      {
        for (bool combine : {false, true})
        {
          for (bool proofs : {true, false})
          {
            points.push_back({n, adv, f, combine, proofs});
          }
        }
      }
    }
  }
  results.assign(points.size(), {});
  auto const total = points.size() * kGridInstances;
  auto const start = std::chrono::steady_clock::now();
  std::mutex lock;
  parallel_for(total, jobs(), [&](std::size_t i) {
    auto const  at  = i / kGridInstances;
    auto const  idx = static_cast<std::uint32_t>(i % kGridInstances);
    auto const &g   = points[at];
    auto        sc  = instance_config(point_config(g, kGridInstances), g.n, idx);
    auto        o   = run_one(sc, true, false);
    GridResult  one;
    one.tally.add(o.findings);
    one.stopped   = all_honest_decided(o.result) ? 1 : 0;
    one.replay_ok = o.replay_ok ? 1 : 0;
    one.bytes     = o.result.bytes_sent;
    for (auto const &p : o.result.processes)
    {
      if (p.honest)
      {
        one.deferred += p.stats.deferred;
        one.requests += p.stats.proof_requests_sent;
        one.resolved += p.stats.responses_resolved;
        one.invalid_after_response += p.stats.invalid_after_response;
        one.pending_deferred += p.pending_deferred;
      }
    }
    std::lock_guard guard(lock);
    auto           &r = results[at];
    r.tally.add(one.tally);
    r.stopped += one.stopped;
    r.replay_ok += one.replay_ok;
    r.bytes += one.bytes;
    r.deferred += one.deferred;
    r.requests += one.requests;
    r.resolved += one.resolved;
    r.invalid_after_response += one.invalid_after_response;
    r.pending_deferred += one.pending_deferred;
  });
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CheckCounts all;
  for (auto const &r : results)
  {
    all.add(r.tally);
  }
  return all;
}

/// Criterion 3 runs.
CheckCounts round_statistics()
{
  ExperimentConfig c;
  c.ns        = {10};
  c.instances = kRoundInstances;
  c.warmup    = 0;
  c.adversary = sim::AdversaryKind::random;
  c.seed      = 3;
  std::vector<Outcome> out(kRoundInstances);
  parallel_for(out.size(), jobs(), [&](std::size_t i) {
    out[i] = run_one(instance_config(c, 10, static_cast<std::uint32_t>(i)), false, false);
  });
  CheckCounts         tally;
  double        sum = 0;
  Round         max = 0;
  std::uint64_t stopped = 0;
  std::map<Round, std::uint64_t> histogram;
  for (auto const &o : out)
  {
    tally.add(o.findings);
    sum += o.row.decision_round;
    max = std::max(max, o.row.decision_round);
    stopped += all_honest_decided(o.result) ? 1 : 0;
    ++histogram[o.row.decision_round];
  }
  auto const mean = sum / static_cast<double>(out.size());
  // Each round past k = 2 keeps at most half of the open runs, within three
  // standard deviations.
  bool          tail_ok   = true;
  std::uint64_t remaining = out.size();
  std::string   tail;
  for (auto const &[round, count] : histogram)
  {
    tail += cat(round, ":", count, " ");
  }
  for (Round k = 2; k <= max; ++k)
  {
    std::uint64_t beyond = 0;
    for (auto const &[round, count] : histogram)
    {
      beyond += round > k ? count : 0;
    }
    auto const open = static_cast<double>(remaining);
    if (remaining >= 40 && static_cast<double>(beyond) > 0.5 * open + 3.0 * std::sqrt(0.25 * open))
    {
      tail_ok = false;
    }
    remaining = beyond;
  }
  bool pass = stopped == out.size() && mean >= kMeanRoundLow && mean <= kMeanRoundHigh && max <= kMaxRound &&
              tail_ok;
  report(3, pass,
         cat("n=10 random adversary, ", out.size(), " runs: mean decision round ", mean, " in [", kMeanRoundLow,
             ", ", kMeanRoundHigh, "], max ", max, " <= ", kMaxRound, ", geometric tail ",
             tail_ok ? "holds" : "violated", " (rounds ", tail, ")"));
  return tally;
}

/// Criterion 4 runs.
CheckCounts unanimous()
{
  struct Cell
  {
    std::uint32_t      n;
    sim::AdversaryKind adversary;
    std::string        proposals;
    std::string        faults;
  };
  std::vector<Cell> cells;
  for (std::uint32_t n : {4U, 7U, 10U})
  {
    for (auto adv : {sim::AdversaryKind::fifo, sim::AdversaryKind::random, sim::AdversaryKind::heuristic})
    {
      for (std::string v : {"zeros", "ones"})
      {
        cells.push_back({n, adv, v, adv == sim::AdversaryKind::random ? "equivocate" : "none"});
      }
    }
  }
  std::vector<Outcome> out(cells.size() * kUnanimousPerCell);
  parallel_for(out.size(), jobs(), [&](std::size_t i) {
    auto const      &cell = cells[i / kUnanimousPerCell];
    ExperimentConfig c;
    c.ns        = {cell.n};
    c.adversary = cell.adversary;
    c.proposals = cell.proposals;
    c.faults    = cell.faults;
    c.seed      = 4;
    out[i] = run_one(instance_config(c, cell.n, static_cast<std::uint32_t>(i)), false, false);
  });
  CheckCounts         tally;
  std::uint64_t exact = 0;
  for (auto const &o : out)
  {
    tally.add(o.findings);
    auto const v     = o.config.proposals.front();
    Round      first = 1;
    while (override_bit(*o.config.coin_override, first) != v)
    {
      ++first;
    }
    bool ok = all_honest_decided(o.result);
    for (auto const &p : o.result.processes)
    {
      if (p.honest)
      {
        ok = ok && p.decision && p.decision->value == v && p.decision->round == first;
      }
    }
    exact += ok ? 1 : 0;
  }
  report(4, exact == out.size(),
         cat(exact, "/", out.size(), " unanimous runs decide v in the first round whose override coin is v"));
  return tally;
}

void coin_contract()
{
  bool          threshold = true;
  bool          global    = true;
  bool          binary    = true;
  std::uint64_t quorums   = 0;
  std::uint64_t refusals  = 0;
  for (std::uint32_t n = 1; n <= 7; ++n)
  {
    auto const params   = Params::make(n, max_faults(n));
    auto       provider = crypto::make_provider("mock-prf", params, 500 + n);
    auto const tag      = sim::instance_tag(n);
    std::vector<crypto::Signature> shares;
    for (ProcessId i = 0; i < n; ++i)
    {
      shares.push_back(make_share(crypto::Signer(provider, i), tag, 1).sig);
    }
    std::optional<crypto::ThresholdSignature> seen;
    std::optional<Bin>                        bit;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask)
    {
      std::vector<crypto::Signature> subset;
      for (ProcessId i = 0; i < n; ++i)
      {
        if ((mask >> i) & 1U)
        {
          subset.push_back(shares[i]);
        }
      }
      if (subset.size() < params.quorum())
      {
        try
        {
          (void)provider->aggregate(subset);
          threshold = false;
        }
        catch (crypto::ThresholdUnavailable const &)
        {
          ++refusals;
        }
        continue;
      }
      auto tsig = provider->aggregate(subset);
      auto b    = provider->coin_bit(tsig);
      binary    = binary && (b == Bin::zero || b == Bin::one);
      global    = global && (!seen || (*seen == tsig && *bit == b));
      seen      = tsig;
      bit       = b;
      ++quorums;
    }
  }

  auto const    params   = Params::make(4, 1);
  auto          provider = crypto::make_provider("mock-prf", params, 2026);
  auto const    tag      = sim::instance_tag(8);
  std::uint64_t ones     = 0;
  for (Round r = 1; r <= kCoinMessages; ++r)
  {
    std::vector<crypto::Signature> shares;
    for (ProcessId i = 0; i < params.quorum(); ++i)
    {
      shares.push_back(make_share(crypto::Signer(provider, i), tag, r).sig);
    }
    ones += provider->coin_bit(provider->aggregate(shares)) == Bin::one ? 1 : 0;
  }
  auto const freq = static_cast<double>(ones) / kCoinMessages;
  report(8, threshold && global && binary && freq >= kCoinLow && freq <= kCoinHigh,
         cat("threshold ", refusals, " sub-quorum refusals ", threshold ? "all refused" : "LEAKED", ", global ",
             quorums, " quorums n<=7 ", global ? "identical" : "DIFFER", ", binary ", binary ? "yes" : "no",
             ", frequency ", freq, " over ", kCoinMessages, " in [", kCoinLow, ", ", kCoinHigh, "]"));
}

void mode_equivalence()
{
  ExperimentConfig c;
  c.ns        = {4, 7, 10};
  c.instances = kPairsPerN;
  c.warmup    = 0;
  c.adversary = sim::AdversaryKind::fifo;
  c.seed      = 7;
  c.jobs      = jobs();
  auto d      = compare_modes(c);
  bool pass = d.pairs >= 300 && d.all_match() && d.participation_plus_one == d.pairs &&
              d.self_deciders == d.self_deciders_plus_one && d.base.green() && d.combined.green();
  report(7, pass,
         cat(d.value_matches, "/", d.pairs, " fifo pairs decide the same value, participation = decision + 1 on ",
             d.participation_plus_one, "/", d.pairs, " rows and ", d.self_deciders_plus_one, "/", d.self_deciders,
             " self-deciders"));
}

void lazy_economy()
{
  std::uint64_t runs = 0, proofs_sent = 0, all_decided = 0;
  for (bool combine : {false, true})
  {
    ExperimentConfig c;
    c.ns                    = {4, 7, 10};
    c.instances             = kLazyPerN;
    c.warmup                = 0;
    c.adversary             = sim::AdversaryKind::fifo;
    c.mode.combine_messages = combine;
    c.seed                  = 9;
    c.jobs                  = jobs();
    auto rep                = run_experiment(c);
    for (auto const &r : rep.rows)
    {
      ++runs;
      proofs_sent += r.decision_proofs;
      all_decided += r.value >= 0 && r.violations == 0 ? 1 : 0;
    }
  }

  std::uint64_t delayed_runs = 0, delayed_ok = 0, behind = 0, rescued = 0;
  for (std::uint32_t n : {4U, 7U, 10U})
  {
    ExperimentConfig c;
    c.ns        = {n};
    c.adversary = sim::AdversaryKind::fifo;
    c.seed      = 10;
    for (std::uint32_t i = 0; i < kDelayedPerN; ++i)
    {
      auto sc    = instance_config(c, n, i);
      sc.delayed = n - 1;
      auto o     = run_one(sc, false, true);
      ++delayed_runs;
      auto const &slow = o.result.processes[n - 1];
      bool        got  = false;
      for (auto const &rec : o.result.trace.records)
      {
        if (rec.kind == sim::RecordKind::deliver && rec.process == n - 1)
        {
          auto env = sim::decode_envelope(rec.payload);
          got      = got || (!env.bytes.empty() &&
                        env.bytes.front() == static_cast<std::uint8_t>(MessageKind::decision_proof));
        }
      }
      Round others = 0;
      bool  agree  = all_honest_decided(o.result) && o.findings.empty() && slow.decision.has_value();
      for (auto const &p : o.result.processes)
      {
        if (p.honest && p.id != n - 1)
        {
          others = std::max(others, p.participation);
        }
        agree = agree && (!p.honest || (p.decision && slow.decision && p.decision->value == slow.decision->value));
      }
      if (slow.participation > others)
      {
        ++behind;
        rescued += got && slow.decision && slow.decision->adopted ? 1 : 0;
      }
      delayed_ok += agree ? 1 : 0;
    }
  }
  report(9, proofs_sent == 0 && all_decided == runs && behind > 0 && rescued == behind && delayed_ok == delayed_runs,
         cat(proofs_sent, " DecisionProofs over ", runs, " fault-free lazy fifo runs; delayed process outran the ",
             "others in ", behind, "/", delayed_runs, " runs and was stopped by a delivered DecisionProof in ", rescued,
             "/", behind, ", common value decided in ", delayed_ok, "/", delayed_runs));
}

void determinism(std::uint64_t replays, std::uint64_t grid_runs)
{
  auto dir = std::filesystem::temp_directory_path() / "bbc_acceptance_traces";
  std::filesystem::remove_all(dir);
  std::uint64_t stored = 0, stored_ok = 0;
  bool          reports_equal = true;
  for (auto adv : {sim::AdversaryKind::fifo, sim::AdversaryKind::random, sim::AdversaryKind::heuristic})
  {
    ExperimentConfig c;
    c.ns                    = {4, 7};
    c.instances             = 10;
    c.warmup                = 2;
    c.adversary             = adv;
    c.faults                = adv == sim::AdversaryKind::fifo ? "crash" : "equivocate";
    c.mode.include_proofs   = adv != sim::AdversaryKind::heuristic;
    c.mode.combine_messages = adv == sim::AdversaryKind::random;
    c.seed                  = 11;
    auto first              = run_experiment(c);
    auto fresh              = run_experiment(c);
    for (auto fmt : {Format::json, Format::csv})
    {
      reports_equal = reports_equal && emit(first, fmt) == emit(fresh, fmt);
    }
    c.trace_dir = dir.string();
    std::filesystem::create_directories(dir);
    auto second = run_experiment(c);
    reports_equal = reports_equal && second.rows == first.rows;
    for (auto const &row : second.rows)
    {
      auto path = dir / ("n" + std::to_string(row.n) + "_i" + std::to_string(row.index) + ".trace");
      auto tr   = sim::load_trace(path.string());
      ++stored;
      try
      {
        auto again = sim::replay(tr);
        auto sc    = sim::SimConfig::from_json(tr.header);
        auto audited = make_row(sc, again, sim::audit(sc, again).size(), row.index);
        stored_ok += again.trace == tr && audited == row ? 1 : 0;
      }
      catch (Error const &)
      {
      }
    }
    std::filesystem::remove_all(dir);
  }
  report(11, replays == grid_runs && stored_ok == stored && reports_equal,
         cat(replays, "/", grid_runs, " grid runs replay identically, ", stored_ok, "/", stored,
             " stored trace files replay to the reported row, repeated reports ",
             reports_equal ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main()
{
  std::vector<GridPoint>  points;
  std::vector<GridResult> results;
  double                  seconds = 0;
  auto                    grid_tally = grid(points, results, seconds);

  std::uint64_t stopped = 0, replays = 0;
  for (auto const &r : results)
  {
    stopped += r.stopped;
    replays += r.replay_ok;
  }
  auto const runs = grid_tally.runs;
  report(1, grid_tally[sim::Check::agreement] == 0 && grid_tally[sim::Check::validity] == 0 &&
                seconds <= kGridBudgetSeconds && points.size() == 180,
         cat(points.size(), " grid points x ", kGridInstances, " = ", runs, " runs, agreement violations ",
             grid_tally[sim::Check::agreement], ", validity violations ", grid_tally[sim::Check::validity], ", ",
             seconds, " s <= ", kGridBudgetSeconds, " s"));
  report(2, stopped == runs && grid_tally[sim::Check::termination] == 0,
         cat(stopped, "/", runs, " runs reach all honest processes stopped before the step cap"));

  auto round_tally     = round_statistics();
  auto unanimous_tally = unanimous();

  CheckCounts all = grid_tally;
  all.add(round_tally);
  all.add(unanimous_tally);
  report(5, all[sim::Check::decision_window] == 0 && all[sim::Check::unanimity] == 0,
         cat(all.runs, " traces, decisions outside the first deciding round or its next same-coin round: ",
             all[sim::Check::decision_window]));
  report(6, all[sim::Check::double_quorum] == 0 && all[sim::Check::provability] == 0,
         cat(all.runs, " traces, rounds with two n-t vote cells: ", all[sim::Check::double_quorum],
             ", votes accepted for a value not provable earlier: ", all[sim::Check::provability]));

  mode_equivalence();
  coin_contract();
  lazy_economy();

  std::uint64_t pairs = 0, lower = 0, deferred = 0, requests = 0, resolved = 0, invalid = 0, pending = 0;
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    if (!points[i].proofs)
    {
      continue;
    }
    auto const &on  = results[i];
    auto const &off = results[i + 1];
    ++pairs;
    lower += off.bytes < on.bytes ? 1 : 0;
    if (points[i].adversary == sim::AdversaryKind::heuristic)
    {
      deferred += off.deferred;
      requests += off.requests;
      resolved += off.resolved;
      invalid += off.invalid_after_response;
      pending += off.pending_deferred;
    }
  }
  report(10, lower == pairs && deferred > 0 && requests > 0 && invalid == 0,
         cat(lower, "/", pairs, " grid points send fewer bytes with proofs off; heuristic proofs-off: ", deferred,
             " deferred, ", requests, " requests, ", resolved, " responses resolved, ", invalid,
             " invalid after response, ", pending, " left parked at stop"));

  determinism(replays, runs);

  auto failed = std::count_if(verdicts.begin(), verdicts.end(), [](Verdict const &v) { return !v.pass; });
  std::printf("%zu/%zu criteria pass\n", verdicts.size() - static_cast<std::size_t>(failed), verdicts.size());
  return failed == 0 ? 0 : 1;
}
