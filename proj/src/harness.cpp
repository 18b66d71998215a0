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

#include "bbc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace bbc::harness {
namespace {

constexpr std::uint64_t kProposalStream = 0x70726f70;
constexpr std::uint64_t kCoinStream     = 0x636f696e;
constexpr std::uint64_t kCrashStream    = 0x63726173;
constexpr std::size_t   kFailuresPerInstance = 3;

std::uint32_t faults_for(ExperimentConfig const &c, std::uint32_t n)
{
  return c.t.value_or(max_faults(n));
}

std::vector<sim::FaultSpec> resolve_faults(std::string const &text, std::uint32_t n, std::uint32_t t,
                                           std::uint64_t seed)
{
  if (text.empty() || text == "none")
  {
    return {};
  }
  if (text.find(':') != std::string::npos)
  {
    return sim::parse_faults(text);
  }
  auto                        kind = sim::parse_fault_kind(text);
  std::vector<sim::FaultSpec> out;
  for (std::uint32_t i = 0; i < t; ++i)
  {
    sim::FaultSpec f;
    f.process = n - 1 - i;
    f.kind    = kind;
    if (kind == sim::FaultKind::crash)
    {
      f.crash_step = derive_seed(seed, kCrashStream, i) % (10ULL * n);
    }
    out.push_back(f);
  }
  return out;
}

Stat stat_of(std::vector<Row> const &rows, Round Row::*field)
{
  Stat s;
  if (rows.empty())
  {
    return s;
  }
  s.min      = rows.front().*field;
  s.max      = rows.front().*field;
  double sum = 0;
  for (auto const &r : rows)
  {
    s.min = std::min<double>(s.min, r.*field);
    s.max = std::max<double>(s.max, r.*field);
    sum += r.*field;
  }
  s.avg = sum / static_cast<double>(rows.size());
  return s;
}

nlohmann::ordered_json stat_json(Stat const &s)
{
  return {{"min", s.min}, {"avg", s.avg}, {"max", s.max}};
}

Stat stat_from(nlohmann::json const &j)
{
  return Stat{j.at("min").get<double>(), j.at("avg").get<double>(), j.at("max").get<double>()};
}

constexpr char const *kCsvHeader =
    "n,t,index,seed,proposals,status,value,decision_round,participation_round,steps,messages,bytes,"
    "decision_proofs,dropped,deferred,proof_requests,violations";

nlohmann::ordered_json row_json(Row const &r)
{
  nlohmann::ordered_json j;
  j["n"]                   = r.n;
  j["t"]                   = r.t;
  j["index"]               = r.index;
  j["seed"]                = r.seed;
  j["proposals"]           = r.proposals;
  j["status"]              = r.status;
  j["value"]               = r.value;
  j["decision_round"]      = r.decision_round;
  j["participation_round"] = r.participation_round;
  j["steps"]               = r.steps;
  j["messages"]            = r.messages;
  j["bytes"]               = r.bytes;
  j["decision_proofs"]     = r.decision_proofs;
  j["dropped"]             = r.dropped;
  j["deferred"]            = r.deferred;
  j["proof_requests"]      = r.proof_requests;
  j["violations"]          = r.violations;
  return j;
}

Row row_from(nlohmann::json const &j)
{
  Row r;
  r.n                   = j.at("n").get<std::uint32_t>();
  r.t                   = j.at("t").get<std::uint32_t>();
  r.index               = j.at("index").get<std::uint32_t>();
  r.seed                = j.at("seed").get<std::uint64_t>();
  r.proposals           = j.at("proposals").get<std::string>();
  r.status              = j.at("status").get<std::string>();
  r.value               = j.at("value").get<int>();
  r.decision_round      = j.at("decision_round").get<Round>();
  r.participation_round = j.at("participation_round").get<Round>();
  r.steps               = j.at("steps").get<std::uint64_t>();
  r.messages            = j.at("messages").get<std::uint64_t>();
  r.bytes               = j.at("bytes").get<std::uint64_t>();
  r.decision_proofs     = j.at("decision_proofs").get<std::uint64_t>();
  r.dropped             = j.at("dropped").get<std::uint64_t>();
  r.deferred            = j.at("deferred").get<std::uint64_t>();
  r.proof_requests      = j.at("proof_requests").get<std::uint64_t>();
  r.violations          = j.at("violations").get<std::uint64_t>();
  return r;
}

nlohmann::ordered_json aggregate_json(Aggregate const &a)
{
  nlohmann::ordered_json j;
  j["n"]                   = a.n;
  j["instances"]           = a.instances;
  j["decision_round"]      = stat_json(a.decision_round);
  j["participation_round"] = stat_json(a.participation_round);
  j["messages_total"]      = a.messages_total;
  j["messages_avg"]        = a.messages_avg;
  j["bytes_total"]         = a.bytes_total;
  j["bytes_avg"]           = a.bytes_avg;
  j["dropped"]             = a.dropped;
  j["deferred"]            = a.deferred;
  j["proof_requests"]      = a.proof_requests;
  j["decision_proofs"]     = a.decision_proofs;
  j["violations"]          = a.violations;
  return j;
}

Aggregate aggregate_from(nlohmann::json const &j)
{
  Aggregate a;
  a.n                   = j.at("n").get<std::uint32_t>();
  a.instances           = j.at("instances").get<std::uint64_t>();
  a.decision_round      = stat_from(j.at("decision_round"));
  a.participation_round = stat_from(j.at("participation_round"));
  a.messages_total      = j.at("messages_total").get<std::uint64_t>();
  a.messages_avg        = j.at("messages_avg").get<double>();
  a.bytes_total         = j.at("bytes_total").get<std::uint64_t>();
  a.bytes_avg           = j.at("bytes_avg").get<double>();
  a.dropped             = j.at("dropped").get<std::uint64_t>();
  a.deferred            = j.at("deferred").get<std::uint64_t>();
  a.proof_requests      = j.at("proof_requests").get<std::uint64_t>();
  a.decision_proofs     = j.at("decision_proofs").get<std::uint64_t>();
  a.violations          = j.at("violations").get<std::uint64_t>();
  return a;
}

/// Every instance of group n, warmup first.
std::vector<Outcome> run_group(ExperimentConfig const &config, std::uint32_t n)
{
  auto const           total = config.warmup + config.instances;
  std::vector<Outcome> out(total);
  parallel_for(total, config.jobs, [&](std::size_t i) {
    auto idx   = static_cast<std::uint32_t>(i);
    auto sc    = instance_config(config, n, idx);
    bool store = !config.trace_dir.empty() && idx >= config.warmup;
    out[i]     = run_one(sc, config.check_replay && idx >= config.warmup, store);
    out[i].row.index = idx;
    if (store)
    {
      auto path = std::filesystem::path(config.trace_dir) /
                  ("n" + std::to_string(n) + "_i" + std::to_string(idx) + ".trace");
      sim::save_trace(path.string(), out[i].result.trace);
      out[i].result.trace = {};
    }
  });
  return out;
}

void collect(Report &report, std::vector<Outcome> const &outcomes, std::uint32_t warmup)
{
  for (auto const &o : outcomes)
  {
    std::size_t shown = 0;
    auto where = "n=" + std::to_string(o.row.n) + " instance=" + std::to_string(o.row.index) + " ";
    for (auto const &f : o.findings)
    {
      if (shown++ < kFailuresPerInstance)
      {
        report.failures.push_back(where + sim::to_string(f.check) + ": " + f.detail);
      }
    }
    if (!o.replay_ok)
    {
      report.failures.push_back(where + "replay: outcome differs");
    }
    if (o.row.index >= warmup)
    {
      report.rows.push_back(o.row);
    }
  }
}

}  // namespace

std::string to_string(CoinMode m)
{
  return m == CoinMode::real ? "real" : "override";
}

CoinMode parse_coin_mode(std::string_view text)
{
  if (text == "real")
  {
    return CoinMode::real;
  }
  if (text == "override")
  {
    return CoinMode::override_seeded;
  }
  throw ConfigError("coin must be real or override, got " + std::string(text));
}

void ExperimentConfig::validate() const
{
  if (ns.empty())
  {
    throw ConfigError("no group size given");
  }
  if (instances == 0)
  {
    throw ConfigError("instances must be at least 1");
  }
  if (jobs == 0)
  {
    throw ConfigError("jobs must be at least 1");
  }
  if (proposals != "random" && proposals != "zeros" && proposals != "ones")
  {
    throw ConfigError("proposals must be random, zeros or ones");
  }
  for (auto n : ns)
  {
    (void)Params::make(n, faults_for(*this, n));
    instance_config(*this, n, 0).validate();
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const
{
  nlohmann::ordered_json j;
  j["n"]                = ns;
  j["t"]                = t ? nlohmann::ordered_json(*t) : nlohmann::ordered_json();
  j["instances"]        = instances;
  j["warmup"]           = warmup;
  j["proposals"]        = proposals;
  j["coin"]             = to_string(coin);
  j["combine_messages"] = mode.combine_messages;
  j["include_proofs"]   = mode.include_proofs;
  j["lazy_stop"]        = mode.lazy_stop;
  j["adversary"]        = sim::to_string(adversary);
  j["faults"]           = faults;
  j["seed"]             = seed;
  j["fairness_bound"]   = fairness_bound;
  j["step_cap"]         = step_cap;
  j["jobs"]             = jobs;
  j["check_replay"]     = check_replay;
  j["trace_dir"]        = trace_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(nlohmann::json const &j, ExperimentConfig c)
{
  try
  {
    if (j.contains("n"))
    {
      c.ns = j.at("n").is_array() ? j.at("n").get<std::vector<std::uint32_t>>()
                                  : std::vector<std::uint32_t>{j.at("n").get<std::uint32_t>()};
    }
    if (j.contains("t"))
    {
      c.t = j.at("t").is_null() ? std::nullopt : std::optional(j.at("t").get<std::uint32_t>());
    }
    auto take = [&](char const *key, auto &field) {
      if (j.contains(key))
      {
        field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
      }
    };
    take("instances", c.instances);
    take("warmup", c.warmup);
    take("proposals", c.proposals);
    take("combine_messages", c.mode.combine_messages);
    take("include_proofs", c.mode.include_proofs);
    take("lazy_stop", c.mode.lazy_stop);
    take("faults", c.faults);
    take("seed", c.seed);
    take("fairness_bound", c.fairness_bound);
    take("step_cap", c.step_cap);
    take("jobs", c.jobs);
    take("check_replay", c.check_replay);
    take("trace_dir", c.trace_dir);
    if (j.contains("coin"))
    {
      c.coin = parse_coin_mode(j.at("coin").get<std::string>());
    }
    if (j.contains("adversary"))
    {
      c.adversary = sim::parse_adversary(j.at("adversary").get<std::string>());
    }
    return c;
  }
  catch (nlohmann::json::exception const &e)
  {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json(nlohmann::json const &j)
{
  return from_json(j, ExperimentConfig{});
}

sim::SimConfig instance_config(ExperimentConfig const &config, std::uint32_t n, std::uint32_t index)
{
  auto           t = faults_for(config, n);
  sim::SimConfig sc;
  sc.params         = Params::make(n, t);
  sc.mode           = config.mode;
  sc.adversary      = config.adversary;
  sc.fairness_bound = config.fairness_bound;
  sc.step_cap       = config.step_cap;
  sc.seed           = derive_seed(config.seed, n, index);

  std::mt19937_64 rng{derive_seed(sc.seed, kProposalStream)};
  for (std::uint32_t i = 0; i < n; ++i)
  {
    if (config.proposals == "zeros")
    {
      sc.proposals.push_back(Bin::zero);
    }
    else if (config.proposals == "ones")
    {
      sc.proposals.push_back(Bin::one);
    }
    else
    {
      sc.proposals.push_back(bin_of((rng() >> 63) != 0));
    }
  }
  if (config.coin == CoinMode::override_seeded)
  {
    sc.coin_override = derive_seed(sc.seed, kCoinStream);
  }
  sc.faults = resolve_faults(config.faults, n, t, sc.seed);
  return sc;
}

Row make_row(sim::SimConfig const &config, sim::InstanceResult const &result, std::size_t violations,
             std::uint32_t index)
{
  Row r;
  r.n     = config.params.n;
  r.t     = config.params.t;
  r.index = index;
  r.seed  = config.seed;
  for (auto p : config.proposals)
  {
    r.proposals += p == Bin::one ? '1' : '0';
  }
  r.status = result.finished() ? "finished" : "stalled";

  std::optional<Bin> value;
  bool               split = false;
  for (auto const &p : result.processes)
  {
    if (!p.honest)
    {
      continue;
    }
    r.participation_round = std::max(r.participation_round, p.participation);
    r.dropped += p.stats.dropped;
    r.deferred += p.stats.deferred;
    r.proof_requests += p.stats.proof_requests_sent;
    if (p.decision)
    {
      r.decision_round = std::max(r.decision_round, p.decision->round);
      split            = split || (value && *value != p.decision->value);
      value            = p.decision->value;
    }
  }
  r.value           = value && !split ? to_int(*value) : -1;
  r.steps           = result.steps;
  r.messages        = result.messages_sent;
  r.bytes           = result.bytes_sent;
  r.decision_proofs = result.sent_by_kind[static_cast<std::size_t>(MessageKind::decision_proof)];
  r.dropped += result.malformed_dropped;
  r.violations = violations;
  return r;
}

Outcome run_one(sim::SimConfig const &config, bool check_replay, bool keep_trace)
{
  Outcome o;
  o.config   = config;
  o.result   = sim::run_instance(config);
  o.findings = sim::audit(config, o.result);
  if (check_replay)
  {
    try
    {
      auto again  = sim::replay(o.result.trace, config);
      o.replay_ok = again.same_outcome(o.result) && again.trace == o.result.trace;
    }
    catch (Error const &)
    {
      o.replay_ok = false;
    }
  }
  if (!keep_trace)
  {
    o.result.trace = {};
  }
  o.row = make_row(config, o.result, o.findings.size() + (o.replay_ok ? 0 : 1), 0);
  return o;
}

void parallel_for(std::size_t count, std::uint32_t jobs, std::function<void(std::size_t)> const &work)
{
  auto const workers = std::min<std::size_t>(std::max<std::uint32_t>(jobs, 1), count);
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < count; ++i)
    {
      work(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr       failure;
  std::mutex               guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
  {
    pool.emplace_back([&] {
      for (auto i = next++; i < count; i = next++)
      {
        try
        {
          work(i);
        }
        catch (...)
        {
          std::lock_guard lock(guard);
          if (!failure)
          {
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto &th : pool)
  {
    th.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

std::vector<Aggregate> aggregate(std::vector<Row> const &rows)
{
  std::vector<Aggregate> out;
  std::vector<std::uint32_t> order;
  for (auto const &r : rows)
  {
    if (std::find(order.begin(), order.end(), r.n) == order.end())
    {
      order.push_back(r.n);
    }
  }
  for (auto n : order)
  {
    std::vector<Row> group;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(group), [&](Row const &r) { return r.n == n; });
    Aggregate a;
    a.n                   = n;
    a.instances           = group.size();
    a.decision_round      = stat_of(group, &Row::decision_round);
    a.participation_round = stat_of(group, &Row::participation_round);
    for (auto const &r : group)
    {
      a.messages_total += r.messages;
      a.bytes_total += r.bytes;
      a.dropped += r.dropped;
      a.deferred += r.deferred;
      a.proof_requests += r.proof_requests;
      a.decision_proofs += r.decision_proofs;
      a.violations += r.violations;
    }
    a.messages_avg = static_cast<double>(a.messages_total) / static_cast<double>(group.size());
    a.bytes_avg    = static_cast<double>(a.bytes_total) / static_cast<double>(group.size());
    out.push_back(a);
  }
  return out;
}

bool Report::green() const
{
  return failures.empty() && std::all_of(rows.begin(), rows.end(), [](Row const &r) {
           return r.violations == 0 && r.status == "finished";
         });
}

Report run_experiment(ExperimentConfig const &config)
{
  config.validate();
  if (!config.trace_dir.empty())
  {
    std::filesystem::create_directories(config.trace_dir);
  }
  Report report;
  report.config = config;
  for (auto n : config.ns)
  {
    collect(report, run_group(config, n), config.warmup);
  }
  report.groups = aggregate(report.rows);
  return report;
}

ModeDiff compare_modes(ExperimentConfig const &config)
{
  auto base_cfg                    = config;
  base_cfg.mode.combine_messages   = false;
  auto comb_cfg                    = config;
  comb_cfg.mode.combine_messages   = true;
  base_cfg.validate();
  comb_cfg.validate();

  ModeDiff diff;
  diff.base.config     = base_cfg;
  diff.combined.config = comb_cfg;
  for (auto n : config.ns)
  {
    auto base = run_group(base_cfg, n);
    auto comb = run_group(comb_cfg, n);
    collect(diff.base, base, config.warmup);
    collect(diff.combined, comb, config.warmup);
    for (std::size_t i = config.warmup; i < base.size(); ++i)
    {
      ++diff.pairs;
      auto const &b = base[i];
      auto const &c = comb[i];
      if (b.row.value >= 0 && b.row.value == c.row.value)
      {
        ++diff.value_matches;
      }
      if (c.row.participation_round == c.row.decision_round + 1)
      {
        ++diff.participation_plus_one;
      }
      for (auto const &p : c.result.processes)
      {
        if (p.honest && p.decision && !p.decision->adopted)
        {
          ++diff.self_deciders;
          diff.self_deciders_plus_one += p.participation == p.decision->round + 1 ? 1 : 0;
        }
      }
      auto peak = [](sim::InstanceResult const &r) {
        std::uint32_t m = 0;
        for (auto const &[key, count] : r.broadcasts)
        {
          if (key.second >= 1)
          {
            m = std::max(m, count);
          }
        }
        return m;
      };
      diff.max_broadcasts_base     = std::max(diff.max_broadcasts_base, peak(b.result));
      diff.max_broadcasts_combined = std::max(diff.max_broadcasts_combined, peak(c.result));
    }
  }
  diff.base.groups     = aggregate(diff.base.rows);
  diff.combined.groups = aggregate(diff.combined.rows);

  auto mean = [](std::vector<Row> const &rows, auto field) {
    double sum = 0;
    for (auto const &r : rows)
    {
      sum += static_cast<double>(r.*field);
    }
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  };
  diff.decision_round_delta =
      mean(diff.combined.rows, &Row::decision_round) - mean(diff.base.rows, &Row::decision_round);
  diff.messages_delta = mean(diff.combined.rows, &Row::messages) - mean(diff.base.rows, &Row::messages);
  return diff;
}

Format parse_format(std::string_view text)
{
  if (text == "json")
  {
    return Format::json;
  }
  if (text == "csv")
  {
    return Format::csv;
  }
  throw ConfigError("format must be json or csv, got " + std::string(text));
}

void emit(std::ostream &out, Report const &report, Format format)
{
  if (format == Format::csv)
  {
    out << kCsvHeader << '\n';
    for (auto const &r : report.rows)
    {
      out << r.n << ',' << r.t << ',' << r.index << ',' << r.seed << ',' << r.proposals << ',' << r.status << ','
          << r.value << ',' << r.decision_round << ',' << r.participation_round << ',' << r.steps << ','
          << r.messages << ',' << r.bytes << ',' << r.decision_proofs << ',' << r.dropped << ',' << r.deferred
          << ',' << r.proof_requests << ',' << r.violations << '\n';
    }
    return;
  }
  nlohmann::ordered_json j;
  j["config"] = report.config.to_json();
  j["green"]  = report.green();
  j["groups"] = nlohmann::ordered_json::array();
  for (auto const &g : report.groups)
  {
    j["groups"].push_back(aggregate_json(g));
  }
  j["failures"] = report.failures;
  j["rows"]     = nlohmann::ordered_json::array();
  for (auto const &r : report.rows)
  {
    j["rows"].push_back(row_json(r));
  }
  out << j.dump(2) << '\n';
}

std::string emit(Report const &report, Format format)
{
  std::ostringstream s;
  emit(s, report, format);
  return s.str();
}

nlohmann::ordered_json to_json(ModeDiff const &diff)
{
  nlohmann::ordered_json j;
  j["pairs"]                   = diff.pairs;
  j["value_matches"]           = diff.value_matches;
  j["participation_plus_one"]  = diff.participation_plus_one;
  j["self_deciders"]           = diff.self_deciders;
  j["self_deciders_plus_one"]  = diff.self_deciders_plus_one;
  j["max_broadcasts_base"]     = diff.max_broadcasts_base;
  j["max_broadcasts_combined"] = diff.max_broadcasts_combined;
  j["decision_round_delta"]    = diff.decision_round_delta;
  j["messages_delta"]          = diff.messages_delta;
  j["base"]                    = nlohmann::ordered_json::array();
  for (auto const &g : diff.base.groups)
  {
    j["base"].push_back(aggregate_json(g));
  }
  j["combined"] = nlohmann::ordered_json::array();
  for (auto const &g : diff.combined.groups)
  {
    j["combined"].push_back(aggregate_json(g));
  }
  j["failures"] = diff.base.failures;
  for (auto const &f : diff.combined.failures)
  {
    j["failures"].push_back(f);
  }
  return j;
}

std::vector<Row> parse_rows(std::string const &text, Format format)
{
  std::vector<Row> rows;
  if (format == Format::json)
  {
    try
    {
      auto const doc = nlohmann::json::parse(text);
      for (auto const &r : doc.at("rows"))
      {
        rows.push_back(row_from(r));
      }
    }
    catch (nlohmann::json::exception const &e)
    {
      throw MalformedMessage(std::string("bad report: ") + e.what());
    }
    return rows;
  }
  std::istringstream in(text);
  std::string        line;
  if (!std::getline(in, line) || line != kCsvHeader)
  {
    throw MalformedMessage("CSV report header mismatch");
  }
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::vector<std::string> f;
    std::istringstream       cells(line);
    for (std::string cell; std::getline(cells, cell, ',');)
    {
      f.push_back(cell);
    }
    if (f.size() != 17)
    {
      throw MalformedMessage("CSV row must have 17 fields: " + line);
    }
    try
    {
      Row r;
      r.n                   = static_cast<std::uint32_t>(std::stoul(f[0]));
      r.t                   = static_cast<std::uint32_t>(std::stoul(f[1]));
      r.index               = static_cast<std::uint32_t>(std::stoul(f[2]));
      r.seed                = std::stoull(f[3]);
      r.proposals           = f[4];
      r.status              = f[5];
      r.value               = std::stoi(f[6]);
      r.decision_round      = static_cast<Round>(std::stoul(f[7]));
      r.participation_round = static_cast<Round>(std::stoul(f[8]));
      r.steps               = std::stoull(f[9]);
      r.messages            = std::stoull(f[10]);
      r.bytes               = std::stoull(f[11]);
      r.decision_proofs     = std::stoull(f[12]);
      r.dropped             = std::stoull(f[13]);
      r.deferred            = std::stoull(f[14]);
      r.proof_requests      = std::stoull(f[15]);
      r.violations          = std::stoull(f[16]);
      rows.push_back(r);
    }
    catch (std::logic_error const &)
    {
      throw MalformedMessage("bad CSV row: " + line);
    }
  }
  return rows;
}

std::vector<Aggregate> parse_aggregates(std::string const &json_text)
{
  try
  {
    std::vector<Aggregate> out;
    auto const             doc = nlohmann::json::parse(json_text);
    for (auto const &g : doc.at("groups"))
    {
      out.push_back(aggregate_from(g));
    }
    return out;
  }
  catch (nlohmann::json::exception const &e)
  {
    throw MalformedMessage(std::string("bad report: ") + e.what());
  }
}

}  // namespace bbc::harness
