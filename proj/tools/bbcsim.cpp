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

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using bbc::harness::ExperimentConfig;

struct Flags
{
  std::string                config_file;
  std::vector<std::uint32_t> ns;
  std::uint32_t              t         = 0;
  std::uint32_t              instances = 0;
  std::uint32_t              warmup    = 0;
  std::uint64_t              seed      = 0;
  bool                       combine   = false;
  bool                       proofs    = true;
  bool                       lazy      = true;
  std::string                adversary;
  std::string                faults;
  std::string                coin;
  std::string                proposals;
  std::uint32_t              jobs = 1;
  std::string                traces;
  bool                       check_replay = false;
  std::uint64_t              fairness     = 0;
  std::string                format       = "json";
  std::string                out;
};

struct Options
{
  CLI::Option *ns, *t, *instances, *warmup, *seed, *combine, *proofs, *lazy, *adversary, *faults, *coin,
      *proposals, *jobs, *traces, *check_replay, *fairness;
};

Options add_experiment_flags(CLI::App &app, Flags &f)
{
  Options o{};
  app.add_option("--config", f.config_file, "JSON experiment config; flags override it")
      ->check(CLI::ExistingFile);
  o.ns        = app.add_option("--n", f.ns, "group sizes, comma separated")->delimiter(',');
  o.t         = app.add_option("--t", f.t, "tolerated faults (default floor((n-1)/3))");
  o.instances = app.add_option("--instances", f.instances, "measured instances per n");
  o.warmup    = app.add_option("--warmup", f.warmup, "warmup instances per n, not measured");
  o.seed      = app.add_option("--seed", f.seed, "master seed");
  o.combine   = app.add_flag("--combine-messages,!--no-combine-messages", f.combine,
                             "piggyback coin shares on the next vote");
  o.proofs    = app.add_flag("--include-proofs,!--no-include-proofs", f.proofs,
                             "attach proofs to votes (off: on request)");
  o.lazy      = app.add_flag("--lazy-stop,!--no-lazy-stop", f.lazy, "send decision proofs only to laggards");
  o.adversary = app.add_option("--adversary", f.adversary, "scheduler")
                    ->check(CLI::IsMember({"fifo", "random", "heuristic"}));
  o.faults    = app.add_option("--faults", f.faults,
                               "none, a fault kind for t processes, or kind:pid[@step],...");
  o.coin      = app.add_option("--coin", f.coin, "coin source")->check(CLI::IsMember({"real", "override"}));
  o.proposals = app.add_option("--proposals", f.proposals, "proposal source")
                    ->check(CLI::IsMember({"random", "zeros", "ones"}));
  o.jobs      = app.add_option("--jobs", f.jobs, "worker threads");
  o.traces    = app.add_option("--traces", f.traces, "directory for per-instance trace files");
  o.check_replay = app.add_flag("--check-replay", f.check_replay, "replay every measured instance");
  o.fairness     = app.add_option("--fairness-bound", f.fairness, "scheduler postponement bound (0: 50 n)");
  app.add_option("--format", f.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", f.out, "output file (default stdout)");
  return o;
}

ExperimentConfig resolve(Flags const &f, Options const &o)
{
  ExperimentConfig c;
  if (!f.config_file.empty())
  {
    std::ifstream in(f.config_file);
    try
    {
      c = ExperimentConfig::from_json(nlohmann::json::parse(in));
    }
    catch (nlohmann::json::exception const &e)
    {
      throw bbc::ConfigError(std::string("cannot parse ") + f.config_file + ": " + e.what());
    }
  }
  if (o.ns->count() > 0)
  {
    c.ns = f.ns;
  }
  if (o.t->count() > 0)
  {
    c.t = f.t;
  }
  if (o.instances->count() > 0)
  {
    c.instances = f.instances;
  }
  if (o.warmup->count() > 0)
  {
    c.warmup = f.warmup;
  }
  if (o.seed->count() > 0)
  {
    c.seed = f.seed;
  }
  if (o.combine->count() > 0)
  {
    c.mode.combine_messages = f.combine;
  }
  if (o.proofs->count() > 0)
  {
    c.mode.include_proofs = f.proofs;
  }
  if (o.lazy->count() > 0)
  {
    c.mode.lazy_stop = f.lazy;
  }
  if (o.adversary->count() > 0)
  {
    c.adversary = bbc::sim::parse_adversary(f.adversary);
  }
  if (o.faults->count() > 0)
  {
    c.faults = f.faults;
  }
  if (o.coin->count() > 0)
  {
    c.coin = bbc::harness::parse_coin_mode(f.coin);
  }
  if (o.proposals->count() > 0)
  {
    c.proposals = f.proposals;
  }
  if (o.jobs->count() > 0)
  {
    c.jobs = f.jobs;
  }
  if (o.traces->count() > 0)
  {
    c.trace_dir = f.traces;
  }
  if (o.check_replay->count() > 0)
  {
    c.check_replay = f.check_replay;
  }
  if (o.fairness->count() > 0)
  {
    c.fairness_bound = f.fairness;
  }
  return c;
}

void write_out(std::string const &path, std::string const &text)
{
  if (path.empty())
  {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
  {
    throw bbc::Error("cannot write " + path);
  }
}

nlohmann::ordered_json summary(bbc::sim::InstanceResult const &r)
{
  nlohmann::ordered_json j;
  j["status"]   = r.finished() ? "finished" : "stalled";
  j["steps"]    = r.steps;
  j["messages"] = r.messages_sent;
  j["bytes"]    = r.bytes_sent;
  j["processes"] = nlohmann::ordered_json::array();
  for (auto const &p : r.processes)
  {
    nlohmann::ordered_json q;
    q["id"]            = p.id;
    q["honest"]        = p.honest;
    q["phase"]         = bbc::to_string(p.phase);
    q["decision"]      = p.decision ? nlohmann::ordered_json(bbc::to_int(p.decision->value)) : nullptr;
    q["round"]         = p.decision ? nlohmann::ordered_json(p.decision->round) : nullptr;
    q["participation"] = p.participation;
    q["digest"]        = bbc::to_hex(bbc::Bytes{reinterpret_cast<std::uint8_t const *>(&p.digest),
                                                reinterpret_cast<std::uint8_t const *>(&p.digest) + 8});
    j["processes"].push_back(q);
  }
  return j;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Randomized asynchronous binary Byzantine consensus simulator"};
  app.require_subcommand(1);

  Flags run_flags;
  auto *run     = app.add_subcommand("run", "run an experiment and report round statistics");
  auto  run_opt = add_experiment_flags(*run, run_flags);

  Flags cmp_flags;
  auto *cmp     = app.add_subcommand("compare", "base against combined mode over identical seeds");
  auto  cmp_opt = add_experiment_flags(*cmp, cmp_flags);

  std::string trace_path;
  std::string replay_out;
  auto       *rep = app.add_subcommand("replay", "re-execute a stored trace and check it record by record");
  rep->add_option("trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", replay_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (run->parsed())
    {
      auto config = resolve(run_flags, run_opt);
      auto report = bbc::harness::run_experiment(config);
      write_out(run_flags.out, bbc::harness::emit(report, bbc::harness::parse_format(run_flags.format)));
      for (auto const &f : report.failures)
      {
        std::cerr << f << '\n';
      }
      return report.green() ? 0 : 1;
    }
    if (cmp->parsed())
    {
      auto config = resolve(cmp_flags, cmp_opt);
      auto diff   = bbc::harness::compare_modes(config);
      auto j      = bbc::harness::to_json(diff);
      std::string text;
      if (cmp_flags.format == "csv")
      {
        text = "metric,value\n";
        for (auto const &[key, value] : j.items())
        {
          if (value.is_primitive())
          {
            text += key + "," + value.dump() + "\n";
          }
        }
      }
      else
      {
        text = j.dump(2) + "\n";
      }
      write_out(cmp_flags.out, text);
      bool ok = diff.all_match() && diff.base.green() && diff.combined.green();
      return ok ? 0 : 1;
    }
    auto trace  = bbc::sim::load_trace(trace_path);
    auto result = bbc::sim::replay(trace);
    auto j      = summary(result);
    j["replay"] = "identical";
    write_out(replay_out, j.dump(2) + "\n");
    return 0;
  }
  catch (bbc::sim::ReplayDivergence const &e)
  {
    std::cerr << "replay diverged: " << e.what() << '\n';
    return 1;
  }
  catch (bbc::ConfigError const &e)
  {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }
  catch (bbc::Error const &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
