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

#include "bbc/coin.hpp"
#include "bbc/validity.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

namespace bbc::sim {
namespace {

struct Copy
{
  ProcessId     from = 0;
  ProcessId     to   = 0;
  Bytes const  *bytes = nullptr;
  bool          delivered = false;
};

std::uint32_t read_u32(Bytes const &b, std::size_t at)
{
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
  {
    v |= static_cast<std::uint32_t>(b.at(at + i)) << (8 * i);
  }
  return v;
}

AuxProofMsg const *vote_of(Message const &msg)
{
  if (auto const *a = std::get_if<AuxProofMsg>(&msg))
  {
    return a;
  }
  if (auto const *c = std::get_if<CombinedMsg>(&msg))
  {
    return &c->aux;
  }
  return nullptr;
}

class Auditor
{
public:
  Auditor(SimConfig const &config, InstanceResult const &result)
    : cfg_{config}
    , res_{result}
    , params_{config.params}
  {}

  std::vector<Finding> run()
  {
    consensus();
    unanimity();
    if (!res_.trace.records.empty())
    {
      scan();
      double_quorum();
      provability();
      decision_window();
    }
    return std::move(out_);
  }

private:
  template <typename... Parts>
  void fail(Check c, Parts const &...parts)
  {
    std::ostringstream s;
    (s << ... << parts);
    out_.push_back(Finding{c, s.str()});
  }

  void consensus()
  {
    if (!res_.finished())
    {
      fail(Check::termination, "run stalled: ", res_.stall_reason);
    }
    std::optional<Bin> agreed;
    std::set<Bin>      proposed;
    for (auto const &p : res_.processes)
    {
      if (!p.honest)
      {
        continue;
      }
      proposed.insert(p.proposal);
      if (!p.decision)
      {
        fail(Check::termination, "process ", p.id, " never decided");
        continue;
      }
      if (agreed && *agreed != p.decision->value)
      {
        fail(Check::agreement, "process ", p.id, " decided ", to_string(p.decision->value), " against ",
             to_string(*agreed));
      }
      agreed = agreed.value_or(p.decision->value);
    }
    for (auto const &p : res_.processes)
    {
      if (p.honest && p.decision && !proposed.contains(p.decision->value))
      {
        fail(Check::validity, "process ", p.id, " decided ", to_string(p.decision->value),
             " which no honest process proposed");
      }
    }
    proposed_ = proposed;
  }

  void scan()
  {
    std::vector<bool> crashed(params_.n, false);
    std::map<std::uint64_t, Copy> copies;
    std::vector<std::optional<Round>> decided(params_.n);
    std::uint64_t                     delivered_total = 0;
    std::vector<std::uint64_t>        delivered_seqs;

    for (auto const &r : res_.trace.records)
    {
      switch (r.kind)
      {
      case RecordKind::send: {
        auto env = decode_envelope(r.payload);
        bytes_.push_back(std::make_unique<Bytes>(env.bytes));
        auto const *bytes = bytes_.back().get();
        if (env.peer == Envelope::kBroadcast)
        {
          for (ProcessId j = 0; j < params_.n; ++j)
          {
            copies[env.seq + j] = Copy{r.process, j, bytes};
          }
        }
        else
        {
          copies[env.seq] = Copy{r.process, env.peer, bytes};
        }
        if (!cfg_.faulty(r.process))
        {
          note_honest_send(r.process, *bytes);
        }
        break;
      }
      case RecordKind::deliver: {
        auto env = decode_envelope(r.payload);
        auto it  = copies.find(env.seq);
        if (it == copies.end())
        {
          fail(Check::reliability, "delivery of unsent seq ", env.seq);
          break;
        }
        auto &copy = it->second;
        if (copy.delivered)
        {
          fail(Check::reliability, "seq ", env.seq, " delivered twice");
        }
        if (copy.from != env.peer || copy.to != r.process || *copy.bytes != env.bytes)
        {
          fail(Check::reliability, "seq ", env.seq, " delivered altered");
        }
        if (crashed[r.process])
        {
          fail(Check::reliability, "seq ", env.seq, " delivered to crashed process ", r.process);
        }
        copy.delivered = true;
        if (copy.from != copy.to)
        {
          delivered_seqs.push_back(env.seq);
        }
        ++delivered_total;
        break;
      }
      case RecordKind::accept: {
        if (r.payload.empty())
        {
          fail(Check::double_quorum, "empty accept record");
          break;
        }
        auto vote     = decode_signed_aux(ByteView(r.payload).first(r.payload.size() - 1));
        auto resolved = static_cast<Bin>(r.payload.back());
        accepted_.push_back({vote, resolved});
        break;
      }
      case RecordKind::coin: {
        auto round = read_u32(r.payload, 0);
        auto bit   = static_cast<Bin>(r.payload.at(4));
        auto known = coins_.get(round);
        if (known && *known != bit)
        {
          fail(Check::coins, "process ", r.process, " saw coin ", round, " = ", to_string(bit), " against ",
               to_string(*known));
        }
        else if (!known)
        {
          coins_.set(round, bit);
        }
        if (cfg_.coin_override && override_bit(*cfg_.coin_override, round) != bit)
        {
          fail(Check::coins, "coin ", round, " differs from its override bit");
        }
        break;
      }
      case RecordKind::decide: {
        if (decided[r.process])
        {
          fail(Check::agreement, "process ", r.process, " decided twice");
        }
        decided[r.process] = read_u32(r.payload, 0);
        break;
      }
      case RecordKind::crash:
        crashed[r.process] = true;
        break;
      default:
        break;
      }
    }

    fairness(delivered_seqs);
  }

  void fairness(std::vector<std::uint64_t> const &order)
  {
    if (order.empty())
    {
      return;
    }
    auto const                 top = *std::max_element(order.begin(), order.end()) + 1;
    std::vector<std::uint32_t> tree(top + 1, 0);
    std::uint64_t              seen  = 0;
    std::uint64_t              worst = 0;
    for (auto seq : order)
    {
      std::uint64_t upto = 0;
      for (auto i = seq + 1; i > 0; i -= i & (~i + 1))
      {
        upto += tree[i];
      }
      worst = std::max(worst, seen - upto);
      for (auto i = seq + 1; i <= top; i += i & (~i + 1))
      {
        ++tree[i];
      }
      ++seen;
    }
    if (worst > cfg_.effective_fairness())
    {
      fail(Check::fairness, "an event was overtaken ", worst, " times, bound ", cfg_.effective_fairness());
    }
    if (worst != res_.max_postponement)
    {
      fail(Check::fairness, "trace postponement ", worst, " differs from reported ", res_.max_postponement);
    }
  }

  void note_honest_send(ProcessId from, Bytes const &bytes)
  {
    try
    {
      auto msg = decode(bytes, DecodeLimits{params_.n});
      if (auto const *v = vote_of(msg); v != nullptr && v->vote.signer() == from)
      {
        signed_.try_emplace({v->vote.aux.round, v->vote.aux.value}, SignerSet(params_.n))
            .first->second.insert(from);
      }
    }
    catch (MalformedMessage const &)
    {
    }
  }

  void double_quorum()
  {
    std::map<Round, std::array<SignerSet, 2>> cells;
    for (auto const &[vote, resolved] : accepted_)
    {
      auto &cell = cells.try_emplace(vote.aux.round, std::array{SignerSet(params_.n), SignerSet(params_.n)})
                       .first->second;
      cell[static_cast<std::size_t>(resolved)].insert(vote.signer());
    }
    for (auto const &[round, cell] : cells)
    {
      if (cell[0].size() >= params_.quorum() && cell[1].size() >= params_.quorum())
      {
        fail(Check::double_quorum, "round ", round, " has n - t accepted votes for both values");
      }
    }
  }

  /// Could some proof for (r, b) exist, given what honest processes signed?
  bool provable(Round r, Bin b)
  {
    Round p = 0;
    try
    {
      p = validity::prev_round(r, b, coins_);
    }
    catch (Error const &)
    {
      return true;
    }
    std::uint32_t faulty = static_cast<std::uint32_t>(cfg_.faults.size());
    if (p == 0)
    {
      return honest_signers(0, b) + faulty >= params_.t + 1;
    }
    return honest_signers(p, b) + faulty >= params_.quorum();
  }

  std::uint32_t honest_signers(Round round, Bin b)
  {
    SignerSet all(params_.n);
    auto      add = [&](AuxValue v) {
      auto it = signed_.find({round, v});
      if (it != signed_.end())
      {
        all |= it->second;
      }
    };
    add(to_aux(b));
    if (round >= 2 && coins_.get(round - 1) == b)
    {
      add(AuxValue::c_val);
    }
    return static_cast<std::uint32_t>(all.size());
  }

  void provability()
  {
    std::set<std::pair<Round, Bin>> done;
    for (auto const &[vote, resolved] : accepted_)
    {
      auto rn = vote.aux.round;
      if (rn < 2 || !done.insert({rn, resolved}).second)
      {
        continue;
      }
      for (Round rf = 1; rf < rn; ++rf)
      {
        if (!provable(rf, resolved))
        {
          fail(Check::provability, "value ", to_string(resolved), " accepted in round ", rn,
               " although it could not be proven in round ", rf);
          break;
        }
      }
    }
    for (auto const &[vote, resolved] : accepted_)
    {
      if (vote.aux.round >= 1 && !proposed_.contains(resolved))
      {
        fail(Check::validity, "vote for ", to_string(resolved), " accepted in round ", vote.aux.round,
             " though no honest process proposed it");
        break;
      }
    }
  }

  void decision_window()
  {
    std::optional<Round> first;
    for (auto const &p : res_.processes)
    {
      if (p.honest && p.decision)
      {
        first = std::min(first.value_or(p.decision->round), p.decision->round);
      }
    }
    if (!first)
    {
      return;
    }
    auto coin = coins_.get(*first);
    if (!coin)
    {
      fail(Check::decision_window, "no coin recorded for the first deciding round ", *first);
      return;
    }
    std::optional<Round> next;
    for (Round r = *first + 1; r <= coins_.highest(); ++r)
    {
      if (coins_.get(r) == coin)
      {
        next = r;
        break;
      }
    }
    for (auto const &p : res_.processes)
    {
      if (!p.honest || !p.decision)
      {
        continue;
      }
      auto d = p.decision->round;
      if (d != *first && d != next)
      {
        fail(Check::decision_window, "process ", p.id, " decided in round ", d, ", first deciding round ", *first);
      }
    }
  }

  void unanimity()
  {
    if (!cfg_.coin_override || proposed_.size() != 1)
    {
      return;
    }
    auto  v     = *proposed_.begin();
    Round round = 1;
    while (override_bit(*cfg_.coin_override, round) != v)
    {
      ++round;
    }
    for (auto const &p : res_.processes)
    {
      if (p.honest && p.decision && (p.decision->round != round || p.decision->value != v))
      {
        fail(Check::unanimity, "process ", p.id, " decided ", to_string(p.decision->value), " in round ",
             p.decision->round, ", expected ", to_string(v), " in round ", round);
      }
    }
  }

  SimConfig const      &cfg_;
  InstanceResult const &res_;
  Params                params_;
  std::vector<Finding>  out_;
  std::set<Bin>         proposed_;
  CoinMap               coins_;

  std::vector<std::unique_ptr<Bytes>>                 bytes_;
  std::vector<std::pair<SignedAux, Bin>>              accepted_;
  std::map<std::pair<Round, AuxValue>, SignerSet>     signed_;
};

}  // namespace

std::string to_string(Check c)
{
  static constexpr std::array<char const *, kCheckCount> names = {
      "agreement", "validity", "termination", "unanimity", "double_quorum",
      "provability",  "decision_window", "coins",        "fairness",  "reliability"};
  return names.at(static_cast<std::size_t>(c));
}

std::vector<Finding> audit(SimConfig const &config, InstanceResult const &result)
{
  return Auditor(config, result).run();
}

std::size_t count(std::vector<Finding> const &findings, Check check)
{
  return static_cast<std::size_t>(
      std::count_if(findings.begin(), findings.end(), [&](Finding const &f) { return f.check == check; }));
}

}  // namespace bbc::sim
