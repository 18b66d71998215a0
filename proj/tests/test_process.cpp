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

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <deque>
#include <set>

using namespace bbc;
using bbc::testing::aux_broadcasts;
using bbc::testing::count_kind;
using bbc::testing::Group;

namespace {

/// Loopback network: every process, FIFO delivery, optional reordering by
/// a fixed stride.
struct Cluster
{
  Group                g;
  std::vector<Process> procs;
  std::deque<std::tuple<ProcessId, ProcessId, Message>> queue;
  std::uint64_t        delivered = 0;

  Cluster(std::uint32_t n, ModeFlags mode, std::optional<std::uint64_t> override_seed = {})
    : g(n, max_faults(n))
  {
    for (ProcessId i = 0; i < n; ++i)
    {
      procs.push_back(g.process(i, mode, override_seed));
    }
  }

  void push(ProcessId from, ProtocolOutput const &out)
  {
    for (auto const &o : out.out)
    {
      if (o.to)
      {
        queue.emplace_back(from, *o.to, o.msg);
        continue;
      }
      for (ProcessId j = 0; j < procs.size(); ++j)
      {
        queue.emplace_back(from, j, o.msg);
      }
    }
  }

  void run(std::vector<Bin> const &proposals, std::size_t stride = 1)
  {
    for (ProcessId i = 0; i < procs.size(); ++i)
    {
      push(i, procs[i].start(proposals[i]));
    }
    std::size_t cursor = 0;
    while (!queue.empty() && delivered < 200000)
    {
      cursor      = (cursor + stride - 1) % queue.size();
      auto item   = queue[cursor];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(cursor));
      auto [from, to, msg] = item;
      ++delivered;
      push(to, procs[to].on_message(from, msg));
      if (!queue.empty())
      {
        cursor %= queue.size();
      }
      else
      {
        cursor = 0;
      }
    }
  }
};

/// Feeds p0 of `g` its own round-0 vote plus votes for `b` from 1 and 2.
Process round0_all(Group const &g, Bin b, ModeFlags mode, ProtocolOutput &last)
{
  auto p   = g.process(0, mode);
  auto out = p.start(b);
  p.on_aux(0, aux_broadcasts(out).at(0));
  p.on_aux(1, g.aux(1, 0, b));
  last = p.on_aux(2, g.aux(2, 0, b));
  return p;
}

}  // namespace

TEST_CASE("start broadcasts an unproved round-zero vote once")
{
  Group g(4, 1);
  auto  p   = g.process(0);
  auto  out = p.start(Bin::one);
  auto  b   = aux_broadcasts(out);
  REQUIRE(b.size() == 1);
  CHECK(b[0].vote.aux.round == 0);
  CHECK(b[0].vote.aux.value == AuxValue::one);
  CHECK(b[0].proofs.empty());
  CHECK(b[0].vote.signer() == 0);
  CHECK(p.phase() == Phase::await_round0);
  CHECK_THROWS_AS(p.start(Bin::zero), ProtocolError);
}

TEST_CASE("round-zero estimate takes a value with t + 1 support")
{
  Group g(4, 1);
  auto  p = g.process(0);
  auto  s = p.start(Bin::one);
  p.on_aux(0, aux_broadcasts(s).at(0));
  CHECK(aux_broadcasts(p.on_aux(2, g.aux(2, 0, Bin::zero))).empty());
  auto out = p.on_aux(3, g.aux(3, 0, Bin::zero));
  auto b   = aux_broadcasts(out);
  REQUIRE(b.size() == 1);
  CHECK(b[0].vote.aux.round == 1);
  CHECK(b[0].vote.aux.value == AuxValue::zero);
  CHECK(b[0].proofs == std::vector<SignedAux>{g.vote(2, 0, Bin::zero), g.vote(3, 0, Bin::zero)});
  CHECK(p.round() == 1);
  CHECK(p.participation_round() == 1);
}

TEST_CASE("round-zero estimate keeps one when zero lacks t + 1 support")
{
  Group g(4, 1);
  auto  p = g.process(0);
  p.start(Bin::one);
  p.on_aux(1, g.aux(1, 0, Bin::zero));
  p.on_aux(2, g.aux(2, 0, Bin::one));
  auto out = p.on_aux(3, g.aux(3, 0, Bin::one));
  auto b   = aux_broadcasts(out);
  REQUIRE(b.size() == 1);
  CHECK(b[0].vote.aux.value == AuxValue::one);
  CHECK(b[0].proofs == std::vector<SignedAux>{g.vote(2, 0, Bin::one), g.vote(3, 0, Bin::one)});
}

TEST_CASE("unanimous round one decides on the coin value")
{
  Group g(4, 1);
  auto  c = g.coin_bit(1);
  for (bool lazy : {true, false})
  {
    CAPTURE(lazy);
    ModeFlags      mode{.combine_messages = false, .include_proofs = true, .lazy_stop = lazy};
    ProtocolOutput last;
    auto           p      = round0_all(g, c, mode, last);
    auto           proofs = std::vector<SignedAux>{g.vote(1, 0, c), g.vote(2, 0, c)};
    p.on_aux(0, aux_broadcasts(last).at(0));
    p.on_aux(1, g.aux(1, 1, c, proofs));
    auto q = p.on_aux(2, g.aux(2, 1, c, proofs));
    CHECK(count_kind<CoinShare>(q) == 1);
    CHECK(p.phase() == Phase::await_coin);

    p.on_coin_share(1, g.share(1, 1));
    p.on_coin_share(2, g.share(2, 1));
    auto d = p.on_coin_share(0, g.share(0, 1));
    REQUIRE(d.decided.has_value());
    CHECK(d.decided->round == 1);
    CHECK(d.decided->value == c);
    CHECK_FALSE(d.decided->adopted);
    CHECK(d.coins == std::vector<std::pair<Round, Bin>>{{1, c}});
    REQUIRE(p.decision_proof().has_value());
    CHECK(p.decision_proof()->votes.size() == 3);
    if (lazy)
    {
      CHECK(count_kind<DecisionProof>(d) == 0);
      CHECK(p.phase() == Phase::decided);
      // A process showing up in round 2 triggers the proof.
      auto rel = p.on_aux(3, g.aux(3, 2, c, {g.vote(0, 0, c), g.vote(1, 0, c)}));
      CHECK(count_kind<DecisionProof>(rel) == 1);
      CHECK(rel.stopped);
      CHECK(p.phase() == Phase::stopped);
    }
    else
    {
      CHECK(count_kind<DecisionProof>(d) == 1);
      CHECK(d.stopped);
      CHECK(p.phase() == Phase::stopped);
    }
  }
}

TEST_CASE("a lazy decider with a peer already ahead releases at once")
{
  Group          g(4, 1);
  auto           c = g.coin_bit(1);
  ProtocolOutput last;
  auto           p      = round0_all(g, c, ModeFlags{}, last);
  auto           proofs = std::vector<SignedAux>{g.vote(1, 0, c), g.vote(2, 0, c)};
  p.on_aux(0, aux_broadcasts(last).at(0));
  p.on_aux(1, g.aux(1, 1, c, proofs));
  p.on_aux(2, g.aux(2, 1, c, proofs));
  p.on_coin_share(3, g.share(3, 2));
  p.on_coin_share(1, g.share(1, 1));
  p.on_coin_share(2, g.share(2, 1));
  auto d = p.on_coin_share(0, g.share(0, 1));
  REQUIRE(d.decided.has_value());
  CHECK(count_kind<DecisionProof>(d) == 1);
  CHECK(d.stopped);
}

TEST_CASE("a split round neither decides nor decides late")
{
  Group g(4, 1);
  auto  c = g.coin_bit(1);
  auto  n = negate(c);
  auto  p = g.process(0);
  auto  s = p.start(c);
  p.on_aux(0, aux_broadcasts(s).at(0));
  p.on_aux(1, g.aux(1, 0, c));
  auto r1 = p.on_aux(2, g.aux(2, 0, n));
  p.on_aux(3, g.aux(3, 0, n));
  auto v1 = aux_broadcasts(r1).at(0);
  CHECK(v1.vote.aux.value == to_aux(c));

  auto pc = std::vector<SignedAux>{g.vote(0, 0, c), g.vote(1, 0, c)};
  auto pn = std::vector<SignedAux>{g.vote(2, 0, n), g.vote(3, 0, n)};
  p.on_aux(0, v1);
  p.on_aux(2, g.aux(2, 1, n, pn));
  auto q = p.on_aux(3, g.aux(3, 1, c, pc));
  REQUIRE(count_kind<CoinShare>(q) == 1);

  p.on_coin_share(1, g.share(1, 1));
  p.on_coin_share(2, g.share(2, 1));
  auto reveal = p.on_coin_share(3, g.share(3, 1));
  CHECK(reveal.coins == std::vector<std::pair<Round, Bin>>{{1, c}});
  CHECK_FALSE(reveal.decided.has_value());
  CHECK(p.round() == 2);
  auto next = aux_broadcasts(reveal);
  REQUIRE(next.size() == 1);
  CHECK(next[0].vote.aux.value == to_aux(c));

  // The late vote makes n - t for c in round 1, but the check already ran.
  auto late = p.on_aux(1, g.aux(1, 1, c, pc));
  CHECK(late.accepted.size() == 1);
  CHECK(p.tally().support(1, c, p.coins()).size() == 3);
  CHECK_FALSE(late.decided.has_value());
  CHECK_FALSE(p.decision().has_value());
}

TEST_CASE("decision proofs are adopted and forged ones dropped")
{
  Cluster cl(4, ModeFlags{.combine_messages = false, .include_proofs = true, .lazy_stop = false});
  auto    c = cl.g.coin_bit(1);
  cl.run({c, c, c, c});
  auto const &proof = cl.procs[0].decision_proof();
  REQUIRE(proof.has_value());

  auto q = cl.g.process(3);
  q.start(c);
  auto forged  = *proof;
  forged.value = negate(proof->value);
  auto bad     = q.on_decision_proof(0, forged);
  CHECK(bad.dropped);
  auto short_proof = *proof;
  short_proof.votes.pop_back();
  CHECK(q.on_decision_proof(0, short_proof).dropped);
  auto other_round  = *proof;
  other_round.round = proof->round + 1;
  CHECK(q.on_decision_proof(0, other_round).dropped);
  CHECK_FALSE(q.decision().has_value());

  auto good = q.on_decision_proof(0, *proof);
  REQUIRE(good.decided.has_value());
  CHECK(good.decided->adopted);
  CHECK(good.decided->value == proof->value);
  CHECK(good.decided->round == proof->round);
  CHECK(q.coins().get(proof->round) == proof->value);
  CHECK(q.phase() == Phase::stopped);
  CHECK(q.on_decision_proof(0, *proof).out.empty());
}

TEST_CASE("wrong-mode, foreign and malformed messages are dropped")
{
  Group g(4, 1);
  auto  base = g.process(0);
  base.start(Bin::zero);
  CHECK(base.on_combined(1, CombinedMsg{g.share(1, 1), g.aux(1, 2, AuxValue::c_val)}).dropped);
  CHECK(base.on_aux(1, g.aux(1, 2, AuxValue::c_val)).dropped);
  CHECK(base.on_aux(2, g.aux(1, 0, Bin::zero)).dropped);
  CHECK(base.on_coin_share(2, g.share(1, 1)).dropped);
  CHECK(base.on_coin_share(1, CoinShare{g.tag, 0, g.share(1, 1).sig}).dropped);
  auto foreign = g.aux(1, 0, Bin::zero);
  foreign.vote.aux.instance[0] ^= 1;
  CHECK(base.on_aux(1, foreign).dropped);
  auto bad_sig = g.aux(1, 0, Bin::zero);
  bad_sig.vote.sig.mac[0] ^= 1;
  CHECK(base.on_aux(1, bad_sig).dropped);
  CHECK(base.on_aux(1, g.aux(1, 0, Bin::zero, {g.vote(2, 0, Bin::zero)})).dropped);
  CHECK(base.on_aux(1, g.aux(1, 1, Bin::zero)).dropped);
  CHECK(base.on_aux(1, g.aux(1, 1, Bin::zero, {g.vote(2, 0, Bin::zero)})).dropped);
  CHECK(base.on_aux(1, g.aux(1, 500, Bin::zero)).dropped);
  CHECK(base.tally().union_size(0) == 0);

  auto comb = g.process(0, ModeFlags{.combine_messages = true});
  comb.start(Bin::zero);
  CHECK(comb.on_coin_share(1, g.share(1, 1)).dropped);
  CHECK(comb.on_aux(1, g.aux(1, 1, AuxValue::c_val)).dropped);
  CHECK(comb.on_combined(1, CombinedMsg{g.share(1, 1), g.aux(1, 3, Bin::zero)}).dropped);
}

TEST_CASE("proofs are requested, served and resolve the parked vote")
{
  ModeFlags off{.combine_messages = false, .include_proofs = false, .lazy_stop = true};
  Group     g(4, 1);

  auto sender = g.process(1, off);
  sender.on_aux(1, aux_broadcasts(sender.start(Bin::one)).at(0));
  sender.on_aux(2, g.aux(2, 0, Bin::one));
  auto s = sender.on_aux(3, g.aux(3, 0, Bin::one));
  auto b = aux_broadcasts(s);
  REQUIRE(b.size() == 1);
  CHECK(b[0].proofs.empty());
  CHECK(sender.own_proofs(1, AuxValue::one) ==
        std::vector<SignedAux>{g.vote(1, 0, Bin::one), g.vote(2, 0, Bin::one)});

  auto p = g.process(0, off);
  p.start(Bin::zero);
  auto r = p.on_aux(1, b[0]);
  REQUIRE(count_kind<ProofRequest>(r) == 1);
  auto const &req = std::get<ProofRequest>(r.out.at(0).msg);
  CHECK(r.out.at(0).to == ProcessId{1});
  CHECK(req.round == 1);
  CHECK(req.value == AuxValue::one);
  CHECK(req.requester == 0);
  CHECK(p.pending_requests() == 1);
  CHECK(count_kind<ProofRequest>(p.on_aux(1, b[0])) == 0);

  auto unknown = sender.on_proof_request(0, ProofRequest{g.tag, 1, AuxValue::zero, 0});
  CHECK(unknown.out.empty());
  CHECK(sender.stats().requests_unanswered == 1);
  CHECK(sender.on_proof_request(0, ProofRequest{g.tag, 1, AuxValue::one, 2}).dropped);

  auto resp = sender.on_proof_request(0, req);
  REQUIRE(count_kind<ProofResponse>(resp) == 1);
  CHECK(resp.out.at(0).to == ProcessId{0});

  auto acc = p.on_message(1, resp.out.at(0).msg);
  REQUIRE(acc.accepted.size() == 1);
  CHECK(acc.accepted[0].vote == b[0].vote);
  CHECK(p.pending_requests() == 0);
  CHECK(p.stats().responses_resolved == 1);
  CHECK(p.stats().invalid_after_response == 0);
  CHECK(p.store().contains(g.vote(1, 0, Bin::one)));
}

TEST_CASE("a vote provable from the store needs no request")
{
  ModeFlags off{.combine_messages = false, .include_proofs = false, .lazy_stop = true};
  Group     g(4, 1);
  auto      p = g.process(0, off);
  p.start(Bin::one);
  p.on_aux(2, g.aux(2, 0, Bin::one));
  p.on_aux(3, g.aux(3, 0, Bin::one));
  auto r = p.on_aux(1, g.aux(1, 1, Bin::one));
  CHECK(count_kind<ProofRequest>(r) == 0);
  CHECK(r.accepted.size() == 1);
}

TEST_CASE("an unhelpful response leaves the vote unaccepted")
{
  ModeFlags off{.combine_messages = false, .include_proofs = false, .lazy_stop = true};
  Group     g(4, 1);
  auto      p = g.process(0, off);
  p.start(Bin::zero);
  p.on_aux(1, g.aux(1, 1, Bin::one));
  auto r = p.on_proof_response(1, ProofResponse{g.tag, 1, AuxValue::one, {g.vote(2, 0, Bin::one)}});
  CHECK(r.accepted.empty());
  CHECK(p.stats().invalid_after_response == 1);
  CHECK(p.on_proof_response(2, ProofResponse{g.tag, 1, AuxValue::one, {}}).out.empty());
  CHECK(p.stats().ignored >= 1);
}

TEST_CASE("combined mode piggybacks the share and votes c_val on a split")
{
  Group     g(4, 1);
  ModeFlags comb{.combine_messages = true, .include_proofs = true, .lazy_stop = true};
  auto      p = g.process(0, comb);
  auto      s = p.start(Bin::zero);
  p.on_aux(0, aux_broadcasts(s).at(0));
  p.on_aux(1, g.aux(1, 0, Bin::zero));
  auto r1 = p.on_aux(2, g.aux(2, 0, Bin::one));
  p.on_aux(3, g.aux(3, 0, Bin::one));
  auto v1 = aux_broadcasts(r1).at(0);
  CHECK(v1.vote.aux.value == AuxValue::zero);
  p.on_aux(0, v1);
  auto z = std::vector<SignedAux>{g.vote(0, 0, Bin::zero), g.vote(1, 0, Bin::zero)};
  auto o = std::vector<SignedAux>{g.vote(2, 0, Bin::one), g.vote(3, 0, Bin::one)};
  p.on_aux(1, g.aux(1, 1, Bin::zero, z));
  auto q = p.on_aux(2, g.aux(2, 1, Bin::one, o));
  CHECK(count_kind<CoinShare>(q) == 0);
  REQUIRE(count_kind<CombinedMsg>(q) == 1);
  auto const &cm = std::get<CombinedMsg>(q.out.at(0).msg);
  CHECK(cm.coin.round == 1);
  CHECK(cm.aux.vote.aux.round == 2);
  CHECK(cm.aux.vote.aux.value == AuxValue::c_val);
  CHECK(p.participation_round() == 2);
  // Proofs cover both possible coin values.
  auto mixed = cm.aux.proofs;
  CHECK(std::any_of(mixed.begin(), mixed.end(), [](auto const &v) { return v.aux.value == AuxValue::zero; }));
  CHECK(std::any_of(mixed.begin(), mixed.end(), [](auto const &v) { return v.aux.value == AuxValue::one; }));
}

TEST_CASE("loopback clusters agree in every mode")
{
  for (std::uint32_t n : {4U, 7U})
  {
    for (int m = 0; m < 8; ++m)
    {
      ModeFlags mode{.combine_messages = (m & 1) != 0, .include_proofs = (m & 2) != 0,
                     .lazy_stop = (m & 4) != 0};
      for (std::size_t stride : {1U, 3U, 7U})
      {
        Cluster cl(n, mode, 5 + stride);
        std::vector<Bin> props;
        for (ProcessId i = 0; i < n; ++i)
        {
          props.push_back(bin_of(((i * 5 + stride) % 3) == 0));
        }
        cl.run(props, stride);
        CAPTURE(n);
        CAPTURE(m);
        CAPTURE(stride);
        std::set<Bin> values;
        for (auto const &p : cl.procs)
        {
          REQUIRE(p.decision().has_value());
          values.insert(p.decision()->value);
          CHECK(p.halted());
          if (!mode.lazy_stop)
          {
            CHECK(p.phase() == Phase::stopped);
          }
        }
        CHECK(values.size() == 1);
      }
    }
  }
}

TEST_CASE("unanimous clusters decide the proposal")
{
  for (auto b : {Bin::zero, Bin::one})
  {
    Cluster cl(7, ModeFlags{}, 41);
    cl.run(std::vector<Bin>(7, b), 2);
    for (auto const &p : cl.procs)
    {
      REQUIRE(p.decision().has_value());
      CHECK(p.decision()->value == b);
    }
  }
}

TEST_CASE("digest changes with state and is stable otherwise")
{
  Group g(4, 1);
  auto  a = g.process(0);
  auto  b = g.process(0);
  CHECK(a.digest() == b.digest());
  a.start(Bin::one);
  CHECK(a.digest() != b.digest());
  b.start(Bin::one);
  CHECK(a.digest() == b.digest());
}
