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

#include "bbc/simnet.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

namespace bbc::sim {
namespace {

constexpr std::uint64_t kAdversaryStream = 0x616476;
constexpr std::uint64_t kByzantineStream = 0x62797a;

struct Packet
{
  Bytes                   bytes;
  std::optional<Message>  msg;
  std::optional<AuxValue> vote_value;
};
using PacketPtr = std::shared_ptr<Packet const>;

AuxProofMsg const *vote_part(Message const &msg)
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

PacketPtr make_packet(Bytes bytes, std::uint32_t n)
{
  auto p   = std::make_shared<Packet>();
  p->bytes = std::move(bytes);
  try
  {
    p->msg = decode(p->bytes, DecodeLimits{n});
    if (auto const *v = vote_part(*p->msg))
    {
      p->vote_value = v->vote.aux.value;
    }
  }
  catch (MalformedMessage const &)
  {
  }
  return p;
}

struct NodeOutput
{
  ProtocolOutput                                          proto;
  std::vector<std::pair<std::optional<ProcessId>, Bytes>> raw;
};

class Node
{
public:
  explicit Node(ProcessId id)
    : id_{id}
  {}
  virtual ~Node() = default;

  virtual bool honest() const
  {
    return false;
  }
  virtual void           start(Bin proposal, NodeOutput &out)                   = 0;
  virtual void           deliver(ProcessId from, Packet const &p, NodeOutput &out) = 0;
  virtual Process const *process() const
  {
    return nullptr;
  }
  std::uint64_t digest() const
  {
    auto const *p = process();
    return p == nullptr ? 0 : p->digest();
  }
  ProcessId id() const noexcept
  {
    return id_;
  }

private:
  ProcessId id_;
};

/// Runs the protocol faithfully. Crash-faulty processes use this too and
/// are stopped by the engine.
class FaithfulNode : public Node
{
public:
  FaithfulNode(ProcessConfig cfg, crypto::Signer signer, bool honest)
    : Node{signer.id()}
    , process_{cfg, std::move(signer)}
    , honest_{honest}
  {}

  bool honest() const override
  {
    return honest_;
  }
  void start(Bin proposal, NodeOutput &out) override
  {
    out.proto = process_.start(proposal);
  }
  void deliver(ProcessId from, Packet const &p, NodeOutput &out) override
  {
    if (!p.msg)
    {
      out.proto.dropped = true;
      return;
    }
    out.proto = process_.on_message(from, *p.msg);
  }
  Process const *process() const override
  {
    return &process_;
  }

private:
  Process process_;
  bool    honest_;
};

class SilentNode : public Node
{
public:
  using Node::Node;
  void start(Bin, NodeOutput &) override {}
  void deliver(ProcessId, Packet const &, NodeOutput &) override {}
};

/// Emits undecodable bytes and votes with broken signatures, up to a cap.
class GarbageNode : public Node
{
public:
  GarbageNode(ProcessId id, Params params, InstanceTag instance, std::uint64_t seed)
    : Node{id}
    , params_{params}
    , instance_{instance}
    , rng_{seed}
    , budget_{4 * params.n}
  {}

  void start(Bin, NodeOutput &out) override
  {
    emit(out);
    emit(out);
  }
  void deliver(ProcessId, Packet const &, NodeOutput &out) override
  {
    if (rng_() % 4 == 0)
    {
      emit(out);
    }
  }

private:
  void emit(NodeOutput &out)
  {
    if (budget_ == 0)
    {
      return;
    }
    --budget_;
    std::optional<ProcessId> to;
    if (rng_() % 2 == 0)
    {
      to = static_cast<ProcessId>(rng_() % params_.n);
    }
    Bytes bytes;
    if (rng_() % 2 == 0)
    {
      bytes.resize(1 + rng_() % 96);
      for (auto &b : bytes)
      {
        b = static_cast<std::uint8_t>(rng_());
      }
    }
    else
    {
      AuxProofMsg m;
      m.vote.aux = AuxMsg{instance_, 0, rng_() % 2 == 0 ? AuxValue::zero : AuxValue::one};
      m.vote.sig.signer = id();
      for (auto &b : m.vote.sig.mac)
      {
        b = static_cast<std::uint8_t>(rng_());
      }
      m.vote.sig.digest = crypto::hash(signing_bytes(m.vote.aux));
      bytes             = encode(m);
    }
    out.raw.emplace_back(to, std::move(bytes));
  }

  Params              params_;
  InstanceTag         instance_;
  std::mt19937_64     rng_;
  std::uint32_t       budget_;
};

/// Follows the protocol internally but tells some recipients a different
/// vote: half of them (equivocate) or all of them (flip-value).
class TwoFacedNode : public Node
{
public:
  TwoFacedNode(ProcessConfig cfg, crypto::Signer signer, FaultKind kind)
    : Node{signer.id()}
    , process_{cfg, signer}
    , signer_{std::move(signer)}
    , kind_{kind}
  {}

  void start(Bin proposal, NodeOutput &out) override
  {
    out.proto = process_.start(proposal);
    twist(out.proto);
  }
  void deliver(ProcessId from, Packet const &p, NodeOutput &out) override
  {
    if (!p.msg)
    {
      return;
    }
    out.proto = process_.on_message(from, *p.msg);
    twist(out.proto);
  }
  Process const *process() const override
  {
    return &process_;
  }

private:
  std::optional<AuxProofMsg> alternative(AuxProofMsg const &honest) const
  {
    auto const &aux  = honest.vote.aux;
    auto        orig = to_bin(aux.value);
    auto        alt  = orig ? negate(*orig) : Bin::zero;
    AuxMsg      twin{aux.instance, aux.round, to_aux(alt)};

    std::vector<SignedAux> proofs;
    try
    {
      proofs = process_.try_build_proofs(aux.round, twin.value);
    }
    catch (Error const &)
    {
      if (kind_ == FaultKind::flip_value)
      {
        return std::nullopt;
      }
    }
    if (!process_.config().mode.include_proofs)
    {
      proofs.clear();
    }
    return AuxProofMsg{sign_aux(signer_, twin), std::move(proofs)};
  }

  void twist(ProtocolOutput &proto) const
  {
    auto const            n = process_.config().params.n;
    std::vector<Outbound> result;
    for (auto &o : proto.out)
    {
      auto const *vote = vote_part(o.msg);
      if (vote == nullptr || o.to)
      {
        result.push_back(std::move(o));
        continue;
      }
      auto alt = alternative(*vote);
      if (!alt)
      {
        result.push_back(std::move(o));
        continue;
      }
      for (ProcessId j = 0; j < n; ++j)
      {
        bool lie = j != id() && (kind_ == FaultKind::flip_value || j % 2 == 1);
        if (!lie)
        {
          result.push_back(Outbound{j, o.msg});
          continue;
        }
        Message m = o.msg;
        if (auto *c = std::get_if<CombinedMsg>(&m))
        {
          c->aux = *alt;
        }
        else
        {
          m = *alt;
        }
        result.push_back(Outbound{j, std::move(m)});
      }
    }
    proto.out = std::move(result);
  }

  Process        process_;
  crypto::Signer signer_;
  FaultKind      kind_;
};

/// Counts delivered sequence numbers; answers "how many delivered events
/// are younger than seq".
class DeliveredIndex
{
public:
  void add(std::uint64_t seq)
  {
    if (seq >= flags_.size())
    {
      grow(seq + 1);
    }
    flags_[seq] = 1;
    ++total_;
    for (auto i = seq + 1; i <= tree_.size(); i += i & (~i + 1))
    {
      ++tree_[i - 1];
    }
  }

  std::uint64_t younger_than(std::uint64_t seq) const
  {
    std::uint64_t upto = 0;
    for (auto i = std::min<std::uint64_t>(seq + 1, tree_.size()); i > 0; i -= i & (~i + 1))
    {
      upto += tree_[i - 1];
    }
    return total_ - upto;
  }

private:
  void grow(std::uint64_t need)
  {
    std::uint64_t size = std::max<std::uint64_t>(1024, tree_.size());
    while (size < need)
    {
      size *= 2;
    }
    flags_.resize(size, 0);
    tree_.assign(size, 0);
    for (std::uint64_t i = 1; i <= size; ++i)
    {
      tree_[i - 1] += flags_[i - 1];
      auto parent = i + (i & (~i + 1));
      if (parent <= size)
      {
        tree_[parent - 1] += tree_[i - 1];
      }
    }
  }

  std::vector<std::uint8_t>  flags_;
  std::vector<std::uint32_t> tree_;
  std::uint64_t              total_ = 0;
};

class Engine
{
public:
  Engine(SimConfig const &config, Trace const *script)
    : cfg_{config}
    , script_{script}
    , n_{config.params.n}
    , rng_{derive_seed(config.seed, kAdversaryStream)}
  {
    cfg_.validate();
    provider_ = crypto::make_provider(cfg_.provider, cfg_.params, provider_seed(cfg_.seed));
    instance_ = instance_tag(cfg_.seed);

    ProcessConfig pc;
    pc.params      = cfg_.params;
    pc.mode        = cfg_.mode;
    pc.instance    = instance_;
    pc.coin_source = CoinSource{cfg_.coin_override};
    pc.horizon     = cfg_.horizon;

    crashed_.assign(n_, false);
    for (ProcessId i = 0; i < n_; ++i)
    {
      crypto::Signer signer(provider_, i);
      auto           fault = std::find_if(cfg_.faults.begin(), cfg_.faults.end(),
                                          [&](FaultSpec const &f) { return f.process == i; });
      if (fault == cfg_.faults.end())
      {
        nodes_.push_back(std::make_unique<FaithfulNode>(pc, signer, true));
        continue;
      }
      switch (fault->kind)
      {
      case FaultKind::crash:
        nodes_.push_back(std::make_unique<FaithfulNode>(pc, signer, false));
        break;
      case FaultKind::silent:
        nodes_.push_back(std::make_unique<SilentNode>(i));
        break;
      case FaultKind::garbage:
        nodes_.push_back(std::make_unique<GarbageNode>(i, cfg_.params, instance_,
                                                       derive_seed(cfg_.seed, kByzantineStream, i)));
        break;
      case FaultKind::equivocate:
      case FaultKind::flip_value:
        nodes_.push_back(std::make_unique<TwoFacedNode>(pc, signer, fault->kind));
        break;
      }
    }
    if (cfg_.record_trace || script_ != nullptr)
    {
      result_.trace.header = cfg_.to_json();
    }
  }

  InstanceResult run()
  {
    apply_crashes();
    for (ProcessId i = 0; i < n_; ++i)
    {
      emit(Record{0, RecordKind::start, i, Bytes{static_cast<std::uint8_t>(cfg_.proposals[i])},
                  nodes_[i]->digest()});
      if (crashed_[i])
      {
        continue;
      }
      NodeOutput out;
      nodes_[i]->start(cfg_.proposals[i], out);
      dispatch(i, out);
    }
    drain_local();

    for (;;)
    {
      apply_crashes();
      if (all_honest_halted())
      {
        break;
      }
      if (pool_.empty())
      {
        result_.status       = RunStatus::stalled;
        result_.stall_reason = "no message in flight";
        break;
      }
      if (step_ >= cfg_.step_cap)
      {
        result_.status       = RunStatus::stalled;
        result_.stall_reason = "step cap reached";
        break;
      }
      auto ev = take(choose());
      ++step_;
      auto overtaken            = delivered_.younger_than(ev.seq);
      result_.max_postponement  = std::max(result_.max_postponement, overtaken);
      delivered_.add(ev.seq);
      deliver(ev);
      drain_local();
    }

    if (script_ != nullptr && cursor_ != script_->records.size())
    {
      throw ReplayDivergence("replay ended at record " + std::to_string(cursor_) + " of " +
                             std::to_string(script_->records.size()));
    }
    finish();
    return std::move(result_);
  }

private:
  struct Event
  {
    std::uint64_t seq      = 0;
    ProcessId     from     = 0;
    ProcessId     to       = 0;
    std::uint64_t enqueued = 0;
    PacketPtr     packet;
  };

  void emit(Record r)
  {
    if (script_ != nullptr)
    {
      if (cursor_ >= script_->records.size() || script_->records[cursor_] != r)
      {
        throw ReplayDivergence("record " + std::to_string(cursor_) + " (" + to_string(r.kind) +
                               " at step " + std::to_string(r.step) + ") differs from the trace");
      }
      ++cursor_;
    }
    if (cfg_.record_trace || script_ != nullptr)
    {
      result_.trace.records.push_back(std::move(r));
    }
  }

  bool all_honest_halted() const
  {
    for (auto const &node : nodes_)
    {
      if (node->honest() && !node->process()->halted())
      {
        return false;
      }
    }
    return true;
  }

  void apply_crashes()
  {
    for (auto const &f : cfg_.faults)
    {
      if (f.kind != FaultKind::crash || crashed_[f.process] || step_ < f.crash_step)
      {
        continue;
      }
      crashed_[f.process] = true;
      emit(Record{step_, RecordKind::crash, f.process, {}, nodes_[f.process]->digest()});
      for (std::size_t i = 0; i < pool_.size();)
      {
        if (pool_[i].to == f.process)
        {
          take(i);
        }
        else
        {
          ++i;
        }
      }
    }
  }

  void enqueue(Event ev)
  {
    if (crashed_[ev.to])
    {
      return;
    }
    if (ev.to == ev.from)
    {
      local_.push_back(std::move(ev));
      return;
    }
    index_[ev.seq] = pool_.size();
    oldest_.push(ev.seq);
    pool_.push_back(std::move(ev));
  }

  Event take(std::size_t i)
  {
    Event ev = std::move(pool_[i]);
    index_.erase(ev.seq);
    if (i + 1 != pool_.size())
    {
      pool_[i]              = std::move(pool_.back());
      index_[pool_[i].seq] = i;
    }
    pool_.pop_back();
    return ev;
  }

  std::size_t oldest_index()
  {
    while (!index_.contains(oldest_.top()))
    {
      oldest_.pop();
    }
    return index_.at(oldest_.top());
  }

  std::size_t choose()
  {
    if (script_ != nullptr)
    {
      if (cursor_ >= script_->records.size() || script_->records[cursor_].kind != RecordKind::deliver)
      {
        throw ReplayDivergence("trace has no delivery where the run continues (record " +
                               std::to_string(cursor_) + ")");
      }
      auto env = decode_envelope(script_->records[cursor_].payload);
      auto it  = index_.find(env.seq);
      if (it == index_.end())
      {
        throw ReplayDivergence("recorded delivery " + std::to_string(env.seq) + " is not in flight");
      }
      return it->second;
    }

    auto oldest = oldest_index();
    if (delivered_.younger_than(pool_[oldest].seq) >= cfg_.effective_fairness())
    {
      return oldest;
    }
    if (cfg_.delayed)
    {
      return choose_delayed(*cfg_.delayed);
    }
    switch (cfg_.adversary)
    {
    case AdversaryKind::fifo:
      return oldest;
    case AdversaryKind::random:
      return rng_() % pool_.size();
    case AdversaryKind::heuristic:
      return choose_heuristic();
    }
    return oldest;
  }

  /// Majority binary estimate among honest processes; votes carrying it are
  /// held back.
  AuxValue majority_estimate() const
  {
    std::uint32_t ones = 0, zeros = 0;
    for (auto const &node : nodes_)
    {
      if (!node->honest())
      {
        continue;
      }
      auto est = node->process()->estimate();
      if (est == AuxValue::one)
      {
        ++ones;
      }
      else if (est == AuxValue::zero)
      {
        ++zeros;
      }
    }
    return ones > zeros ? AuxValue::one : AuxValue::zero;
  }

  std::size_t choose_heuristic()
  {
    auto const  majority = majority_estimate();
    auto const  samples  = std::min<std::size_t>(8, pool_.size());
    std::size_t first    = 0;
    for (std::size_t k = 0; k < samples; ++k)
    {
      auto i = static_cast<std::size_t>(rng_() % pool_.size());
      if (k == 0)
      {
        first = i;
      }
      if (pool_[i].packet->vote_value != majority)
      {
        return i;
      }
    }
    return first;
  }

  std::size_t choose_delayed(ProcessId slow)
  {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pool_.size(); ++i)
    {
      if (pool_[i].to != slow && (!best || pool_[i].seq < pool_[*best].seq))
      {
        best = i;
      }
    }
    if (best)
    {
      if (cfg_.adversary == AdversaryKind::fifo)
      {
        return *best;
      }
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < pool_.size(); ++i)
      {
        if (pool_[i].to != slow)
        {
          others.push_back(i);
        }
      }
      return others[rng_() % others.size()];
    }
    for (std::size_t i = 0; i < pool_.size(); ++i)
    {
      bool vote = pool_[i].packet->vote_value.has_value();
      if (!vote && (!best || pool_[i].seq < pool_[*best].seq))
      {
        best = i;
      }
    }
    return best ? *best : oldest_index();
  }

  void deliver(Event const &ev)
  {
    auto      &node = *nodes_[ev.to];
    NodeOutput out;
    if (!ev.packet->msg && node.honest())
    {
      ++result_.malformed_dropped;
    }
    node.deliver(ev.from, *ev.packet, out);
    emit(Record{step_, RecordKind::deliver, ev.to, encode_envelope(Envelope{ev.seq, ev.from, ev.packet->bytes}),
                node.digest()});
    if (node.honest() && out.proto.dropped)
    {
      Bytes seq(8);
      for (int i = 0; i < 8; ++i)
      {
        seq[i] = static_cast<std::uint8_t>(ev.seq >> (8 * i));
      }
      emit(Record{step_, RecordKind::drop, ev.to, std::move(seq), node.digest()});
    }
    dispatch(ev.to, out);
  }

  void drain_local()
  {
    while (!local_.empty())
    {
      auto ev = std::move(local_.front());
      local_.pop_front();
      if (crashed_[ev.to])
      {
        continue;
      }
      deliver(ev);
    }
  }

  void dispatch(ProcessId from, NodeOutput &out)
  {
    auto &node = *nodes_[from];
    if (node.honest())
    {
      auto const digest = node.digest();
      for (auto const &a : out.proto.accepted)
      {
        Bytes payload;
        encode_signed_aux(payload, a.vote);
        payload.push_back(static_cast<std::uint8_t>(a.resolved));
        emit(Record{step_, RecordKind::accept, from, std::move(payload), digest});
      }
      for (auto const &[round, bit] : out.proto.coins)
      {
        emit(Record{step_, RecordKind::coin, from, round_bit(round, bit, std::nullopt), digest});
      }
      if (out.proto.decided)
      {
        emit(Record{step_, RecordKind::decide, from,
                    round_bit(out.proto.decided->round, out.proto.decided->value, out.proto.decided->adopted),
                    digest});
      }
      if (out.proto.stopped)
      {
        emit(Record{step_, RecordKind::stop, from, {}, digest});
      }
    }
    for (auto &o : out.proto.out)
    {
      if (node.honest() && !o.to)
      {
        count_broadcast(from, o.msg);
      }
      send(from, o.to, make_packet(encode(o.msg), n_));
    }
    for (auto &[to, bytes] : out.raw)
    {
      send(from, to, make_packet(std::move(bytes), n_));
    }
  }

  static Bytes round_bit(Round round, Bin bit, std::optional<bool> adopted)
  {
    Bytes out;
    for (int i = 0; i < 4; ++i)
    {
      out.push_back(static_cast<std::uint8_t>(round >> (8 * i)));
    }
    out.push_back(static_cast<std::uint8_t>(bit));
    if (adopted)
    {
      out.push_back(*adopted ? 1 : 0);
    }
    return out;
  }

  void count_broadcast(ProcessId from, Message const &msg)
  {
    std::optional<Round> round;
    if (auto const *v = vote_part(msg))
    {
      round = v->vote.aux.round;
    }
    else if (auto const *c = std::get_if<CoinShare>(&msg))
    {
      round = c->round;
    }
    if (round)
    {
      ++result_.broadcasts[{from, *round}];
    }
  }

  void send(ProcessId from, std::optional<ProcessId> to, PacketPtr packet)
  {
    auto const first = next_seq_;
    emit(Record{step_, RecordKind::send, from,
                encode_envelope(Envelope{first, to ? *to : Envelope::kBroadcast, packet->bytes}),
                nodes_[from]->digest()});
    auto copy = [&](ProcessId target) {
      auto seq = next_seq_++;
      if (target != from)
      {
        ++result_.messages_sent;
        result_.bytes_sent += packet->bytes.size();
        if (packet->msg)
        {
          ++result_.sent_by_kind[static_cast<std::size_t>(kind_of(*packet->msg))];
        }
        else
        {
          ++result_.sent_by_kind[0];
        }
      }
      enqueue(Event{seq, from, target, step_, packet});
    };
    if (to)
    {
      if (*to < n_)
      {
        copy(*to);
      }
      return;
    }
    for (ProcessId j = 0; j < n_; ++j)
    {
      copy(j);
    }
  }

  void finish()
  {
    result_.steps = step_;
    for (ProcessId i = 0; i < n_; ++i)
    {
      ProcessResult r;
      r.id       = i;
      r.honest   = nodes_[i]->honest();
      r.crashed  = crashed_[i];
      r.proposal = cfg_.proposals[i];
      if (auto const *p = nodes_[i]->process())
      {
        r.decision         = p->decision();
        r.participation    = p->participation_round();
        r.phase            = p->phase();
        r.stats            = p->stats();
        r.pending_deferred = p->pending_deferred();
        r.pending_requests = p->pending_requests();
        r.digest           = p->digest();
      }
      result_.processes.push_back(r);
    }
  }

  SimConfig                                   cfg_;
  Trace const                                *script_;
  std::size_t                                 cursor_ = 0;
  std::uint32_t                               n_;
  std::mt19937_64                             rng_;
  std::shared_ptr<crypto::Provider const>     provider_;
  InstanceTag                                 instance_{};
  std::vector<std::unique_ptr<Node>>          nodes_;
  std::vector<bool>                           crashed_;
  std::vector<Event>                          pool_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> oldest_;
  std::deque<Event>                           local_;
  DeliveredIndex                              delivered_;
  std::uint64_t                               step_     = 0;
  std::uint64_t                               next_seq_ = 0;
  InstanceResult                              result_;
};

}  // namespace

std::string to_string(AdversaryKind kind)
{
  switch (kind)
  {
  case AdversaryKind::fifo:
    return "fifo";
  case AdversaryKind::random:
    return "random";
  case AdversaryKind::heuristic:
    return "heuristic";
  }
  return "?";
}

AdversaryKind parse_adversary(std::string_view text)
{
  for (auto k : {AdversaryKind::fifo, AdversaryKind::random, AdversaryKind::heuristic})
  {
    if (to_string(k) == text)
    {
      return k;
    }
  }
  throw ConfigError("unknown adversary: " + std::string(text));
}

std::string to_string(FaultKind kind)
{
  switch (kind)
  {
  case FaultKind::crash:
    return "crash";
  case FaultKind::silent:
    return "silent";
  case FaultKind::equivocate:
    return "equivocate";
  case FaultKind::garbage:
    return "garbage";
  case FaultKind::flip_value:
    return "flip-value";
  }
  return "?";
}

FaultKind parse_fault_kind(std::string_view text)
{
  for (auto k : {FaultKind::crash, FaultKind::silent, FaultKind::equivocate, FaultKind::garbage,
                 FaultKind::flip_value})
  {
    if (to_string(k) == text)
    {
      return k;
    }
  }
  throw ConfigError("unknown fault kind: " + std::string(text));
}

std::vector<FaultSpec> parse_faults(std::string_view text)
{
  std::vector<FaultSpec> out;
  while (!text.empty())
  {
    auto comma = text.find(',');
    auto item  = text.substr(0, comma);
    text       = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty())
    {
      continue;
    }
    auto colon = item.find(':');
    if (colon == std::string_view::npos)
    {
      throw ConfigError("fault needs kind:pid, got " + std::string(item));
    }
    FaultSpec f;
    f.kind    = parse_fault_kind(item.substr(0, colon));
    auto rest = item.substr(colon + 1);
    auto at   = rest.find('@');
    try
    {
      f.process = static_cast<ProcessId>(std::stoul(std::string(rest.substr(0, at))));
      if (at != std::string_view::npos)
      {
        if (f.kind != FaultKind::crash)
        {
          throw ConfigError("only crash faults take a step");
        }
        f.crash_step = std::stoull(std::string(rest.substr(at + 1)));
      }
    }
    catch (std::logic_error const &)
    {
      throw ConfigError("bad fault entry " + std::string(item));
    }
    out.push_back(f);
  }
  return out;
}

std::string format_faults(std::vector<FaultSpec> const &faults)
{
  std::string out;
  for (auto const &f : faults)
  {
    if (!out.empty())
    {
      out += ',';
    }
    out += to_string(f.kind) + ":" + std::to_string(f.process);
    if (f.kind == FaultKind::crash)
    {
      out += "@" + std::to_string(f.crash_step);
    }
  }
  return out;
}

void SimConfig::validate() const
{
  (void)Params::make(params.n, params.t);
  if (proposals.size() != params.n)
  {
    throw ConfigError("need one proposal per process");
  }
  if (faults.size() > params.t)
  {
    throw ConfigError("more faulty processes than t");
  }
  std::vector<bool> seen(params.n, false);
  for (auto const &f : faults)
  {
    if (f.process >= params.n || seen[f.process])
    {
      throw ConfigError("fault process out of range or repeated");
    }
    seen[f.process] = true;
  }
  if (delayed && (*delayed >= params.n || faulty(*delayed)))
  {
    throw ConfigError("delayed process must be an honest process index");
  }
  if (step_cap == 0)
  {
    throw ConfigError("step cap must be positive");
  }
  if (horizon == 0)
  {
    throw ConfigError("horizon must be positive");
  }
}

bool SimConfig::faulty(ProcessId p) const
{
  return std::any_of(faults.begin(), faults.end(), [&](FaultSpec const &f) { return f.process == p; });
}

nlohmann::ordered_json SimConfig::to_json() const
{
  nlohmann::ordered_json j;
  j["n"]                = params.n;
  j["t"]                = params.t;
  j["combine_messages"] = mode.combine_messages;
  j["include_proofs"]   = mode.include_proofs;
  j["lazy_stop"]        = mode.lazy_stop;
  std::string props;
  for (auto p : proposals)
  {
    props += p == Bin::one ? '1' : '0';
  }
  j["proposals"]      = props;
  j["adversary"]      = to_string(adversary);
  j["fairness_bound"] = fairness_bound;
  j["faults"]         = format_faults(faults);
  j["seed"]           = seed;
  j["provider"]       = provider;
  j["coin_override"]  = coin_override ? nlohmann::ordered_json(*coin_override) : nlohmann::ordered_json();
  j["step_cap"]       = step_cap;
  j["delayed"]        = delayed ? nlohmann::ordered_json(*delayed) : nlohmann::ordered_json();
  j["horizon"]        = horizon;
  j["record_trace"]   = record_trace;
  return j;
}

SimConfig SimConfig::from_json(nlohmann::json const &j)
{
  try
  {
    SimConfig c;
    c.params                = Params::make(j.at("n").get<std::uint32_t>(), j.at("t").get<std::uint32_t>());
    c.mode.combine_messages = j.at("combine_messages").get<bool>();
    c.mode.include_proofs   = j.at("include_proofs").get<bool>();
    c.mode.lazy_stop        = j.at("lazy_stop").get<bool>();
    for (char ch : j.at("proposals").get<std::string>())
    {
      if (ch != '0' && ch != '1')
      {
        throw ConfigError("proposals must be a string of 0 and 1");
      }
      c.proposals.push_back(ch == '1' ? Bin::one : Bin::zero);
    }
    c.adversary      = parse_adversary(j.at("adversary").get<std::string>());
    c.fairness_bound = j.at("fairness_bound").get<std::uint64_t>();
    c.faults         = parse_faults(j.at("faults").get<std::string>());
    c.seed           = j.at("seed").get<std::uint64_t>();
    c.provider       = j.at("provider").get<std::string>();
    if (!j.at("coin_override").is_null())
    {
      c.coin_override = j.at("coin_override").get<std::uint64_t>();
    }
    c.step_cap = j.at("step_cap").get<std::uint64_t>();
    if (!j.at("delayed").is_null())
    {
      c.delayed = j.at("delayed").get<ProcessId>();
    }
    c.horizon      = j.at("horizon").get<Round>();
    c.record_trace = j.at("record_trace").get<bool>();
    return c;
  }
  catch (nlohmann::json::exception const &e)
  {
    throw ConfigError(std::string("bad simulation config: ") + e.what());
  }
}

InstanceTag instance_tag(std::uint64_t seed)
{
  Bytes label{'b', 'b', 'c', '/', 'i', 'n', 's', 't'};
  for (int i = 0; i < 8; ++i)
  {
    label.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
  }
  return crypto::hash(label);
}

std::uint64_t provider_seed(std::uint64_t seed)
{
  return derive_seed(seed, 0x6b657973);
}

bool InstanceResult::same_outcome(InstanceResult const &o) const
{
  return status == o.status && stall_reason == o.stall_reason && steps == o.steps &&
         processes == o.processes && messages_sent == o.messages_sent && bytes_sent == o.bytes_sent &&
         sent_by_kind == o.sent_by_kind && broadcasts == o.broadcasts &&
         malformed_dropped == o.malformed_dropped && max_postponement == o.max_postponement;
}

InstanceResult run_instance(SimConfig const &config)
{
  return Engine(config, nullptr).run();
}

InstanceResult replay(Trace const &trace)
{
  auto config = SimConfig::from_json(trace.header);
  return Engine(config, &trace).run();
}

InstanceResult replay(Trace const &trace, SimConfig const &expected)
{
  auto config = SimConfig::from_json(trace.header);
  if (!(config == expected))
  {
    throw ConfigError("trace was recorded with a different configuration");
  }
  return Engine(config, &trace).run();
}

}  // namespace bbc::sim
