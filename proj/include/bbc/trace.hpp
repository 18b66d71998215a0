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

#include "bbc/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace bbc::sim {

enum class RecordKind : std::uint8_t
{
  start,
  send,
  deliver,
  accept,
  coin,
  decide,
  drop,
  crash,
  stop,
};

std::string to_string(RecordKind kind);
RecordKind  parse_record_kind(std::string_view text);

/// One trace line. `digest` is the acting process's state digest after the
/// event (0 for processes without protocol state).
struct Record
{
  std::uint64_t step    = 0;
  RecordKind    kind    = RecordKind::start;
  ProcessId     process = 0;
  Bytes         payload;
  std::uint64_t digest = 0;

  bool operator==(Record const &) const = default;
};

/// Header (the run configuration) plus records in execution order.
struct Trace
{
  nlohmann::json      header;
  std::vector<Record> records;

  bool operator==(Trace const &) const = default;
};

/// Replay produced a record different from the stored one.
class ReplayDivergence : public Error
{
public:
  using Error::Error;
};

/// Payload of send/deliver/drop records. For sends `peer` is the target
/// (kBroadcast for broadcasts, whose copies take consecutive sequence
/// numbers in process order); for deliveries it is the sender.
struct Envelope
{
  static constexpr ProcessId kBroadcast = 0xffffffffu;

  std::uint64_t seq  = 0;
  ProcessId     peer = 0;
  Bytes         bytes;

  bool operator==(Envelope const &) const = default;
};

Bytes    encode_envelope(Envelope const &env);
Envelope decode_envelope(ByteView payload);

/// Text format: the header as one JSON line, then one
/// `step<TAB>kind<TAB>process<TAB>hex payload<TAB>hex digest` line per record.
void  write_trace(std::ostream &out, Trace const &trace);
Trace read_trace(std::istream &in);

void  save_trace(std::string const &path, Trace const &trace);
Trace load_trace(std::string const &path);

}  // namespace bbc::sim
