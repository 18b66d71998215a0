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

#include "bbc/trace.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bbc::sim {
namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "start", "send", "deliver", "accept", "coin", "decide", "drop", "crash", "stop"};

template <typename T>
T parse_number(std::string_view text, int base, char const *what)
{
  T     value{};
  auto *end         = text.data() + text.size();
  auto [ptr, error] = std::from_chars(text.data(), end, value, base);
  if (error != std::errc{} || ptr != end)
  {
    throw MalformedMessage(std::string("bad ") + what + " field in trace: " + std::string(text));
  }
  return value;
}

}  // namespace

std::string to_string(RecordKind kind)
{
  return std::string(kKindNames.at(static_cast<std::size_t>(kind)));
}

RecordKind parse_record_kind(std::string_view text)
{
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
  {
    if (kKindNames[i] == text)
    {
      return static_cast<RecordKind>(i);
    }
  }
  throw MalformedMessage("unknown trace record kind: " + std::string(text));
}

Bytes encode_envelope(Envelope const &env)
{
  Bytes out;
  out.reserve(12 + env.bytes.size());
  for (int i = 0; i < 8; ++i)
  {
    out.push_back(static_cast<std::uint8_t>(env.seq >> (8 * i)));
  }
  for (int i = 0; i < 4; ++i)
  {
    out.push_back(static_cast<std::uint8_t>(env.peer >> (8 * i)));
  }
  out.insert(out.end(), env.bytes.begin(), env.bytes.end());
  return out;
}

Envelope decode_envelope(ByteView payload)
{
  if (payload.size() < 12)
  {
    throw MalformedMessage("envelope too short");
  }
  Envelope env;
  for (int i = 0; i < 8; ++i)
  {
    env.seq |= static_cast<std::uint64_t>(payload[i]) << (8 * i);
  }
  for (int i = 0; i < 4; ++i)
  {
    env.peer |= static_cast<ProcessId>(payload[8 + i]) << (8 * i);
  }
  env.bytes.assign(payload.begin() + 12, payload.end());
  return env;
}

void write_trace(std::ostream &out, Trace const &trace)
{
  out << trace.header.dump() << '\n';
  for (auto const &r : trace.records)
  {
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.digest));
    out << r.step << '\t' << to_string(r.kind) << '\t' << r.process << '\t' << to_hex(r.payload) << '\t'
        << digest << '\n';
  }
}

Trace read_trace(std::istream &in)
{
  Trace       trace;
  std::string line;
  if (!std::getline(in, line))
  {
    throw MalformedMessage("trace has no header");
  }
  try
  {
    trace.header = nlohmann::json::parse(line);
  }
  catch (nlohmann::json::exception const &e)
  {
    throw MalformedMessage(std::string("trace header is not JSON: ") + e.what());
  }
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::array<std::string_view, 5> fields;
    std::string_view                rest = line;
    for (std::size_t i = 0; i < fields.size(); ++i)
    {
      auto tab = rest.find('\t');
      if ((tab == std::string_view::npos) != (i + 1 == fields.size()))
      {
        throw MalformedMessage("trace line must have 5 fields");
      }
      fields[i] = rest.substr(0, tab);
      rest      = tab == std::string_view::npos ? std::string_view{} : rest.substr(tab + 1);
    }
    Record r;
    r.step    = parse_number<std::uint64_t>(fields[0], 10, "step");
    r.kind    = parse_record_kind(fields[1]);
    r.process = parse_number<ProcessId>(fields[2], 10, "process");
    r.payload = from_hex(fields[3]);
    r.digest  = parse_number<std::uint64_t>(fields[4], 16, "digest");
    trace.records.push_back(std::move(r));
  }
  return trace;
}

void save_trace(std::string const &path, Trace const &trace)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot write " + path);
  }
  write_trace(out, trace);
  if (!out)
  {
    throw Error("write failed: " + path);
  }
}

Trace load_trace(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error("cannot read " + path);
  }
  return read_trace(in);
}

}  // namespace bbc::sim
