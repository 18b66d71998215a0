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

#include <optional>
#include <vector>

namespace bbc {

/// Revealed coin bits by round (rounds start at 1). Append-only: a round is
/// written once and rewriting it with a different bit throws.
class CoinMap
{
public:
  void set(Round round, Bin bit);

  std::optional<Bin> get(Round round) const;

  bool contains(Round round) const
  {
    return get(round).has_value();
  }

  /// Rounds in [first, last] with no revealed bit.
  std::vector<Round> missing(Round first, Round last) const;

  std::size_t revealed() const noexcept
  {
    return count_;
  }

  /// Highest round with a revealed bit, 0 if none.
  Round highest() const noexcept;

  bool operator==(CoinMap const &) const = default;

private:
  std::vector<std::int8_t> bits_;  // index = round, -1 = unknown
  std::size_t              count_ = 0;
};

}  // namespace bbc
