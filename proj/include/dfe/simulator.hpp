// Copyright 2026 The DFE Offload Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Functional overlay simulation and the tagged wire protocol.

#pragma once

#include "dfe/affine.hpp"
#include "dfe/arrays.hpp"
#include "dfe/dfg.hpp"
#include "dfe/overlay.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfe {

/// One wire word: [tag:32][value:32][zero:64], little-endian fields.
struct TaggedFrame {
  static constexpr std::size_t kBytes = 16;
  static constexpr std::size_t kPayloadBytes = 4;

  std::uint32_t tag = 0;
  std::int32_t value = 0;

  std::array<std::uint8_t, kBytes> encode() const;
  /// Throws Error(Format) if the padding is not zero.
  static TaggedFrame decode(std::span<const std::uint8_t, kBytes> bytes);

  friend bool operator==(const TaggedFrame &, const TaggedFrame &) = default;
};

/// Tags at or above this value address constant preload slots.
inline constexpr std::uint32_t kConstTagBase = 0x80000000u;

std::vector<std::uint8_t> encode_frames(std::span<const TaggedFrame> frames);
std::vector<TaggedFrame> decode_frames(std::span<const std::uint8_t> bytes);

struct TaggedStream {
  std::uint32_t tag = 0;
  std::vector<std::int32_t> values;

  friend bool operator==(const TaggedStream &, const TaggedStream &) = default;
};

/// Position-major interleaving: frame k of every stream before frame k+1.
std::vector<TaggedFrame> interleave(std::span<const TaggedStream> streams);
/// Inverse of interleave for any interleaving order: the n-th frame with a
/// tag is position n of that tag's stream.
std::vector<TaggedStream> demultiplex(std::span<const TaggedFrame> frames);

struct StreamSet {
  std::vector<TaggedStream> inputs; // one per Input node, tag = node id
  std::vector<TaggedFrame> constants; // preloaded once, ahead of data
  std::size_t length = 0;             // stream positions
};

/// Trip counts of the unrolled steady state; the innermost one already
/// divided by the unroll factor.
std::vector<std::int64_t> steady_trip_counts(const DataFlowGraph &g, const Env &params);
/// Innermost iterations left to the software epilogue.
std::int64_t remainder_iterations(const DataFlowGraph &g, const Env &params);

/// Gathers each Input node's values over the steady-state domain.
/// Scalar bindings read `params`. Throws Error(OutOfBounds).
StreamSet build_streams(const DataFlowGraph &g, const ArrayStore &arrays,
                        const Env &params);

struct RunReport {
  std::map<std::uint32_t, std::vector<std::int32_t>> outputs; // by output tag
  std::uint64_t frames_in = 0;
  std::uint64_t frames_out = 0;
  std::uint64_t cycles = 0;
  std::uint64_t bytes_on_wire = 0;
  int route_depth = 0;
};

/// Token-based evaluation of a configured overlay. Streams are position
/// indexed. Throws Error(InvalidConfig / UnconfiguredTag / LengthMismatch).
/// `length` is needed only when there are no input streams (default 0).
RunReport run(const OverlayConfig &cfg, std::span<const TaggedStream> inputs,
              std::optional<std::size_t> length = std::nullopt);
/// Same, on a wire capture.
RunReport run_frames(const OverlayConfig &cfg, std::span<const TaggedFrame> frames);
/// Output frames of a report, position-major.
std::vector<TaggedFrame> output_frames(const RunReport &report);

/// Scatters each output stream through its node's access function and lane.
/// Throws Error(OutOfBounds) and Error(LengthMismatch).
void write_back(const DataFlowGraph &g, const RunReport &report,
                ArrayStore &arrays, const Env &params);

} // namespace dfe
