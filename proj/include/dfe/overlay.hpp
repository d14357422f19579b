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

// The parametric R x C overlay. Each cell has four directional inputs and
// outputs (N, E, S, W). A cell's E output drives its east neighbour's W
// input, N drives the northern neighbour's S input, and so on; row 0 is the
// northern edge. Outward-facing sides of border cells are the stream I/O
// interfaces.

#pragma once

#include "dfe/dfg.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dfe {

enum class Dir : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr Dir kAllDirs[] = {Dir::N, Dir::E, Dir::S, Dir::W};

constexpr Dir opposite(Dir d) {
  return static_cast<Dir>((static_cast<int>(d) + 2) % 4);
}
const char *dir_name(Dir d);

struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell &, const Cell &) = default;
  friend auto operator<=>(const Cell &, const Cell &) = default;
};

struct OverlayShape {
  int rows = 1;
  int cols = 1;

  int cell_count() const { return rows * cols; }
  /// Stream inputs (and, separately, outputs): one per outward cell side.
  int io_capacity() const { return 2 * (rows + cols); }
  bool contains(Cell c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols;
  }
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_at(std::size_t i) const {
    return Cell{static_cast<int>(i / static_cast<std::size_t>(cols)),
                static_cast<int>(i % static_cast<std::size_t>(cols))};
  }
  /// Neighbour on side `d`, nullopt past the border.
  std::optional<Cell> neighbor(Cell c, Dir d) const;
  bool on_border(Cell c, Dir d) const { return !neighbor(c, d).has_value(); }

  friend bool operator==(const OverlayShape &, const OverlayShape &) = default;
};

/// Which of the four cell inputs a selector reads.
enum class InSel : std::uint8_t { N = 0, E = 1, S = 2, W = 3, Unconnected = 0xFF };

constexpr InSel in_sel(Dir d) { return static_cast<InSel>(d); }
constexpr Dir sel_dir(InSel s) { return static_cast<Dir>(s); }

/// Source of a cell output.
enum class OutSel : std::uint8_t {
  InN = 0, InE = 1, InS = 2, InW = 3, Fu = 4, Disabled = 0xFF,
};

constexpr OutSel out_from_input(Dir d) { return static_cast<OutSel>(d); }
constexpr bool out_is_input(OutSel s) { return static_cast<std::uint8_t>(s) < 4; }

enum class Pin : std::uint8_t { In1 = 0, In2 = 1, Sel = 2 };

inline constexpr Pin kAllPins[] = {Pin::In1, Pin::In2, Pin::Sel};
const char *pin_name(Pin p);

/// DFG consumer port -> FU pin (MUX: 0 = sel, 1 = a, 2 = b).
Pin pin_for_port(OpCode code, std::uint8_t port);
/// FU pins an op uses, in DFG port order.
std::vector<Pin> pins_for(OpCode code);

struct ConstMask {
  Pin pin = Pin::In1;
  std::int32_t value = 0;

  friend bool operator==(const ConstMask &, const ConstMask &) = default;
};

struct CellConfig {
  std::optional<OpCode> fu_op; // nullopt = Unused
  std::array<InSel, 3> pin_sel{InSel::Unconnected, InSel::Unconnected,
                               InSel::Unconnected}; // indexed by Pin
  std::optional<ConstMask> mask;
  std::array<OutSel, 4> out_sel{OutSel::Disabled, OutSel::Disabled,
                                OutSel::Disabled, OutSel::Disabled}; // by Dir

  InSel &sel(Pin p) { return pin_sel[static_cast<int>(p)]; }
  InSel sel(Pin p) const { return pin_sel[static_cast<int>(p)]; }
  OutSel &out(Dir d) { return out_sel[static_cast<int>(d)]; }
  OutSel out(Dir d) const { return out_sel[static_cast<int>(d)]; }
  bool is_unused() const;

  friend bool operator==(const CellConfig &, const CellConfig &) = default;
};

enum class IoDir : std::uint8_t { In = 0, Out = 1 };

/// A border stream interface: the `side` face of border cell `cell`.
struct BorderPort {
  Cell cell;
  Dir side = Dir::N;

  friend bool operator==(const BorderPort &, const BorderPort &) = default;
  friend auto operator<=>(const BorderPort &, const BorderPort &) = default;
};

/// Index of a border port along its side (column for N/S, row for E/W).
int border_index(const BorderPort &p);
BorderPort border_port(const OverlayShape &shape, Dir side, int index);
/// All 2(R+C) outward faces, ordered by side N, E, S, W then index.
std::vector<BorderPort> border_ports(const OverlayShape &shape);

struct IoEntry {
  IoDir dir = IoDir::In;
  BorderPort port;
  std::uint32_t tag = 0;

  friend bool operator==(const IoEntry &, const IoEntry &) = default;
  friend auto operator<=>(const IoEntry &, const IoEntry &) = default;
};

/// The overlay "bitstream".
class OverlayConfig {
public:
  OverlayConfig() = default;
  explicit OverlayConfig(OverlayShape shape);

  const OverlayShape &shape() const { return shape_; }
  CellConfig &cell(Cell c) { return cells_.at(shape_.index(c)); }
  const CellConfig &cell(Cell c) const { return cells_.at(shape_.index(c)); }
  const std::vector<CellConfig> &cells() const { return cells_; }

  const std::vector<IoEntry> &io_map() const { return io_map_; }
  /// Keeps io_map sorted; replaces an entry on the same (dir, port).
  void set_io(IoDir dir, BorderPort port, std::uint32_t tag);
  void clear_io(IoDir dir, BorderPort port);
  std::optional<std::uint32_t> io_tag(IoDir dir, BorderPort port) const;
  std::optional<BorderPort> find_tag(IoDir dir, std::uint32_t tag) const;

  friend bool operator==(const OverlayConfig &, const OverlayConfig &) = default;

private:
  OverlayShape shape_;
  std::vector<CellConfig> cells_;
  std::vector<IoEntry> io_map_;
};

/// All cells Unused, empty io_map. Throws Error(InvalidArgument) unless
/// rows, cols >= 1.
OverlayConfig new_overlay(int rows, int cols);

struct ConfigViolation {
  Cell cell;
  std::string port; // "out.E", "in1", "io.in.W3", ...
  std::string message;
};

std::vector<ConfigViolation> validate_config(const OverlayConfig &cfg);

struct BorderOrigin {
  BorderPort port;
  friend bool operator==(const BorderOrigin &, const BorderOrigin &) = default;
};
struct FuOrigin {
  Cell cell;
  friend bool operator==(const FuOrigin &, const FuOrigin &) = default;
};
using Origin = std::variant<BorderOrigin, FuOrigin>;

/// Walks back from input `port` of `cell` through pass-through selections.
/// Throws Error(UnroutedPort) if the port is not driven.
Origin trace_port(const OverlayConfig &cfg, Cell cell, Dir port);
/// Same, for the value leaving `cell` on side `port`.
Origin trace_output(const OverlayConfig &cfg, Cell cell, Dir port);

// Binary format, little-endian:
//   "DFE1" u32 rows u32 cols
//   rows*cols records of 13 bytes:
//     u8 fu_op (0 = unused), u8 in1, u8 in2, u8 sel (0..3 = N,E,S,W, 0xFF),
//     u8 mask (0 none, 1 in1, 2 in2, 3 sel), i32 const,
//     u8 out[N], out[E], out[S], out[W] (0..3 input, 4 FU, 0xFF disabled)
//   u32 count, then count entries: u8 dir (0 in, 1 out), u8 side, u16 index,
//   u32 tag
std::vector<std::uint8_t> serialize_config(const OverlayConfig &cfg);
/// Throws Error(Format).
OverlayConfig deserialize_config(std::span<const std::uint8_t> bytes);

std::string config_to_text(const OverlayConfig &cfg);
/// Cells, routes and border ports; constant pins are drawn green.
std::string config_to_dot(const OverlayConfig &cfg);

} // namespace dfe
