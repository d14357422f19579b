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

#include "dfe/overlay.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>

namespace dfe {

const char *dir_name(Dir d) {
  switch (d) {
  case Dir::N: return "N";
  case Dir::E: return "E";
  case Dir::S: return "S";
  case Dir::W: return "W";
  }
  return "?";
}

const char *pin_name(Pin p) {
  switch (p) {
  case Pin::In1: return "in1";
  case Pin::In2: return "in2";
  case Pin::Sel: return "sel";
  }
  return "?";
}

std::optional<Cell> OverlayShape::neighbor(Cell c, Dir d) const {
  Cell n = c;
  switch (d) {
  case Dir::N: --n.row; break;
  case Dir::E: ++n.col; break;
  case Dir::S: ++n.row; break;
  case Dir::W: --n.col; break;
  }
  if (!contains(n))
    return std::nullopt;
  return n;
}

Pin pin_for_port(OpCode code, std::uint8_t port) {
  if (code == OpCode::Mux) {
    static constexpr Pin kMux[] = {Pin::Sel, Pin::In1, Pin::In2};
    if (port < 3)
      return kMux[port];
  } else if (port < opcode_arity(code)) {
    return port == 0 ? Pin::In1 : Pin::In2;
  }
  throw Error(ErrorCode::InvalidArgument, std::string("port ") + std::to_string(port) +
                                              " does not exist on " + opcode_name(code));
}

std::vector<Pin> pins_for(OpCode code) {
  std::vector<Pin> pins;
  for (int p = 0; p < opcode_arity(code); ++p)
    pins.push_back(pin_for_port(code, static_cast<std::uint8_t>(p)));
  return pins;
}

bool CellConfig::is_unused() const {
  if (fu_op || mask)
    return false;
  for (InSel s : pin_sel)
    if (s != InSel::Unconnected)
      return false;
  for (OutSel o : out_sel)
    if (o != OutSel::Disabled)
      return false;
  return true;
}

int border_index(const BorderPort &p) {
  return p.side == Dir::N || p.side == Dir::S ? p.cell.col : p.cell.row;
}

BorderPort border_port(const OverlayShape &shape, Dir side, int index) {
  switch (side) {
  case Dir::N: return {Cell{0, index}, side};
  case Dir::S: return {Cell{shape.rows - 1, index}, side};
  case Dir::E: return {Cell{index, shape.cols - 1}, side};
  case Dir::W: return {Cell{index, 0}, side};
  }
  return {};
}

std::vector<BorderPort> border_ports(const OverlayShape &shape) {
  std::vector<BorderPort> out;
  for (Dir side : kAllDirs) {
    const int n = side == Dir::N || side == Dir::S ? shape.cols : shape.rows;
    for (int i = 0; i < n; ++i)
      out.push_back(border_port(shape, side, i));
  }
  return out;
}

OverlayConfig::OverlayConfig(OverlayShape shape)
    : shape_(shape), cells_(static_cast<std::size_t>(shape.cell_count())) {}

void OverlayConfig::set_io(IoDir dir, BorderPort port, std::uint32_t tag) {
  clear_io(dir, port);
  IoEntry e{dir, port, tag};
  io_map_.insert(std::lower_bound(io_map_.begin(), io_map_.end(), e), e);
}

void OverlayConfig::clear_io(IoDir dir, BorderPort port) {
  io_map_.erase(std::remove_if(io_map_.begin(), io_map_.end(),
                               [&](const IoEntry &e) { return e.dir == dir && e.port == port; }),
                io_map_.end());
}

std::optional<std::uint32_t> OverlayConfig::io_tag(IoDir dir, BorderPort port) const {
  for (const auto &e : io_map_)
    if (e.dir == dir && e.port == port)
      return e.tag;
  return std::nullopt;
}

std::optional<BorderPort> OverlayConfig::find_tag(IoDir dir, std::uint32_t tag) const {
  for (const auto &e : io_map_)
    if (e.dir == dir && e.tag == tag)
      return e.port;
  return std::nullopt;
}

OverlayConfig new_overlay(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw Error(ErrorCode::InvalidArgument, "overlay dimensions must be at least 1x1");
  return OverlayConfig(OverlayShape{rows, cols});
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool valid_in_sel(InSel s) {
  return static_cast<std::uint8_t>(s) < 4 || s == InSel::Unconnected;
}

bool valid_out_sel(OutSel s) {
  return static_cast<std::uint8_t>(s) <= 4 || s == OutSel::Disabled;
}

std::string port_label(const BorderPort &p) {
  return std::string(dir_name(p.side)) + std::to_string(border_index(p));
}

/// Whether input `d` of `c` carries a signal.
bool input_driven(const OverlayConfig &cfg, Cell c, Dir d) {
  const auto n = cfg.shape().neighbor(c, d);
  if (n)
    return cfg.cell(*n).out(opposite(d)) != OutSel::Disabled;
  return cfg.io_tag(IoDir::In, BorderPort{c, d}).has_value();
}

} // namespace

std::vector<ConfigViolation> validate_config(const OverlayConfig &cfg) {
  std::vector<ConfigViolation> out;
  const OverlayShape &shape = cfg.shape();
  auto add = [&](Cell c, std::string port, std::string msg) {
    out.push_back(ConfigViolation{c, std::move(port), std::move(msg)});
  };
  if (shape.rows < 1 || shape.cols < 1 ||
      cfg.cells().size() != static_cast<std::size_t>(shape.cell_count())) {
    add(Cell{}, "shape", "configuration does not match its shape");
    return out;
  }

  for (int r = 0; r < shape.rows; ++r) {
    for (int c = 0; c < shape.cols; ++c) {
      const Cell cell{r, c};
      const CellConfig &cc = cfg.cell(cell);
      std::vector<Pin> required;
      if (cc.fu_op) {
        if (!is_valid_opcode(*cc.fu_op))
          add(cell, "fu", "invalid op code " + std::to_string(int(*cc.fu_op)));
        else
          required = pins_for(*cc.fu_op);
      }
      for (Pin p : kAllPins) {
        const InSel s = cc.sel(p);
        const bool masked = cc.mask && cc.mask->pin == p;
        const bool needed = std::find(required.begin(), required.end(), p) != required.end();
        const std::string pn = pin_name(p);
        if (!valid_in_sel(s)) {
          add(cell, pn, "invalid selector value " + std::to_string(int(s)));
          continue;
        }
        const bool connected = s != InSel::Unconnected;
        if (needed && !connected && !masked)
          add(cell, pn, std::string("pin required by ") + opcode_name(*cc.fu_op) +
                            " is neither connected nor masked");
        if (connected && masked)
          add(cell, pn, "pin is both connected and constant-masked");
        if (!needed && connected)
          add(cell, pn, cc.fu_op ? std::string("pin is not used by ") + opcode_name(*cc.fu_op)
                                 : std::string("pin connected on an unused FU"));
        if (!needed && masked)
          add(cell, pn, "mask on a pin the FU does not use");
        if (connected && needed && !input_driven(cfg, cell, sel_dir(s)))
          add(cell, pn, std::string("selected input ") + dir_name(sel_dir(s)) +
                            " is not driven");
      }
      for (Dir d : kAllDirs) {
        const OutSel o = cc.out(d);
        const std::string pn = std::string("out.") + dir_name(d);
        if (!valid_out_sel(o)) {
          add(cell, pn, "invalid output selector " + std::to_string(int(o)));
          continue;
        }
        if (o == OutSel::Disabled) {
          if (shape.on_border(cell, d) && cfg.io_tag(IoDir::Out, BorderPort{cell, d}))
            add(cell, pn, "stream output mapped but the port is disabled");
          continue;
        }
        if (o == OutSel::Fu && !cc.fu_op)
          add(cell, pn, "dangling FU: output selects an unused functional unit");
        if (out_is_input(o)) {
          const Dir from = static_cast<Dir>(o);
          if (from == d)
            add(cell, pn, "output reflects the input on the same side");
          else if (!input_driven(cfg, cell, from))
            add(cell, pn, std::string("passes input ") + dir_name(from) +
                              " which is not driven");
        }
        if (shape.on_border(cell, d) && !cfg.io_tag(IoDir::Out, BorderPort{cell, d}))
          add(cell, pn, "border output has no stream tag");
      }
    }
  }

  std::map<std::pair<IoDir, std::uint32_t>, int> tags;
  for (const auto &e : cfg.io_map()) {
    const std::string pn = std::string(e.dir == IoDir::In ? "io.in." : "io.out.") +
                           port_label(e.port);
    if (!shape.contains(e.port.cell) || !shape.on_border(e.port.cell, e.port.side)) {
      add(e.port.cell, pn, "stream interface is not on an outward face");
      continue;
    }
    if (++tags[{e.dir, e.tag}] == 2)
      add(e.port.cell, pn, "tag " + std::to_string(e.tag) + " is mapped twice");
  }

  // Routing cycles: DFS over signal nodes (cell inputs, FUs, cell outputs).
  const std::size_t n_cells = static_cast<std::size_t>(shape.cell_count());
  const std::size_t n_nodes = n_cells * 9;
  auto in_node = [&](Cell c, Dir d) { return shape.index(c) * 9 + static_cast<std::size_t>(d); };
  auto out_node = [&](Cell c, Dir d) { return shape.index(c) * 9 + 4 + static_cast<std::size_t>(d); };
  auto fu_node = [&](Cell c) { return shape.index(c) * 9 + 8; };
  std::vector<std::vector<std::size_t>> succ(n_nodes);
  for (std::size_t i = 0; i < n_cells; ++i) {
    const Cell c = shape.cell_at(i);
    const CellConfig &cc = cfg.cell(c);
    for (Dir d : kAllDirs) {
      const OutSel o = cc.out(d);
      if (!valid_out_sel(o) || o == OutSel::Disabled)
        continue;
      if (o == OutSel::Fu)
        succ[fu_node(c)].push_back(out_node(c, d));
      else
        succ[in_node(c, static_cast<Dir>(o))].push_back(out_node(c, d));
      if (auto nb = shape.neighbor(c, d))
        succ[out_node(c, d)].push_back(in_node(*nb, opposite(d)));
    }
    for (InSel s : cc.pin_sel)
      if (static_cast<std::uint8_t>(s) < 4)
        succ[in_node(c, sel_dir(s))].push_back(fu_node(c));
  }
  std::vector<std::uint8_t> color(n_nodes, 0);
  std::vector<bool> reported(n_cells, false);
  for (std::size_t root = 0; root < n_nodes; ++root) {
    if (color[root])
      continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto &[v, next] = stack.back();
      if (next < succ[v].size()) {
        const std::size_t w = succ[v][next++];
        if (color[w] == 0) {
          color[w] = 1;
          stack.emplace_back(w, 0);
        } else if (color[w] == 1 && !reported[w / 9]) {
          reported[w / 9] = true;
          add(shape.cell_at(w / 9), "routing", "routing cycle through this cell");
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tracing

Origin trace_output(const OverlayConfig &cfg, Cell cell, Dir port) {
  const auto limit = static_cast<std::size_t>(cfg.shape().cell_count()) * 4 + 1;
  for (std::size_t step = 0; step <= limit; ++step) {
    if (!cfg.shape().contains(cell))
      throw Error(ErrorCode::InvalidArgument, "cell outside the overlay");
    const CellConfig &cc = cfg.cell(cell);
    const OutSel o = cc.out(port);
    if (o == OutSel::Fu) {
      if (!cc.fu_op)
        throw Error(ErrorCode::UnroutedPort, "output selects an unused functional unit");
      return FuOrigin{cell};
    }
    if (!out_is_input(o))
      throw Error(ErrorCode::UnroutedPort,
                  std::string("output ") + dir_name(port) + " of cell (" +
                      std::to_string(cell.row) + "," + std::to_string(cell.col) +
                      ") is disabled");
    const Dir in = static_cast<Dir>(o);
    const auto n = cfg.shape().neighbor(cell, in);
    if (!n) {
      if (!cfg.io_tag(IoDir::In, BorderPort{cell, in}))
        throw Error(ErrorCode::UnroutedPort, "border input has no stream tag");
      return BorderOrigin{BorderPort{cell, in}};
    }
    cell = *n;
    port = opposite(in);
  }
  throw Error(ErrorCode::InvalidConfig, "routing cycle while tracing");
}

Origin trace_port(const OverlayConfig &cfg, Cell cell, Dir port) {
  if (!cfg.shape().contains(cell))
    throw Error(ErrorCode::InvalidArgument, "cell outside the overlay");
  const auto n = cfg.shape().neighbor(cell, port);
  if (!n) {
    if (!cfg.io_tag(IoDir::In, BorderPort{cell, port}))
      throw Error(ErrorCode::UnroutedPort, std::string("border input ") + dir_name(port) +
                                               " has no stream tag");
    return BorderOrigin{BorderPort{cell, port}};
  }
  return trace_output(cfg, *n, opposite(port));
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::size_t kCellRecord = 13;

void put_u32(std::vector<std::uint8_t> &b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

} // namespace

std::vector<std::uint8_t> serialize_config(const OverlayConfig &cfg) {
  std::vector<std::uint8_t> b = {'D', 'F', 'E', '1'};
  put_u32(b, static_cast<std::uint32_t>(cfg.shape().rows));
  put_u32(b, static_cast<std::uint32_t>(cfg.shape().cols));
  for (const CellConfig &c : cfg.cells()) {
    b.push_back(c.fu_op ? static_cast<std::uint8_t>(*c.fu_op) : 0);
    for (InSel s : c.pin_sel)
      b.push_back(static_cast<std::uint8_t>(s));
    b.push_back(c.mask ? static_cast<std::uint8_t>(static_cast<int>(c.mask->pin) + 1) : 0);
    put_u32(b, c.mask ? static_cast<std::uint32_t>(c.mask->value) : 0);
    for (OutSel o : c.out_sel)
      b.push_back(static_cast<std::uint8_t>(o));
  }
  put_u32(b, static_cast<std::uint32_t>(cfg.io_map().size()));
  for (const IoEntry &e : cfg.io_map()) {
    b.push_back(static_cast<std::uint8_t>(e.dir));
    b.push_back(static_cast<std::uint8_t>(e.port.side));
    const auto index = static_cast<std::uint16_t>(border_index(e.port));
    b.push_back(static_cast<std::uint8_t>(index & 0xFF));
    b.push_back(static_cast<std::uint8_t>(index >> 8));
    put_u32(b, e.tag);
  }
  return b;
}

OverlayConfig deserialize_config(std::span<const std::uint8_t> b) {
  auto fail = [](const std::string &msg) -> void {
    throw Error(ErrorCode::Format, "bad configuration: " + msg);
  };
  if (b.size() < 12 || std::memcmp(b.data(), "DFE1", 4) != 0)
    fail("missing DFE1 header");
  const std::uint32_t rows = get_u32(b, 4), cols = get_u32(b, 8);
  if (rows < 1 || cols < 1 || rows > 4096 || cols > 4096 ||
      static_cast<std::uint64_t>(rows) * cols > (1u << 20))
    fail("unsupported dimensions " + std::to_string(rows) + "x" + std::to_string(cols));
  OverlayConfig cfg(OverlayShape{static_cast<int>(rows), static_cast<int>(cols)});
  std::size_t at = 12;
  const std::size_t n_cells = static_cast<std::size_t>(rows) * cols;
  if (b.size() < at + n_cells * kCellRecord + 4)
    fail("truncated cell records");
  for (std::size_t i = 0; i < n_cells; ++i, at += kCellRecord) {
    CellConfig &c = cfg.cell(cfg.shape().cell_at(i));
    if (b[at] != 0) {
      const auto code = static_cast<OpCode>(b[at]);
      if (!is_valid_opcode(code))
        fail("unknown op code " + std::to_string(b[at]));
      c.fu_op = code;
    }
    for (int p = 0; p < 3; ++p) {
      const auto s = static_cast<InSel>(b[at + 1 + p]);
      if (!valid_in_sel(s))
        fail("bad selector byte");
      c.pin_sel[p] = s;
    }
    const std::uint8_t mask = b[at + 4];
    const auto value = static_cast<std::int32_t>(get_u32(b, at + 5));
    if (mask > 3)
      fail("bad mask byte");
    if (mask == 0 && value != 0)
      fail("constant without a mask");
    if (mask)
      c.mask = ConstMask{static_cast<Pin>(mask - 1), value};
    for (int d = 0; d < 4; ++d) {
      const auto o = static_cast<OutSel>(b[at + 9 + d]);
      if (!valid_out_sel(o))
        fail("bad output selector byte");
      c.out_sel[d] = o;
    }
  }
  const std::uint32_t count = get_u32(b, at);
  at += 4;
  if (b.size() != at + static_cast<std::size_t>(count) * 8)
    fail("io map size does not match the entry count");
  for (std::uint32_t i = 0; i < count; ++i, at += 8) {
    if (b[at] > 1 || b[at + 1] > 3)
      fail("bad io entry");
    const auto dir = static_cast<IoDir>(b[at]);
    const auto side = static_cast<Dir>(b[at + 1]);
    const int index = b[at + 2] | (b[at + 3] << 8);
    const int limit = side == Dir::N || side == Dir::S ? static_cast<int>(cols)
                                                       : static_cast<int>(rows);
    if (index >= limit)
      fail("io index out of range");
    const BorderPort port = border_port(cfg.shape(), side, index);
    if (cfg.io_tag(dir, port))
      fail("duplicate io entry");
    cfg.set_io(dir, port, get_u32(b, at + 4));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Text and DOT

namespace {

std::string in_sel_text(InSel s) {
  return s == InSel::Unconnected ? "-" : dir_name(sel_dir(s));
}

std::string out_sel_text(OutSel o) {
  if (o == OutSel::Disabled)
    return "-";
  if (o == OutSel::Fu)
    return "FU";
  return std::string("in") + dir_name(static_cast<Dir>(o));
}

std::string cell_id(Cell c) {
  return "c" + std::to_string(c.row) + "_" + std::to_string(c.col);
}

} // namespace

std::string config_to_text(const OverlayConfig &cfg) {
  std::ostringstream os;
  os << "overlay " << cfg.shape().rows << "x" << cfg.shape().cols << "\n";
  for (std::size_t i = 0; i < cfg.cells().size(); ++i) {
    const CellConfig &c = cfg.cells()[i];
    if (c.is_unused())
      continue;
    const Cell cell = cfg.shape().cell_at(i);
    os << "cell " << cell.row << "," << cell.col
       << " op=" << (c.fu_op ? opcode_name(*c.fu_op) : "-");
    for (Pin p : kAllPins)
      os << ' ' << pin_name(p) << '=' << in_sel_text(c.sel(p));
    if (c.mask)
      os << " mask=" << pin_name(c.mask->pin) << ':' << c.mask->value;
    os << " out=";
    for (Dir d : kAllDirs)
      os << (d == Dir::N ? "" : ",") << dir_name(d) << ':' << out_sel_text(c.out(d));
    os << "\n";
  }
  for (const auto &e : cfg.io_map())
    os << "io " << (e.dir == IoDir::In ? "in " : "out ") << port_label(e.port)
       << " tag=" << e.tag << "\n";
  return os.str();
}

std::string config_to_dot(const OverlayConfig &cfg) {
  std::ostringstream os;
  const OverlayShape &shape = cfg.shape();
  os << "digraph overlay {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < cfg.cells().size(); ++i) {
    const Cell c = shape.cell_at(i);
    const CellConfig &cc = cfg.cells()[i];
    os << "  " << cell_id(c) << " [label=\"(" << c.row << "," << c.col << ")\\n"
       << (cc.fu_op ? opcode_name(*cc.fu_op) : "-") << "\", pos=\"" << c.col * 2 << ","
       << -c.row * 2 << "!\"" << (cc.is_unused() ? ", style=dashed" : "") << "];\n";
    if (cc.mask)
      os << "  k" << c.row << "_" << c.col << " [label=\"" << cc.mask->value
         << "\", style=filled, fillcolor=green];\n  k" << c.row << "_" << c.col << " -> "
         << cell_id(c) << " [label=\"" << pin_name(cc.mask->pin) << "\"];\n";
  }
  for (const auto &e : cfg.io_map()) {
    const std::string io = std::string(e.dir == IoDir::In ? "in_" : "out_") +
                           port_label(e.port);
    os << "  " << io << " [shape=ellipse, label=\"" << (e.dir == IoDir::In ? "in " : "out ")
       << port_label(e.port) << "\\ntag " << e.tag << "\"];\n";
    if (e.dir == IoDir::In)
      os << "  " << io << " -> " << cell_id(e.port.cell) << ";\n";
  }
  for (std::size_t i = 0; i < cfg.cells().size(); ++i) {
    const Cell c = shape.cell_at(i);
    const CellConfig &cc = cfg.cells()[i];
    for (Dir d : kAllDirs) {
      const OutSel o = cc.out(d);
      if (o == OutSel::Disabled)
        continue;
      const std::string label = out_sel_text(o);
      if (auto n = shape.neighbor(c, d))
        os << "  " << cell_id(c) << " -> " << cell_id(*n) << " [label=\"" << label << "\"];\n";
      else if (cfg.io_tag(IoDir::Out, BorderPort{c, d}))
        os << "  " << cell_id(c) << " -> out_" << port_label(BorderPort{c, d})
           << " [label=\"" << label << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

} // namespace dfe
