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

#include "dfe/placer.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace dfe {

double PlacerParams::sigma_for(const OverlayShape &shape) const {
  return sigma.value_or(std::min(shape.rows, shape.cols) / 4.0);
}

const char *place_status_name(PlaceStatus s) {
  switch (s) {
  case PlaceStatus::Placed: return "Placed";
  case PlaceStatus::Unroutable: return "Unroutable";
  case PlaceStatus::PreconditionViolated: return "PreconditionViolated";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// RoutingState

RoutingState::RoutingState(OverlayShape shape)
    : cfg_(shape), fu_(static_cast<std::size_t>(shape.cell_count())),
      out_(static_cast<std::size_t>(shape.cell_count()) * 4),
      border_in_(static_cast<std::size_t>(shape.io_capacity())),
      borders_(border_ports(shape)) {}

namespace {

std::size_t border_slot(const std::vector<BorderPort> &borders, const BorderPort &p) {
  auto it = std::find(borders.begin(), borders.end(), p);
  if (it == borders.end())
    throw Error(ErrorCode::InvalidArgument, "not a border port");
  return static_cast<std::size_t>(it - borders.begin());
}

} // namespace

std::optional<NodeId> RoutingState::fu_node(Cell c) const { return fu_[shape().index(c)]; }

std::optional<NodeId> RoutingState::out_value(Cell c, Dir d) const {
  return out_[out_index(c, d)];
}

std::optional<NodeId> RoutingState::input_value(Cell c, Dir d) const {
  if (auto n = shape().neighbor(c, d))
    return out_[out_index(*n, opposite(d))];
  return border_in_[border_slot(borders_, BorderPort{c, d})];
}

std::optional<BorderPort> RoutingState::input_port_of(NodeId value) const {
  auto it = input_ports_.find(value);
  if (it == input_ports_.end())
    return std::nullopt;
  return it->second;
}

std::optional<BorderPort> RoutingState::output_port_of(NodeId output) const {
  auto it = output_ports_.find(output);
  if (it == output_ports_.end())
    return std::nullopt;
  return it->second;
}

std::vector<RouteSource> RoutingState::sites(NodeId value) const {
  std::vector<RouteSource> out;
  for (int i = 0; i < shape().cell_count(); ++i) {
    const Cell c = shape().cell_at(static_cast<std::size_t>(i));
    if (fu_[static_cast<std::size_t>(i)] == value)
      out.push_back(RouteSource{RouteSource::Kind::Fu, c, Dir::N});
    for (Dir d : kAllDirs)
      if (input_value(c, d) == value)
        out.push_back(RouteSource{RouteSource::Kind::Arrival, c, d});
  }
  return out;
}

std::vector<RouteSource> RoutingState::free_border_inputs() const {
  std::vector<RouteSource> out;
  for (std::size_t i = 0; i < borders_.size(); ++i)
    if (!border_in_[i])
      out.push_back(RouteSource{RouteSource::Kind::FreeBorderInput, borders_[i].cell,
                                borders_[i].side});
  return out;
}

std::vector<RouteSink> RoutingState::free_border_outputs() const {
  std::vector<RouteSink> out;
  for (const BorderPort &p : borders_)
    if (!out_[out_index(p.cell, p.side)])
      out.push_back(RouteSink{RouteSink::Kind::BorderOutput, p.cell, Pin::In1, p.side});
  return out;
}

std::vector<Cell> RoutingState::free_cells() const {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < fu_.size(); ++i)
    if (!fu_[i])
      out.push_back(shape().cell_at(i));
  return out;
}

void RoutingState::save_cell(Cell c) {
  JournalEntry e;
  e.kind = JournalEntry::Kind::Cell;
  e.index = shape().index(c);
  e.old_cell = cfg_.cell(c);
  journal_.push_back(std::move(e));
}

void RoutingState::set_slot(JournalEntry::Kind kind, std::size_t i, std::optional<NodeId> value) {
  auto &slots = kind == JournalEntry::Kind::Fu ? fu_
                : kind == JournalEntry::Kind::Out ? out_
                                                  : border_in_;
  JournalEntry e;
  e.kind = kind;
  e.index = i;
  e.old_value = slots[i];
  journal_.push_back(std::move(e));
  slots[i] = value;
}

void RoutingState::set_port(JournalEntry::Kind kind, NodeId node, BorderPort port) {
  auto &ports = kind == JournalEntry::Kind::InputPort ? input_ports_ : output_ports_;
  JournalEntry e;
  e.kind = kind;
  e.node = node;
  if (auto it = ports.find(node); it != ports.end())
    e.old_port = it->second;
  journal_.push_back(std::move(e));
  ports[node] = port;
}

void RoutingState::set_io(IoDir dir, BorderPort port, std::uint32_t tag) {
  JournalEntry e;
  e.kind = JournalEntry::Kind::Io;
  e.index = static_cast<std::size_t>(dir);
  e.old_port = port;
  e.old_tag = cfg_.io_tag(dir, port);
  journal_.push_back(std::move(e));
  cfg_.set_io(dir, port, tag);
}

void RoutingState::place_fu(Cell c, NodeId node, OpCode code, std::optional<ConstMask> mask) {
  if (fu_[shape().index(c)])
    throw Error(ErrorCode::Internal, "cell already hosts a node");
  save_cell(c);
  cfg_.cell(c).fu_op = code;
  cfg_.cell(c).mask = mask;
  set_slot(JournalEntry::Kind::Fu, shape().index(c), node);
}

void RoutingState::claim_border_input(BorderPort port, NodeId value) {
  const std::size_t slot = border_slot(borders_, port);
  if (border_in_[slot])
    throw Error(ErrorCode::Internal, "border input already claimed");
  set_slot(JournalEntry::Kind::BorderIn, slot, value);
  set_port(JournalEntry::Kind::InputPort, value, port);
  set_io(IoDir::In, port, static_cast<std::uint32_t>(idx(value)));
}

void RoutingState::claim_border_output(BorderPort port, NodeId output) {
  set_port(JournalEntry::Kind::OutputPort, output, port);
  set_io(IoDir::Out, port, static_cast<std::uint32_t>(idx(output)));
}

void RoutingState::claim_out(Cell c, Dir d, OutSel source, NodeId value) {
  if (out_[out_index(c, d)])
    throw Error(ErrorCode::Internal, "cell output already claimed");
  save_cell(c);
  cfg_.cell(c).out(d) = source;
  set_slot(JournalEntry::Kind::Out, out_index(c, d), value);
}

void RoutingState::select_pin(Cell c, Pin pin, Dir input) {
  save_cell(c);
  cfg_.cell(c).sel(pin) = in_sel(input);
}

void RoutingState::rollback(std::size_t mark) {
  using K = JournalEntry::Kind;
  while (journal_.size() > mark) {
    JournalEntry &e = journal_.back();
    switch (e.kind) {
    case K::Cell:
      cfg_.cell(shape().cell_at(e.index)) = e.old_cell;
      break;
    case K::Fu:
      fu_[e.index] = e.old_value;
      break;
    case K::Out:
      out_[e.index] = e.old_value;
      break;
    case K::BorderIn:
      border_in_[e.index] = e.old_value;
      break;
    case K::InputPort:
    case K::OutputPort: {
      auto &ports = e.kind == K::InputPort ? input_ports_ : output_ports_;
      if (e.old_port)
        ports[e.node] = *e.old_port;
      else
        ports.erase(e.node);
      break;
    }
    case K::Io:
      if (e.old_tag)
        cfg_.set_io(static_cast<IoDir>(e.index), *e.old_port, *e.old_tag);
      else
        cfg_.clear_io(static_cast<IoDir>(e.index), *e.old_port);
      break;
    }
    journal_.pop_back();
  }
}

// ---------------------------------------------------------------------------
// Routing

Route route_edge(RoutingState &state, NodeId value, std::span<const RouteSource> origins,
                 std::span<const RouteSink> sinks, const RouteGuard *guard) {
  const OverlayShape &shape = state.shape();
  const std::size_t n_cells = static_cast<std::size_t>(shape.cell_count());
  // State s = cell * 5 + slot: slots 0..3 = value present on input d, 4 = FU.
  // Terminal states (border outputs) follow at n_cells * 5 + side * n_cells + cell.
  const std::size_t n_states = n_cells * 9;
  constexpr int kInf = std::numeric_limits<int>::max();
  struct Parent {
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    Hop hop;
    int origin = -1; // index into origins when this state is a start
  };
  std::vector<int> dist(n_states, kInf);
  std::vector<Parent> parent(n_states);
  using Key = std::tuple<int, int, int, int, std::size_t>; // cost, port, row, col, state
  std::priority_queue<Key, std::vector<Key>, std::greater<>> pq;
  auto cell_of = [&](std::size_t s) {
    return shape.cell_at(s < n_cells * 5 ? s / 5 : (s - n_cells * 5) % n_cells);
  };
  auto port_of = [&](std::size_t s) {
    return s < n_cells * 5 ? static_cast<int>(s % 5)
                           : static_cast<int>((s - n_cells * 5) / n_cells);
  };
  auto push = [&](std::size_t s, int cost) {
    const Cell c = cell_of(s);
    pq.emplace(cost, port_of(s), c.row, c.col, s);
  };

  for (std::size_t i = 0; i < origins.size(); ++i) {
    const RouteSource &o = origins[i];
    const std::size_t s = shape.index(o.cell) * 5 +
                          (o.kind == RouteSource::Kind::Fu ? 4 : static_cast<std::size_t>(o.port));
    if (dist[s] == 0)
      continue;
    dist[s] = 0;
    parent[s].origin = static_cast<int>(i);
    push(s, 0);
  }

  auto sink_for_pin = [&](Cell c) -> const RouteSink * {
    for (const RouteSink &k : sinks)
      if (k.kind == RouteSink::Kind::Pin && k.cell == c) {
        const CellConfig &cc = state.config().cell(c);
        const bool masked = cc.mask && cc.mask->pin == k.pin;
        if (cc.sel(k.pin) == InSel::Unconnected && !masked)
          return &k;
      }
    return nullptr;
  };
  auto border_sink = [&](Cell c, Dir d) -> const RouteSink * {
    for (const RouteSink &k : sinks)
      if (k.kind == RouteSink::Kind::BorderOutput && k.cell == c && k.side == d)
        return &k;
    return nullptr;
  };

  // Claiming output `d` of `c` for `value` must leave `c` a way out and the
  // neighbour enough inputs for what it still waits for.
  auto guarded = [&](Cell c, Dir d) {
    if (!guard)
      return false;
    const std::size_t ci = shape.index(c);
    const auto exit = guard->exit[ci];
    if (exit != RouteGuard::Exit::None && state.fu_node(c) != value) {
      int free_outs = 0;
      for (Dir e : kAllDirs)
        if (!state.out_value(c, e) &&
            (exit == RouteGuard::Exit::Any || !shape.on_border(c, e)))
          ++free_outs;
      const bool counted = exit == RouteGuard::Exit::Any || !shape.on_border(c, d);
      if (counted && free_outs <= 1)
        return true;
    }
    const auto n = shape.neighbor(c, d);
    if (!n)
      return false;
    const std::size_t ni = shape.index(*n);
    if (guard->pending[ni] == 0)
      return false;
    const auto &aw = guard->awaited[ni];
    if (std::find(aw.begin(), aw.end(), value) != aw.end())
      return false;
    int free_ins = 0;
    for (Dir e : kAllDirs)
      if (!shape.on_border(*n, e) && !state.input_value(*n, e))
        ++free_ins;
    return free_ins <= guard->pending[ni];
  };

  std::optional<std::size_t> found;
  const RouteSink *found_sink = nullptr;
  while (!pq.empty()) {
    const auto [cost, port, row, col, s] = pq.top();
    pq.pop();
    if (cost != dist[s])
      continue;
    if (s >= n_cells * 5) {
      found = s;
      found_sink = border_sink(cell_of(s), static_cast<Dir>(port_of(s)));
      break;
    }
    const Cell c = cell_of(s);
    const int slot = port_of(s);
    if (slot < 4) {
      if (const RouteSink *k = sink_for_pin(c)) {
        found = s;
        found_sink = k;
        break;
      }
    }
    for (Dir d : kAllDirs) {
      if (slot < 4 && static_cast<int>(d) == slot)
        continue; // no reflection
      if (state.out_value(c, d) || guarded(c, d))
        continue;
      std::size_t next;
      if (auto n = shape.neighbor(c, d)) {
        next = shape.index(*n) * 5 + static_cast<std::size_t>(opposite(d));
      } else {
        if (!border_sink(c, d))
          continue;
        next = n_cells * 5 + static_cast<std::size_t>(d) * n_cells + shape.index(c);
      }
      if (cost + 1 < dist[next]) {
        dist[next] = cost + 1;
        parent[next].prev = s;
        parent[next].origin = -1;
        parent[next].hop =
            Hop{c, d, slot == 4 ? OutSel::Fu : out_from_input(static_cast<Dir>(slot))};
        push(next, cost + 1);
      }
    }
  }
  if (!found)
    throw Error(ErrorCode::NoPath, "no free path for value " + std::to_string(idx(value)));

  Route route;
  std::size_t s = *found;
  while (parent[s].origin < 0) {
    route.hops.push_back(parent[s].hop);
    s = parent[s].prev;
  }
  std::reverse(route.hops.begin(), route.hops.end());
  route.source = origins[static_cast<std::size_t>(parent[s].origin)];
  route.sink = *found_sink;
  if (route.sink.kind == RouteSink::Kind::Pin)
    route.sink.side = static_cast<Dir>(port_of(*found));

  if (route.source.kind == RouteSource::Kind::FreeBorderInput)
    state.claim_border_input(BorderPort{route.source.cell, route.source.port}, value);
  for (const Hop &h : route.hops)
    state.claim_out(h.cell, h.out, h.source, value);
  if (route.sink.kind == RouteSink::Kind::Pin)
    state.select_pin(route.sink.cell, route.sink.pin, route.sink.side);
  return route;
}

// ---------------------------------------------------------------------------
// Sampling

bool is_io_adjacent(const DataFlowGraph &g, NodeId node) {
  for (const auto &e : g.edges()) {
    if (e.dst == node && g.node(e.src).kind == NodeKind::Input)
      return true;
    if (e.src == node && g.node(e.dst).kind == NodeKind::Output)
      return true;
  }
  return false;
}

NodeId select_node(const DataFlowGraph &g, std::span<const NodeId> unplaced, double io_weight,
                   Rng &rng) {
  if (unplaced.empty())
    throw Error(ErrorCode::InvalidArgument, "no node to select");
  if (unplaced.size() == 1)
    return unplaced[0];
  std::vector<double> w;
  w.reserve(unplaced.size());
  for (NodeId n : unplaced)
    w.push_back(is_io_adjacent(g, n) ? io_weight : 1.0);
  return unplaced[rng.weighted(w)];
}

double position_weight(Cell p, std::span<const Cell> related, const OverlayShape &shape,
                       const PlacerParams &params) {
  const double cr = (shape.rows - 1) / 2.0;
  const double cc = (shape.cols - 1) / 2.0;
  const double d2 = (p.row - cr) * (p.row - cr) + (p.col - cc) * (p.col - cc);
  const double sigma = params.sigma_for(shape);
  const double border = 1.0 - std::exp(-d2 / (2 * sigma * sigma));
  double affinity = 0;
  for (const Cell &r : related)
    affinity += 1.0 / (1.0 + std::abs(p.row - r.row) + std::abs(p.col - r.col));
  return border * (1.0 + params.affinity_bonus * affinity);
}

Cell sample_position(std::span<const Cell> free_cells, std::span<const Cell> related,
                     const OverlayShape &shape, const PlacerParams &params, Rng &rng) {
  if (free_cells.empty())
    throw Error(ErrorCode::InvalidArgument, "no free cell");
  if (free_cells.size() == 1)
    return free_cells[0];
  std::vector<double> w;
  w.reserve(free_cells.size());
  for (const Cell &c : free_cells)
    w.push_back(position_weight(c, related, shape, params));
  return free_cells[rng.weighted(w)];
}

// ---------------------------------------------------------------------------
// Place & route

namespace {

class Placer {
public:
  Placer(const DataFlowGraph &g, const OverlayShape &shape, const PlacerParams &params,
         std::uint64_t seed)
      : g_(g), shape_(shape), params_(params), rng_(seed), state_(shape), seed_(seed) {
    for (const Node &n : g_.nodes())
      if (n.kind == NodeKind::Op)
        unplaced_.insert(n.id);
    in_edges_.resize(g_.size());
    out_edges_.resize(g_.size());
    for (const Edge &e : g_.edges()) {
      in_edges_[idx(e.dst)].push_back(e);
      out_edges_[idx(e.src)].push_back(e);
    }
    for (auto &v : in_edges_)
      std::sort(v.begin(), v.end(),
                [](const Edge &a, const Edge &b) { return a.dst_port < b.dst_port; });
  }

  PlaceResult run() {
    PlaceResult res;
    std::set<NodeId> excluded;
    int restarts = 0;
    for (;;) {
      if (unplaced_.empty()) {
        if (!spend())
          return exhausted();
        const std::size_t mark = state_.mark();
        const std::size_t n_routes = routes_.size();
        try {
          finalize();
          return success();
        } catch (const Error &e) {
          if (e.code() != ErrorCode::NoPath)
            throw;
          state_.rollback(mark);
          routes_.resize(n_routes);
          backtrack();
          excluded.clear();
          restarts = 0;
          continue;
        }
      }
      std::vector<NodeId> candidates;
      for (NodeId n : unplaced_)
        if (!excluded.count(n))
          candidates.push_back(n);
      if (candidates.empty() || restarts >= params_.max_node_restarts) {
        backtrack();
        excluded.clear();
        restarts = 0;
        continue;
      }
      const NodeId v = select_node(g_, candidates, params_.io_weight, rng_);
      std::vector<Cell> failed;
      bool placed = false;
      for (int attempt = 0; attempt < params_.max_position_attempts && !placed; ++attempt) {
        std::vector<Cell> free;
        for (const Cell &c : state_.free_cells())
          if (std::find(failed.begin(), failed.end(), c) == failed.end())
            free.push_back(c);
        if (free.empty())
          break;
        if (!spend())
          return exhausted();
        const std::vector<Cell> rel = related(v);
        const Cell p = sample_position(free, rel, shape_, params_, rng_);
        const std::size_t mark = state_.mark();
        const std::size_t n_routes = routes_.size();
        try {
          place(v, p);
          check_viable();
          current_.reset();
          stack_.push_back(Frame{v, mark, n_routes});
          cells_[v] = p;
          unplaced_.erase(v);
          placed = true;
        } catch (const Error &e) {
          if (e.code() != ErrorCode::NoPath)
            throw;
          current_.reset();
          state_.rollback(mark);
          routes_.resize(n_routes);
          failed.push_back(p);
          ++counters_.position_retries;
        }
      }
      if (placed) {
        excluded.clear();
        restarts = 0;
      } else {
        excluded.insert(v);
        ++restarts;
        ++counters_.node_restarts;
      }
    }
  }

private:
  struct Frame {
    NodeId node;
    std::size_t mark;
    std::size_t routes;
  };

  bool spend() {
    if (counters_.iterations >= params_.global_budget)
      return false;
    ++counters_.iterations;
    return true;
  }

  PlaceResult exhausted() const {
    PlaceResult r;
    r.status = PlaceStatus::Unroutable;
    r.attempts = counters_;
    r.message = "placement budget of " + std::to_string(params_.global_budget) +
                " iterations exhausted";
    return r;
  }

  std::vector<Cell> related(NodeId v) const {
    std::set<NodeId> rel;
    for (const Edge &e : in_edges_[idx(v)]) {
      rel.insert(e.src);
      if (g_.node(e.src).kind != NodeKind::Const)
        for (const Edge &s : out_edges_[idx(e.src)])
          rel.insert(s.dst);
    }
    for (const Edge &e : out_edges_[idx(v)]) {
      rel.insert(e.dst);
      for (const Edge &s : in_edges_[idx(e.dst)])
        rel.insert(s.src);
    }
    std::vector<Cell> out;
    for (NodeId n : rel)
      if (n != v)
        if (auto it = cells_.find(n); it != cells_.end())
          out.push_back(it->second);
    return out;
  }

  void place(NodeId v, Cell p) {
    current_ = v;
    const Node &node = g_.node(v);
    std::optional<ConstMask> mask;
    for (const Edge &e : in_edges_[idx(v)])
      if (g_.node(e.src).kind == NodeKind::Const && !mask)
        mask = ConstMask{pin_for_port(node.code, e.dst_port), g_.node(e.src).value};
    state_.place_fu(p, v, node.code, mask);

    // Edges to already-placed neighbours and stream interfaces, routed in
    // a random order: an early shortest path can block a later one.
    std::vector<Edge> todo;
    for (const Edge &e : in_edges_[idx(v)]) {
      const NodeKind k = g_.node(e.src).kind;
      if (k == NodeKind::Input || (k == NodeKind::Op && cells_.count(e.src)))
        todo.push_back(e);
    }
    for (const Edge &e : out_edges_[idx(v)])
      if (g_.node(e.dst).kind == NodeKind::Output || cells_.count(e.dst))
        todo.push_back(e);
    for (std::size_t i = todo.size(); i > 1; --i)
      std::swap(todo[i - 1], todo[rng_.below(i)]);
    for (const Edge &e : todo) {
      const Node &dst = g_.node(e.dst);
      if (dst.kind == NodeKind::Output) {
        route_to_output(e);
        continue;
      }
      const Cell at = e.dst == v ? p : cells_.at(e.dst);
      const RouteSink sink{RouteSink::Kind::Pin, at, pin_for_port(dst.code, e.dst_port), Dir::N};
      if (g_.node(e.src).kind == NodeKind::Input && !state_.input_port_of(e.src)) {
        const RouteSource entry = sample_entry(at);
        route(e, std::vector<RouteSource>{entry}, std::span(&sink, 1));
      } else {
        route(e, value_origins(e.src), std::span(&sink, 1));
      }
    }
  }

  /// Stream interface for an Input's first use, drawn with weight
  /// 1/(1 + manhattan)^2 towards the consuming cell.
  RouteSource sample_entry(Cell target) {
    const std::vector<RouteSource> free = state_.free_border_inputs();
    if (free.empty())
      throw Error(ErrorCode::NoPath, "no free stream input");
    std::vector<double> w;
    w.reserve(free.size());
    for (const RouteSource &s : free) {
      const double d = std::abs(s.cell.row - target.row) + std::abs(s.cell.col - target.col);
      w.push_back(1.0 / ((1.0 + d) * (1.0 + d)));
    }
    return free[rng_.weighted(w)];
  }

  std::vector<RouteSource> value_origins(NodeId value) const {
    if (g_.node(value).kind == NodeKind::Input && !state_.input_port_of(value))
      return state_.free_border_inputs();
    return state_.sites(value);
  }

  void route(const Edge &e, std::vector<RouteSource> origins, std::span<const RouteSink> sinks) {
    if (origins.empty())
      throw Error(ErrorCode::NoPath, "value has no origin");
    const RouteGuard guard = make_guard();
    Route r = route_edge(state_, e.src, origins, sinks, &guard);
    r.edge = e;
    routes_.push_back(std::move(r));
  }

  /// Throws NoPath when the partial mapping can no longer be completed:
  /// more values than free outputs can only leave a cell, or a cell waits
  /// for more operands than it has free inputs.
  void check_viable() const {
    const std::size_t n = static_cast<std::size_t>(shape_.cell_count());
    std::vector<int> must_leave(n, 0);
    auto waits = [&](NodeId u) {
      for (const Edge &e : out_edges_[idx(u)])
        if (g_.node(e.dst).kind == NodeKind::Op && !placed(e.dst))
          return true;
      return false;
    };
    for (const Node &node : g_.nodes()) {
      const bool live = node.kind == NodeKind::Op ? placed(node.id)
                                                 : node.kind == NodeKind::Input &&
                                                       state_.input_port_of(node.id).has_value();
      if (!live || !waits(node.id))
        continue;
      std::optional<Cell> only;
      bool spread = false;
      for (const RouteSource &s : state_.sites(node.id)) {
        if (s.kind == RouteSource::Kind::Arrival && !state_.fu_node(s.cell)) {
          spread = true; // a consumer may still take this cell
          break;
        }
        if (only && *only != s.cell) {
          spread = true;
          break;
        }
        only = s.cell;
      }
      if (!spread && only)
        ++must_leave[shape_.index(*only)];
    }
    const RouteGuard guard = make_guard();
    for (std::size_t i = 0; i < n; ++i) {
      const Cell c = shape_.cell_at(i);
      int free_outs = 0;
      int free_ins = 0;
      for (Dir d : kAllDirs) {
        if (shape_.on_border(c, d))
          continue;
        free_outs += !state_.out_value(c, d);
        free_ins += !state_.input_value(c, d);
      }
      if (must_leave[i] > free_outs || guard.pending[i] > free_ins)
        throw Error(ErrorCode::NoPath, "dead end at (" + std::to_string(c.row) + "," +
                                           std::to_string(c.col) + ")");
    }
  }

  bool placed(NodeId u) const { return cells_.count(u) || u == current_; }

  RouteGuard make_guard() const {
    const std::size_t n = static_cast<std::size_t>(shape_.cell_count());
    RouteGuard guard;
    guard.exit.assign(n, RouteGuard::Exit::None);
    guard.awaited.resize(n);
    guard.pending.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const Cell c = shape_.cell_at(i);
      const auto u = state_.fu_node(c);
      if (!u)
        continue;
      bool op_waits = false;
      bool out_waits = false;
      for (const Edge &e : out_edges_[idx(*u)]) {
        const Node &dst = g_.node(e.dst);
        if (dst.kind == NodeKind::Output)
          out_waits = out_waits || !state_.output_port_of(e.dst);
        else if (!placed(e.dst))
          op_waits = true;
      }
      bool escapes = false;
      for (Dir d : kAllDirs)
        escapes = escapes || state_.out_value(c, d) == *u;
      if (!escapes && op_waits)
        guard.exit[i] = RouteGuard::Exit::Interior;
      else if (!escapes && out_waits)
        guard.exit[i] = RouteGuard::Exit::Any;
      const CellConfig &cc = state_.config().cell(c);
      for (const Edge &e : in_edges_[idx(*u)]) {
        const Node &src = g_.node(e.src);
        if (src.kind == NodeKind::Const)
          continue;
        const Pin pin = pin_for_port(g_.node(*u).code, e.dst_port);
        if (cc.sel(pin) != InSel::Unconnected || (cc.mask && cc.mask->pin == pin))
          continue;
        auto &aw = guard.awaited[i];
        if (std::find(aw.begin(), aw.end(), e.src) != aw.end())
          continue;
        aw.push_back(e.src);
        if (src.kind == NodeKind::Op)
          ++guard.pending[i];
      }
    }
    return guard;
  }

  void route_to_output(const Edge &e) {
    const std::vector<RouteSink> sinks = state_.free_border_outputs();
    if (sinks.empty())
      throw Error(ErrorCode::NoPath, "no free stream output");
    route(e, value_origins(e.src), sinks);
    const Route &r = routes_.back();
    state_.claim_border_output(BorderPort{r.sink.cell, r.sink.side}, e.dst);
  }

  void finalize() {
    for (const Edge &e : g_.edges())
      if (g_.node(e.src).kind == NodeKind::Input && g_.node(e.dst).kind == NodeKind::Output)
        route_to_output(e);
    for (const Node &n : g_.nodes()) {
      if (n.kind != NodeKind::Input || state_.input_port_of(n.id))
        continue;
      const auto free = state_.free_border_inputs();
      if (free.empty())
        throw Error(ErrorCode::NoPath, "no free stream input");
      state_.claim_border_input(BorderPort{free.front().cell, free.front().port}, n.id);
    }
  }

  /// Undoes a uniform number of placements in [1, bound]. The bound starts
  /// at the configured depth and doubles every kStallBacktracks backtracks
  /// that did not end with more nodes placed than ever before.
  void backtrack() {
    ++counters_.global_backtracks;
    if (stack_.size() > best_depth_) {
      best_depth_ = stack_.size();
      stalls_ = 0;
    } else {
      ++stalls_;
    }
    if (stack_.empty())
      return;
    const std::int64_t base = params_.backtrack_max_depth.value_or(
        std::max(1, static_cast<int>(stack_.size()) / 4));
    const int doublings = static_cast<int>(std::min<std::uint64_t>(stalls_ / kStallBacktracks, 32));
    const std::int64_t bound =
        std::min<std::int64_t>(std::max<std::int64_t>(1, base) << std::min(doublings, 30),
                               static_cast<std::int64_t>(stack_.size()));
    const std::int64_t steps = rng_.between(1, bound);
    for (std::int64_t i = 0; i < steps; ++i) {
      const Frame f = stack_.back();
      stack_.pop_back();
      state_.rollback(f.mark);
      routes_.resize(f.routes);
      cells_.erase(f.node);
      unplaced_.insert(f.node);
    }
  }

  PlaceResult success() {
    Placement p;
    p.shape = shape_;
    p.graph = g_;
    p.cells = cells_;
    for (const Node &n : g_.nodes()) {
      if (n.kind == NodeKind::Input)
        p.inputs[n.id] = *state_.input_port_of(n.id);
      if (n.kind == NodeKind::Output)
        p.outputs[n.id] = *state_.output_port_of(n.id);
    }
    p.routes = routes_;
    p.config = state_.config();
    p.rng_seed = seed_;
    p.attempts = counters_;
    PlaceResult r;
    r.status = PlaceStatus::Placed;
    r.attempts = counters_;
    r.placement = std::move(p);
    return r;
  }

  const DataFlowGraph &g_;
  OverlayShape shape_;
  const PlacerParams &params_;
  Rng rng_;
  RoutingState state_;
  std::uint64_t seed_;
  std::set<NodeId> unplaced_;
  std::map<NodeId, Cell> cells_;
  std::vector<Frame> stack_;
  std::optional<NodeId> current_; // node being tentatively placed
  std::size_t best_depth_ = 0;
  std::uint64_t stalls_ = 0;
  static constexpr std::uint64_t kStallBacktracks = 8;
  std::vector<Route> routes_;
  std::vector<std::vector<Edge>> in_edges_, out_edges_;
  AttemptCounters counters_;
};

} // namespace

PlaceResult place_and_route(const DataFlowGraph &g, const OverlayShape &shape,
                            const PlacerParams &params, std::uint64_t seed) {
  if (shape.rows < 1 || shape.cols < 1)
    throw Error(ErrorCode::InvalidArgument, "overlay dimensions must be at least 1x1");
  if (auto v = validate_dfg(g); !v.empty())
    throw Error(ErrorCode::InvalidArgument, "invalid graph: " + v.front().message);
  if (params.max_position_attempts < 1 || params.max_node_restarts < 1 ||
      params.global_budget < 1 || params.sigma_for(shape) <= 0 || params.io_weight <= 0 ||
      params.affinity_bonus < 0 || (params.backtrack_max_depth && *params.backtrack_max_depth < 1))
    throw Error(ErrorCode::InvalidArgument, "placer parameters must be positive");
  const DataFlowGraph legal = legalize_for_overlay(g);
  const DfgStats st = dfg_stats(legal);
  const auto cells = static_cast<std::size_t>(shape.cell_count());
  const auto io = static_cast<std::size_t>(shape.io_capacity());
  if (st.calc_nodes > cells || st.inputs > io || st.outputs > io) {
    PlaceResult r;
    r.status = PlaceStatus::PreconditionViolated;
    r.message = std::to_string(st.calc_nodes) + " ops / " + std::to_string(st.inputs) +
                " inputs / " + std::to_string(st.outputs) + " outputs exceed the " +
                std::to_string(shape.rows) + "x" + std::to_string(shape.cols) +
                " overlay (" + std::to_string(cells) + " cells, " + std::to_string(io) +
                " stream ports per direction)";
    return r;
  }
  return Placer(legal, shape, params, seed).run();
}

OverlayConfig apply_placement(const Placement &p) {
  OverlayConfig cfg(p.shape);
  for (const auto &[node, cell] : p.cells) {
    const Node &n = p.graph.node(node);
    CellConfig &cc = cfg.cell(cell);
    cc.fu_op = n.code;
    for (const Edge &e : p.graph.in_edges(node))
      if (p.graph.node(e.src).kind == NodeKind::Const) {
        cc.mask = ConstMask{pin_for_port(n.code, e.dst_port), p.graph.node(e.src).value};
        break;
      }
  }
  for (const Route &r : p.routes) {
    for (const Hop &h : r.hops)
      cfg.cell(h.cell).out(h.out) = h.source;
    if (r.sink.kind == RouteSink::Kind::Pin)
      cfg.cell(r.sink.cell).sel(r.sink.pin) = in_sel(r.sink.side);
  }
  for (const auto &[node, port] : p.inputs)
    cfg.set_io(IoDir::In, port, static_cast<std::uint32_t>(idx(node)));
  for (const auto &[node, port] : p.outputs)
    cfg.set_io(IoDir::Out, port, static_cast<std::uint32_t>(idx(node)));
  return cfg;
}

namespace {

std::string port_text(const BorderPort &p) {
  return std::string(dir_name(p.side)) + std::to_string(border_index(p));
}

std::string cell_text(const Cell &c) {
  return std::to_string(c.row) + "," + std::to_string(c.col);
}

} // namespace

std::string placement_sidecar(const Placement &p) {
  std::ostringstream os;
  os << "placement 1\n";
  os << "shape " << p.shape.rows << "x" << p.shape.cols << "\n";
  os << "rng " << p.rng_algorithm << " seed " << p.rng_seed << "\n";
  os << "attempts iterations=" << p.attempts.iterations
     << " position_retries=" << p.attempts.position_retries
     << " node_restarts=" << p.attempts.node_restarts
     << " global_backtracks=" << p.attempts.global_backtracks << "\n";
  for (const auto &[node, cell] : p.cells)
    os << "node " << idx(node) << ' ' << opcode_name(p.graph.node(node).code) << " cell "
       << cell_text(cell) << "\n";
  for (const auto &[node, port] : p.inputs)
    os << "input " << idx(node) << ' ' << port_text(port) << "\n";
  for (const auto &[node, port] : p.outputs)
    os << "output " << idx(node) << ' ' << port_text(port) << "\n";
  for (const Route &r : p.routes) {
    os << "route " << idx(r.edge.src) << ':' << int(r.edge.src_port) << " -> "
       << idx(r.edge.dst) << ':' << int(r.edge.dst_port) << " from ";
    switch (r.source.kind) {
    case RouteSource::Kind::Fu: os << "fu " << cell_text(r.source.cell); break;
    case RouteSource::Kind::Arrival:
      os << "arrival " << cell_text(r.source.cell) << ' ' << dir_name(r.source.port);
      break;
    case RouteSource::Kind::FreeBorderInput:
      os << "border " << port_text(BorderPort{r.source.cell, r.source.port});
      break;
    }
    os << " hops";
    for (const Hop &h : r.hops)
      os << ' ' << cell_text(h.cell) << ':' << dir_name(h.out);
    if (r.sink.kind == RouteSink::Kind::Pin)
      os << " to " << cell_text(r.sink.cell) << ' ' << pin_name(r.sink.pin) << " via "
         << dir_name(r.sink.side);
    else
      os << " to border " << port_text(BorderPort{r.sink.cell, r.sink.side});
    os << "\n";
  }
  return os.str();
}

} // namespace dfe
