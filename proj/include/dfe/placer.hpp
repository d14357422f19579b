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

// Stochastic (Las Vegas) place & route of a data flow graph onto the overlay.
//
// Nodes are placed one at a time. A node is drawn with a bias towards nodes
// touching stream I/O, a cell is drawn with a weight that grows towards the
// border and near related nodes, then every edge to an already-placed
// neighbour (or to a stream interface) is routed with a shortest-path search
// from all the places the value is already available. Failures undo the
// tentative position; repeated failures switch node; running out of
// placeable nodes undoes a random number of earlier placements.

#pragma once

#include "dfe/dfg.hpp"
#include "dfe/overlay.hpp"
#include "dfe/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfe {

struct PlacerParams {
  /// Width of the centre-peaked Gaussian, in cells; default min(R,C)/4.
  std::optional<double> sigma;
  double affinity_bonus = 4.0;
  /// Selection weight of nodes wired to an Input/Output node (others: 1).
  double io_weight = 4.0;
  int max_position_attempts = 10;
  int max_node_restarts = 5;
  /// Default: a quarter of the placed nodes, at least 1.
  std::optional<int> backtrack_max_depth;
  std::uint64_t global_budget = 100000;

  double sigma_for(const OverlayShape &shape) const;
};

struct AttemptCounters {
  std::uint64_t iterations = 0;
  std::uint64_t position_retries = 0;
  std::uint64_t node_restarts = 0;
  std::uint64_t global_backtracks = 0;

  friend bool operator==(const AttemptCounters &, const AttemptCounters &) = default;
};

/// Where a route may start.
struct RouteSource {
  enum class Kind {
    Fu,              // FU output of `cell`
    Arrival,         // the value already enters `cell` through input `port`
    FreeBorderInput, // unclaimed stream input on face `port` of `cell`
  };
  Kind kind = Kind::Fu;
  Cell cell;
  Dir port = Dir::N;

  friend bool operator==(const RouteSource &, const RouteSource &) = default;
};

/// Where a route may end.
struct RouteSink {
  enum class Kind {
    Pin,          // FU pin `pin` of `cell`; `side` receives the chosen input
    BorderOutput, // stream output on face `side` of `cell`
  };
  Kind kind = Kind::Pin;
  Cell cell;
  Pin pin = Pin::In1;
  Dir side = Dir::N;

  friend bool operator==(const RouteSink &, const RouteSink &) = default;
};

struct Hop {
  Cell cell;
  Dir out = Dir::N;
  OutSel source = OutSel::Fu;

  friend bool operator==(const Hop &, const Hop &) = default;
};

struct Route {
  Edge edge;
  RouteSource source;
  std::vector<Hop> hops;
  RouteSink sink;

  friend bool operator==(const Route &, const Route &) = default;
};

/// Overlay under construction: configuration plus ownership of every
/// routing resource, with a journal for transactional rollback.
class RoutingState {
public:
  explicit RoutingState(OverlayShape shape);

  const OverlayShape &shape() const { return cfg_.shape(); }
  const OverlayConfig &config() const { return cfg_; }

  std::optional<NodeId> fu_node(Cell c) const;
  /// Value carried by output `d` of `c`.
  std::optional<NodeId> out_value(Cell c, Dir d) const;
  /// Value entering `c` through input `d`.
  std::optional<NodeId> input_value(Cell c, Dir d) const;
  std::optional<BorderPort> input_port_of(NodeId value) const;
  std::optional<BorderPort> output_port_of(NodeId output) const;

  /// Every place `value` is available: its FU and all inputs it reaches.
  std::vector<RouteSource> sites(NodeId value) const;
  std::vector<RouteSource> free_border_inputs() const;
  std::vector<RouteSink> free_border_outputs() const;
  std::vector<Cell> free_cells() const;

  void place_fu(Cell c, NodeId node, OpCode code, std::optional<ConstMask> mask);
  void claim_border_input(BorderPort port, NodeId value);
  /// Ties an output node's tag to a stream output port already driven.
  void claim_border_output(BorderPort port, NodeId output);
  void claim_out(Cell c, Dir d, OutSel source, NodeId value);
  void select_pin(Cell c, Pin pin, Dir input);

  std::size_t mark() const { return journal_.size(); }
  void rollback(std::size_t mark);

private:
  struct JournalEntry {
    enum class Kind { Cell, Fu, Out, BorderIn, InputPort, OutputPort, Io };
    Kind kind = Kind::Cell;
    std::size_t index = 0;
    CellConfig old_cell;
    std::optional<NodeId> old_value;
    std::optional<BorderPort> old_port;
    std::optional<std::uint32_t> old_tag;
    NodeId node{};
  };

  std::size_t out_index(Cell c, Dir d) const {
    return shape().index(c) * 4 + static_cast<std::size_t>(d);
  }
  void save_cell(Cell c);
  void set_slot(JournalEntry::Kind kind, std::size_t i, std::optional<NodeId> value);
  void set_port(JournalEntry::Kind kind, NodeId node, BorderPort port);
  void set_io(IoDir dir, BorderPort port, std::uint32_t tag);

  OverlayConfig cfg_;
  std::vector<std::optional<NodeId>> fu_;        // per cell
  std::vector<std::optional<NodeId>> out_;       // per cell * 4 + dir
  std::vector<std::optional<NodeId>> border_in_; // per border port index
  std::map<NodeId, BorderPort> input_ports_;
  std::map<NodeId, BorderPort> output_ports_;
  std::vector<BorderPort> borders_;
  std::vector<JournalEntry> journal_;
};

/// Resources a route must not take from placed nodes that still have
/// unrouted edges, indexed by cell.
struct RouteGuard {
  enum class Exit : std::uint8_t { None, Interior, Any };
  /// The FU value has unrouted consumers and no output carrying it yet:
  /// keep one free output (Interior: one towards a neighbour).
  std::vector<Exit> exit;
  /// Values the cell's unconnected pins wait for; `pending` of them are
  /// unplaced and need a free neighbour-driven input each.
  std::vector<std::vector<NodeId>> awaited;
  std::vector<int> pending;
};

/// Shortest path (one unit per claimed cell output) from the nearest of
/// `origins` to the nearest of `sinks`, over free resources only and, with
/// a guard, without starving the guarded cells. Ties go to the lower port
/// (N<E<S<W), then the lower cell. Claims the path, including a
/// FreeBorderInput start, on success; throws Error(NoPath) otherwise.
Route route_edge(RoutingState &state, NodeId value,
                 std::span<const RouteSource> origins,
                 std::span<const RouteSink> sinks,
                 const RouteGuard *guard = nullptr);

/// True for Op nodes fed by an Input node or feeding an Output node.
bool is_io_adjacent(const DataFlowGraph &g, NodeId node);

NodeId select_node(const DataFlowGraph &g, std::span<const NodeId> unplaced,
                   double io_weight, Rng &rng);

/// Unnormalized sampling weight of cell `p`.
double position_weight(Cell p, std::span<const Cell> related,
                       const OverlayShape &shape, const PlacerParams &params);

Cell sample_position(std::span<const Cell> free_cells,
                     std::span<const Cell> related, const OverlayShape &shape,
                     const PlacerParams &params, Rng &rng);

struct Placement {
  OverlayShape shape;
  DataFlowGraph graph; // the legalized graph that was mapped
  std::map<NodeId, Cell> cells;
  std::map<NodeId, BorderPort> inputs;
  std::map<NodeId, BorderPort> outputs;
  std::vector<Route> routes;
  OverlayConfig config;
  std::uint64_t rng_seed = 0;
  std::string rng_algorithm = Rng::kAlgorithm;
  AttemptCounters attempts;
};

enum class PlaceStatus { Placed, Unroutable, PreconditionViolated };

const char *place_status_name(PlaceStatus s);

struct PlaceResult {
  PlaceStatus status = PlaceStatus::Unroutable;
  std::optional<Placement> placement;
  AttemptCounters attempts;
  std::string message;

  bool ok() const { return status == PlaceStatus::Placed; }
};

/// Stream tags are the ids of the Input/Output nodes.
PlaceResult place_and_route(const DataFlowGraph &g, const OverlayShape &shape,
                            const PlacerParams &params, std::uint64_t seed);

/// Rebuilds the overlay configuration from the placement's node
/// assignment, routes and constants alone.
OverlayConfig apply_placement(const Placement &p);

/// Node-to-cell map, routes and attempt counters as text.
std::string placement_sidecar(const Placement &p);

} // namespace dfe
