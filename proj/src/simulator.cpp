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

#include "dfe/simulator.hpp"

#include "dfe/error.hpp"

#include <algorithm>
#include <functional>

namespace dfe {

std::array<std::uint8_t, TaggedFrame::kBytes> TaggedFrame::encode() const {
  std::array<std::uint8_t, kBytes> b{};
  const auto v = static_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) {
    b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(tag >> (8 * i));
    b[static_cast<std::size_t>(4 + i)] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  return b;
}

TaggedFrame TaggedFrame::decode(std::span<const std::uint8_t, kBytes> b) {
  for (std::size_t i = 8; i < kBytes; ++i)
    if (b[i] != 0)
      throw Error(ErrorCode::Format, "frame padding is not zero");
  TaggedFrame f;
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    f.tag |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(4 + i)]) << (8 * i);
  }
  f.value = static_cast<std::int32_t>(v);
  return f;
}

std::vector<std::uint8_t> encode_frames(std::span<const TaggedFrame> frames) {
  std::vector<std::uint8_t> out;
  out.reserve(frames.size() * TaggedFrame::kBytes);
  for (const auto &f : frames) {
    const auto b = f.encode();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<TaggedFrame> decode_frames(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % TaggedFrame::kBytes != 0)
    throw Error(ErrorCode::Format, "stream dump is not a whole number of frames");
  std::vector<TaggedFrame> out;
  out.reserve(bytes.size() / TaggedFrame::kBytes);
  for (std::size_t at = 0; at < bytes.size(); at += TaggedFrame::kBytes)
    out.push_back(TaggedFrame::decode(bytes.subspan(at).first<TaggedFrame::kBytes>()));
  return out;
}

std::vector<TaggedFrame> interleave(std::span<const TaggedStream> streams) {
  std::vector<TaggedFrame> out;
  std::size_t longest = 0;
  for (const auto &s : streams)
    longest = std::max(longest, s.values.size());
  for (std::size_t k = 0; k < longest; ++k)
    for (const auto &s : streams)
      if (k < s.values.size())
        out.push_back(TaggedFrame{s.tag, s.values[k]});
  return out;
}

std::vector<TaggedStream> demultiplex(std::span<const TaggedFrame> frames) {
  std::map<std::uint32_t, std::vector<std::int32_t>> by_tag;
  for (const auto &f : frames)
    by_tag[f.tag].push_back(f.value);
  std::vector<TaggedStream> out;
  for (auto &[tag, values] : by_tag)
    out.push_back(TaggedStream{tag, std::move(values)});
  return out;
}

// ---------------------------------------------------------------------------
// Streams over the iteration domain

namespace {

std::int64_t positions(const std::vector<std::int64_t> &trips) {
  std::int64_t n = 1;
  for (auto t : trips)
    n *= t;
  return trips.empty() ? 0 : n;
}

/// Calls `fn(env)` for every steady-state position in row-major order, with
/// the innermost variable mapped through `lane`.
void for_each_position(const DataFlowGraph &g, const Env &params, const Lane &lane,
                       const std::function<void(const Env &)> &fn) {
  const auto trips = steady_trip_counts(g, params);
  if (positions(trips) == 0)
    return;
  Env env = params;
  std::vector<std::int64_t> it(trips.size(), 0);
  const std::size_t inner = trips.size() - 1;
  for (;;) {
    for (std::size_t d = 0; d < trips.size(); ++d)
      env.insert_or_assign(g.domain[d].var,
                           d == inner ? lane.stride * it[d] + lane.offset : it[d]);
    fn(env);
    std::size_t d = trips.size();
    while (d > 0) {
      --d;
      if (++it[d] < trips[d])
        break;
      it[d] = 0;
      if (d == 0)
        return;
    }
  }
}

std::vector<std::int64_t> element_index(const AccessFunction &access, const Env &env) {
  std::vector<std::int64_t> index;
  index.reserve(access.size());
  for (const auto &e : access)
    index.push_back(e.evaluate(env));
  return index;
}

const ArrayData &find_array(const ArrayStore &arrays, const std::string &name) {
  auto it = arrays.find(name);
  if (it == arrays.end())
    throw Error(ErrorCode::OutOfBounds, "array '" + name + "' is not allocated");
  return it->second;
}

} // namespace

std::vector<std::int64_t> steady_trip_counts(const DataFlowGraph &g, const Env &params) {
  std::vector<std::int64_t> trips;
  for (const auto &d : g.domain)
    trips.push_back(std::max<std::int64_t>(0, d.bound.evaluate(params)));
  if (!trips.empty())
    trips.back() /= g.unroll;
  return trips;
}

std::int64_t remainder_iterations(const DataFlowGraph &g, const Env &params) {
  if (g.domain.empty())
    return 0;
  return std::max<std::int64_t>(0, g.domain.back().bound.evaluate(params)) % g.unroll;
}

StreamSet build_streams(const DataFlowGraph &g, const ArrayStore &arrays, const Env &params) {
  StreamSet set;
  set.length = static_cast<std::size_t>(positions(steady_trip_counts(g, params)));
  for (const Node &n : g.nodes()) {
    if (n.kind == NodeKind::Const)
      set.constants.push_back(
          TaggedFrame{kConstTagBase + static_cast<std::uint32_t>(idx(n.id)), n.value});
    if (n.kind != NodeKind::Input)
      continue;
    const IoBinding *b = g.binding(n.id);
    if (!b)
      throw Error(ErrorCode::InvalidArgument, "input without a binding");
    TaggedStream s{static_cast<std::uint32_t>(idx(n.id)), {}};
    s.values.reserve(set.length);
    if (b->access.empty()) {
      auto it = params.find(b->array);
      if (it == params.end())
        throw Error(ErrorCode::UnknownIdentifier, "no value for scalar '" + b->array + "'");
      s.values.assign(set.length, static_cast<std::int32_t>(it->second));
    } else {
      const ArrayData &a = find_array(arrays, b->array);
      for_each_position(g, params, b->lane, [&](const Env &env) {
        s.values.push_back(a.values[a.offset(element_index(b->access, env))]);
      });
    }
    set.inputs.push_back(std::move(s));
  }
  return set;
}

// ---------------------------------------------------------------------------
// Overlay evaluation

namespace {

/// Signal network of a configuration: per cell 4 inputs, 4 outputs, 1 FU.
struct Network {
  explicit Network(const OverlayConfig &cfg) : cfg(cfg), shape(cfg.shape()) {
    const std::size_t n = static_cast<std::size_t>(shape.cell_count()) * 9;
    preds.resize(n);
    for (int i = 0; i < shape.cell_count(); ++i) {
      const Cell c = shape.cell_at(static_cast<std::size_t>(i));
      const CellConfig &cc = cfg.cell(c);
      for (Dir d : kAllDirs) {
        if (auto nb = shape.neighbor(c, d))
          preds[in_node(c, d)] = {out_node(*nb, opposite(d))};
        const OutSel o = cc.out(d);
        if (o == OutSel::Fu)
          preds[out_node(c, d)] = {fu_node(c)};
        else if (out_is_input(o))
          preds[out_node(c, d)] = {in_node(c, static_cast<Dir>(o))};
      }
      for (InSel s : cc.pin_sel)
        if (static_cast<std::uint8_t>(s) < 4)
          preds[fu_node(c)].push_back(in_node(c, sel_dir(s)));
    }
    // Kahn over the (acyclic) signal graph.
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<int> indeg(n, 0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t p : preds[v]) {
        succ[p].push_back(v);
        ++indeg[v];
      }
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
      if (indeg[v] == 0)
        ready.push_back(v);
    while (!ready.empty()) {
      const std::size_t v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (std::size_t s : succ[v])
        if (--indeg[s] == 0)
          ready.push_back(s);
    }
    if (order.size() != n)
      throw Error(ErrorCode::InvalidConfig, "routing cycle");
    // Longest chain of claimed outputs feeding each signal.
    depth.assign(n, 0);
    for (std::size_t v : order) {
      int d = 0;
      for (std::size_t p : preds[v])
        d = std::max(d, depth[p]);
      depth[v] = d + (v % 9 >= 4 && v % 9 < 8 && !preds[v].empty() ? 1 : 0);
    }
  }

  std::size_t in_node(Cell c, Dir d) const { return shape.index(c) * 9 + static_cast<std::size_t>(d); }
  std::size_t out_node(Cell c, Dir d) const {
    return shape.index(c) * 9 + 4 + static_cast<std::size_t>(d);
  }
  std::size_t fu_node(Cell c) const { return shape.index(c) * 9 + 8; }

  const OverlayConfig &cfg;
  OverlayShape shape;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::size_t> order;
  std::vector<int> depth;
};

} // namespace

RunReport run(const OverlayConfig &cfg, std::span<const TaggedStream> inputs,
              std::optional<std::size_t> length) {
  if (auto v = validate_config(cfg); !v.empty())
    throw Error(ErrorCode::InvalidConfig, "invalid configuration at (" +
                                              std::to_string(v.front().cell.row) + "," +
                                              std::to_string(v.front().cell.col) + ") " +
                                              v.front().port + ": " + v.front().message);
  std::size_t len = length.value_or(inputs.empty() ? 0 : inputs.front().values.size());
  std::map<BorderPort, const std::vector<std::int32_t> *> feeds;
  for (const auto &s : inputs) {
    const auto port = cfg.find_tag(IoDir::In, s.tag);
    if (!port)
      throw Error(ErrorCode::UnconfiguredTag,
                  "tag " + std::to_string(s.tag) + " has no stream input");
    if (s.values.size() != len)
      throw Error(ErrorCode::LengthMismatch,
                  "stream " + std::to_string(s.tag) + " has " + std::to_string(s.values.size()) +
                      " values, expected " + std::to_string(len));
    if (!feeds.emplace(*port, &s.values).second)
      throw Error(ErrorCode::InvalidArgument, "tag " + std::to_string(s.tag) + " supplied twice");
  }
  for (const auto &e : cfg.io_map())
    if (e.dir == IoDir::In && !feeds.count(e.port) && len > 0)
      throw Error(ErrorCode::InvalidArgument,
                  "no stream supplied for input tag " + std::to_string(e.tag));

  const Network net(cfg);
  const OverlayShape &shape = cfg.shape();
  RunReport rep;
  std::vector<std::pair<std::uint32_t, std::size_t>> sinks; // tag, out node
  for (const auto &e : cfg.io_map())
    if (e.dir == IoDir::Out) {
      sinks.emplace_back(e.tag, net.out_node(e.port.cell, e.port.side));
      rep.outputs[e.tag].reserve(len);
      rep.route_depth = std::max(rep.route_depth, net.depth[sinks.back().second]);
    }

  std::vector<std::int32_t> value(net.preds.size(), 0);
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t v : net.order) {
      const std::size_t kind = v % 9;
      const Cell c = shape.cell_at(v / 9);
      const auto &pr = net.preds[v];
      if (kind < 4) {
        if (!pr.empty()) {
          value[v] = value[pr[0]];
        } else {
          auto it = feeds.find(BorderPort{c, static_cast<Dir>(kind)});
          value[v] = it != feeds.end() ? (*it->second)[pos] : 0;
        }
      } else if (kind < 8) {
        value[v] = pr.empty() ? 0 : value[pr[0]];
      } else {
        const CellConfig &cc = cfg.cell(c);
        if (!cc.fu_op)
          continue;
        auto pin = [&](Pin p) -> std::int32_t {
          if (cc.mask && cc.mask->pin == p)
            return cc.mask->value;
          const InSel s = cc.sel(p);
          return s == InSel::Unconnected ? 0 : value[net.in_node(c, sel_dir(s))];
        };
        value[v] = apply_op(*cc.fu_op, pin(Pin::In1), pin(Pin::In2), pin(Pin::Sel));
      }
    }
    for (const auto &[tag, node] : sinks)
      rep.outputs[tag].push_back(value[node]);
  }
  rep.frames_in = static_cast<std::uint64_t>(len) * feeds.size();
  rep.frames_out = static_cast<std::uint64_t>(len) * sinks.size();
  rep.bytes_on_wire = TaggedFrame::kBytes * (rep.frames_in + rep.frames_out);
  rep.cycles = len == 0 ? 0 : static_cast<std::uint64_t>(rep.route_depth) + len;
  return rep;
}

RunReport run_frames(const OverlayConfig &cfg, std::span<const TaggedFrame> frames) {
  std::vector<TaggedFrame> data;
  for (const auto &f : frames)
    if (f.tag < kConstTagBase)
      data.push_back(f);
  const auto streams = demultiplex(data);
  return run(cfg, streams);
}

std::vector<TaggedFrame> output_frames(const RunReport &report) {
  std::vector<TaggedStream> streams;
  for (const auto &[tag, values] : report.outputs)
    streams.push_back(TaggedStream{tag, values});
  return interleave(streams);
}

void write_back(const DataFlowGraph &g, const RunReport &report, ArrayStore &arrays,
                const Env &params) {
  const auto len = static_cast<std::size_t>(positions(steady_trip_counts(g, params)));
  for (const Node &n : g.nodes()) {
    if (n.kind != NodeKind::Output)
      continue;
    const IoBinding *b = g.binding(n.id);
    auto it = report.outputs.find(static_cast<std::uint32_t>(idx(n.id)));
    const std::size_t have = it == report.outputs.end() ? 0 : it->second.size();
    if (have == 0 && (len == 0 || report.outputs.empty()))
      continue; // zero-length report
    if (have != len)
      throw Error(ErrorCode::LengthMismatch,
                  "output " + std::to_string(idx(n.id)) + " has " + std::to_string(have) +
                      " values, expected " + std::to_string(len));
    auto ait = arrays.find(b->array);
    if (ait == arrays.end())
      throw Error(ErrorCode::OutOfBounds, "array '" + b->array + "' is not allocated");
    ArrayData &a = ait->second;
    std::size_t k = 0;
    for_each_position(g, params, b->lane, [&](const Env &env) {
      a.values[a.offset(element_index(b->access, env))] = it->second[k++];
    });
  }
}

} // namespace dfe
