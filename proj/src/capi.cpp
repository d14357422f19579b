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

#include "dfe/dfe.h"

#include "dfe/error.hpp"
#include "dfe/frontend.hpp"
#include "dfe/kernel.hpp"
#include "dfe/overlay.hpp"
#include "dfe/placer.hpp"
#include "dfe/rng.hpp"
#include "dfe/runtime.hpp"
#include "dfe/simulator.hpp"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

struct dfe_kernel {
  dfe::Kernel kernel;
};
struct dfe_dfg {
  dfe::DataFlowGraph graph;
};
struct dfe_config {
  dfe::OverlayConfig config;
};
struct dfe_placement {
  dfe::Placement placement;
};
struct dfe_arrays {
  dfe::ArrayStore store;
};
struct dfe_runtime {
  explicit dfe_runtime(dfe::RuntimeConfig cfg) : runtime(std::move(cfg)) {}
  dfe::Runtime runtime;
};

namespace {

struct LastError {
  std::string message;
  int line = 0;
  int column = 0;
};

thread_local LastError last_error;

/// Runs `fn`, converting exceptions into a status and the thread's last error.
template <typename F> dfe_status guarded(F &&fn) {
  last_error = {};
  try {
    fn();
    return DFE_OK;
  } catch (const dfe::SourceError &e) {
    last_error = {e.what(), e.line(), e.column()};
    return static_cast<dfe_status>(e.code());
  } catch (const dfe::Error &e) {
    last_error.message = e.what();
    return static_cast<dfe_status>(e.code());
  } catch (const std::bad_alloc &) {
    last_error.message = "out of memory";
    return DFE_ERR_INTERNAL;
  } catch (const std::exception &e) {
    last_error.message = e.what();
    return DFE_ERR_INTERNAL;
  }
}

void require(bool ok, const char *what) {
  if (!ok)
    throw dfe::Error(dfe::ErrorCode::InvalidArgument, std::string(what));
}

char *dup_string(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

void give_buffer(const std::vector<std::uint8_t> &bytes, uint8_t **buf, size_t *length) {
  require(buf && length, "null output buffer");
  auto *p = static_cast<uint8_t *>(std::malloc(bytes.empty() ? 1 : bytes.size()));
  if (!p)
    throw std::bad_alloc();
  if (!bytes.empty())
    std::memcpy(p, bytes.data(), bytes.size());
  *buf = p;
  *length = bytes.size();
}

dfe::Env to_env(const dfe_params *params) {
  dfe::Env env;
  if (!params)
    return env;
  require(params->count == 0 || (params->names && params->values), "null parameter arrays");
  for (size_t i = 0; i < params->count; ++i) {
    require(params->names[i] != nullptr, "null parameter name");
    env.insert_or_assign(params->names[i], params->values[i]);
  }
  return env;
}

dfe_stats to_c(const dfe::DfgStats &s) {
  return dfe_stats{s.inputs, s.outputs, s.calc_nodes, s.consts};
}

dfe::DfgStats from_c(const dfe_stats &s) {
  dfe::DfgStats d;
  d.inputs = s.inputs;
  d.outputs = s.outputs;
  d.calc_nodes = s.calc_nodes;
  d.consts = s.consts;
  return d;
}

dfe_run_report to_c(const dfe::RunReport &r) {
  return dfe_run_report{r.frames_in, r.frames_out, r.cycles, r.bytes_on_wire, r.route_depth};
}

dfe::PlacerParams from_c(const dfe_placer_params &p) {
  dfe::PlacerParams q;
  if (p.sigma > 0)
    q.sigma = p.sigma;
  q.affinity_bonus = p.affinity_bonus;
  q.io_weight = p.io_weight;
  q.max_position_attempts = p.max_position_attempts;
  q.max_node_restarts = p.max_node_restarts;
  if (p.backtrack_max_depth > 0)
    q.backtrack_max_depth = p.backtrack_max_depth;
  q.global_budget = p.global_budget;
  return q;
}

dfe::RuntimeConfig from_c(const dfe_runtime_config &c) {
  require(c.rows >= 1 && c.cols >= 1, "overlay must have at least one cell");
  dfe::RuntimeConfig r;
  r.shape = dfe::OverlayShape{c.rows, c.cols};
  r.thresholds.min_calc_nodes = c.min_calc_nodes;
  r.thresholds.max_calc_nodes =
      c.max_calc_nodes ? c.max_calc_nodes
                       : static_cast<std::size_t>(c.rows) * static_cast<std::size_t>(c.cols);
  r.unroll = c.unroll;
  r.placer = from_c(c.placer);
  r.seed = c.seed;
  r.cost.wire_rate = c.wire_rate;
  r.cost.frame_overhead_factor = c.frame_overhead_factor;
  r.cost.config_time = c.config_time;
  r.cost.const_transfer_time = c.const_transfer_time;
  r.cost.software_time_per_call = c.software_time_per_call;
  r.policy.margin = c.margin;
  r.policy.ema_alpha = c.ema_alpha;
  r.policy.warmup_calls = c.warmup_calls;
  r.cache_capacity = c.cache_capacity;
  switch (c.mode) {
  case DFE_MODE_ADAPTIVE: r.mode = dfe::OffloadMode::Adaptive; break;
  case DFE_MODE_EAGER: r.mode = dfe::OffloadMode::Eager; break;
  case DFE_MODE_SOFTWARE_ONLY: r.mode = dfe::OffloadMode::SoftwareOnly; break;
  default: require(false, "unknown offload mode");
  }
  return r;
}

void store_cost(dfe_runtime_config &c, const dfe::CostModel &m, const dfe::DecisionPolicy &p) {
  c.wire_rate = m.wire_rate;
  c.frame_overhead_factor = m.frame_overhead_factor;
  c.config_time = m.config_time;
  c.const_transfer_time = m.const_transfer_time;
  c.software_time_per_call = m.software_time_per_call;
  c.margin = p.margin;
  c.ema_alpha = p.ema_alpha;
  c.warmup_calls = p.warmup_calls;
}

void load_cost(const dfe_runtime_config &c, dfe::CostModel &m, dfe::DecisionPolicy &p) {
  m.wire_rate = c.wire_rate;
  m.frame_overhead_factor = c.frame_overhead_factor;
  m.config_time = c.config_time;
  m.const_transfer_time = c.const_transfer_time;
  m.software_time_per_call = c.software_time_per_call;
  p.margin = c.margin;
  p.ema_alpha = c.ema_alpha;
  p.warmup_calls = c.warmup_calls;
}

} // namespace

extern "C" {

const char *dfe_version(void) { return "1.0.0"; }

const char *dfe_status_name(dfe_status status) {
  if (status == DFE_OK)
    return "Ok";
  return dfe::error_code_name(static_cast<dfe::ErrorCode>(status));
}

const char *dfe_last_error_message(void) { return last_error.message.c_str(); }
int dfe_last_error_line(void) { return last_error.line; }
int dfe_last_error_column(void) { return last_error.column; }
void dfe_string_free(char *s) { std::free(s); }
void dfe_buffer_free(uint8_t *buf) { std::free(buf); }

// ---- kernels

dfe_status dfe_kernel_parse(const char *source, size_t length, dfe_kernel **out) {
  return guarded([&] {
    require(out && (source || length == 0), "null argument");
    *out = nullptr;
    auto k = std::make_unique<dfe_kernel>();
    k->kernel = dfe::parse_kernel(std::string_view(source ? source : "", length));
    *out = k.release();
  });
}

dfe_status dfe_kernel_load(const char *path, dfe_kernel **out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throw dfe::Error(dfe::ErrorCode::Io, std::string("cannot open ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    auto k = std::make_unique<dfe_kernel>();
    k->kernel = dfe::parse_kernel(ss.str());
    *out = k.release();
  });
}

void dfe_kernel_free(dfe_kernel *k) { delete k; }

dfe_status dfe_kernel_name(const dfe_kernel *k, char **out) {
  return guarded([&] {
    require(k && out, "null argument");
    *out = dup_string(k->kernel.name);
  });
}

dfe_status dfe_kernel_print(const dfe_kernel *k, char **out) {
  return guarded([&] {
    require(k && out, "null argument");
    *out = dup_string(dfe::print_kernel(k->kernel));
  });
}

size_t dfe_kernel_param_count(const dfe_kernel *k) { return k ? k->kernel.params.size() : 0; }

const char *dfe_kernel_param_name(const dfe_kernel *k, size_t i) {
  if (!k || i >= k->kernel.params.size())
    return nullptr;
  return k->kernel.params[i].c_str();
}

// ---- eligibility

const char *dfe_reason_name(dfe_reason reason) {
  return dfe::reason_name(static_cast<dfe::RejectReason>(reason));
}

const char *dfe_reason_label(dfe_reason reason) {
  return dfe::reason_label(static_cast<dfe::RejectReason>(reason));
}

dfe_status dfe_check_eligibility(const dfe_kernel *k, const dfe_thresholds *t,
                                 dfe_eligibility *out, char **detail) {
  return guarded([&] {
    require(k && t && out, "null argument");
    dfe::Thresholds th;
    th.min_calc_nodes = t->min_calc_nodes;
    if (t->max_calc_nodes)
      th.max_calc_nodes = t->max_calc_nodes;
    const auto rep = dfe::check_eligibility(k->kernel, th);
    *out = dfe_eligibility{};
    out->accepted = rep.verdict == dfe::Verdict::Accepted;
    out->reason = static_cast<dfe_reason>(rep.reason);
    out->has_stats = rep.dfg_stats.has_value();
    if (rep.dfg_stats)
      out->stats = to_c(*rep.dfg_stats);
    if (detail)
      *detail = dup_string(rep.detail);
  });
}

// ---- graphs

dfe_status dfe_extract_dfg(const dfe_kernel *k, int64_t unroll, size_t max_calc_nodes,
                           dfe_dfg **out) {
  return guarded([&] {
    require(k && out, "null argument");
    *out = nullptr;
    dfe::ExtractOptions opts;
    opts.unroll = unroll;
    if (max_calc_nodes)
      opts.max_calc_nodes = max_calc_nodes;
    auto g = std::make_unique<dfe_dfg>();
    g->graph = dfe::extract_dfg(k->kernel, opts);
    *out = g.release();
  });
}

void dfe_dfg_free(dfe_dfg *g) { delete g; }

dfe_status dfe_dfg_fold_params(dfe_dfg *g, const dfe_params *params) {
  return guarded([&] {
    require(g, "null argument");
    const dfe::Env env = to_env(params);
    std::map<dfe::NodeId, std::int32_t> known;
    for (dfe::NodeId id : g->graph.nodes_of(dfe::NodeKind::Input)) {
      const dfe::IoBinding *b = g->graph.binding(id);
      if (b && b->access.empty()) {
        auto it = env.find(b->array);
        if (it == env.end())
          throw dfe::Error(dfe::ErrorCode::UnknownIdentifier,
                           "no value for parameter '" + b->array + "'");
        known.emplace(id, static_cast<std::int32_t>(it->second));
      }
    }
    if (!known.empty())
      g->graph = dfe::fold_inputs_to_constants(g->graph, known);
  });
}

dfe_status dfe_dfg_stats(const dfe_dfg *g, dfe_stats *out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = to_c(dfe::dfg_stats(g->graph));
  });
}

dfe_status dfe_dfg_hash(const dfe_dfg *g, uint64_t *out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = dfe::dfg_hash(g->graph);
  });
}

dfe_status dfe_dfg_to_text(const dfe_dfg *g, char **out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = dup_string(dfe::dfg_to_text(g->graph));
  });
}

dfe_status dfe_dfg_from_text(const char *text, size_t length, dfe_dfg **out) {
  return guarded([&] {
    require(out && (text || length == 0), "null argument");
    *out = nullptr;
    auto g = std::make_unique<dfe_dfg>();
    g->graph = dfe::dfg_from_text(std::string_view(text ? text : "", length));
    *out = g.release();
  });
}

dfe_status dfe_dfg_to_dot(const dfe_dfg *g, char **out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = dup_string(dfe::dfg_to_dot(g->graph));
  });
}

dfe_status dfe_dfg_iterations(const dfe_dfg *g, const dfe_params *params, uint64_t *steady,
                              int64_t *remainder) {
  return guarded([&] {
    require(g && steady && remainder, "null argument");
    const dfe::Env env = to_env(params);
    const auto trips = dfe::steady_trip_counts(g->graph, env);
    std::uint64_t n = trips.empty() ? 0 : 1;
    for (auto t : trips)
      n *= static_cast<std::uint64_t>(t);
    *steady = n;
    *remainder = dfe::remainder_iterations(g->graph, env);
  });
}

// ---- place & route

void dfe_placer_params_default(dfe_placer_params *out) {
  if (!out)
    return;
  const dfe::PlacerParams p;
  *out = dfe_placer_params{0,
                           p.affinity_bonus,
                           p.io_weight,
                           p.max_position_attempts,
                           p.max_node_restarts,
                           0,
                           p.global_budget};
}

dfe_status dfe_place(const dfe_dfg *g, int rows, int cols, const dfe_placer_params *params,
                     uint64_t seed, dfe_placement **out, dfe_attempts *attempts) {
  dfe_status st = DFE_OK;
  const dfe_status thrown = guarded([&] {
    require(g && out, "null argument");
    require(rows >= 1 && cols >= 1, "overlay must have at least one cell");
    *out = nullptr;
    dfe_placer_params defaults;
    dfe_placer_params_default(&defaults);
    auto res = dfe::place_and_route(g->graph, dfe::OverlayShape{rows, cols},
                                    from_c(params ? *params : defaults), seed);
    if (attempts)
      *attempts = dfe_attempts{res.attempts.iterations, res.attempts.position_retries,
                               res.attempts.node_restarts, res.attempts.global_backtracks};
    if (res.ok()) {
      auto p = std::make_unique<dfe_placement>();
      p->placement = std::move(*res.placement);
      *out = p.release();
      return;
    }
    st = res.status == dfe::PlaceStatus::Unroutable ? DFE_ERR_UNROUTABLE
                                                     : DFE_ERR_PRECONDITION_VIOLATED;
    last_error.message = res.message;
  });
  return thrown != DFE_OK ? thrown : st;
}

void dfe_placement_free(dfe_placement *p) { delete p; }

dfe_status dfe_placement_config(const dfe_placement *p, dfe_config **out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = new dfe_config{p->placement.config};
  });
}

dfe_status dfe_placement_sidecar(const dfe_placement *p, char **out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = dup_string(dfe::placement_sidecar(p->placement));
  });
}

dfe_status dfe_placement_graph(const dfe_placement *p, dfe_dfg **out) {
  return guarded([&] {
    require(p && out, "null argument");
    *out = new dfe_dfg{p->placement.graph};
  });
}

// ---- configurations

void dfe_config_free(dfe_config *c) { delete c; }

dfe_status dfe_config_shape(const dfe_config *c, int *rows, int *cols) {
  return guarded([&] {
    require(c && rows && cols, "null argument");
    *rows = c->config.shape().rows;
    *cols = c->config.shape().cols;
  });
}

dfe_status dfe_config_serialize(const dfe_config *c, uint8_t **buf, size_t *length) {
  return guarded([&] {
    require(c, "null argument");
    give_buffer(dfe::serialize_config(c->config), buf, length);
  });
}

dfe_status dfe_config_deserialize(const uint8_t *buf, size_t length, dfe_config **out) {
  return guarded([&] {
    require(out && (buf || length == 0), "null argument");
    *out = nullptr;
    *out = new dfe_config{
        dfe::deserialize_config(std::span<const std::uint8_t>(buf, length))};
  });
}

dfe_status dfe_config_validate(const dfe_config *c, size_t *violations, char **report) {
  return guarded([&] {
    require(c && violations, "null argument");
    const auto v = dfe::validate_config(c->config);
    *violations = v.size();
    if (report) {
      std::string text;
      for (const auto &x : v)
        text += "(" + std::to_string(x.cell.row) + "," + std::to_string(x.cell.col) + ") " +
                x.port + ": " + x.message + "\n";
      *report = dup_string(text);
    }
  });
}

dfe_status dfe_config_to_text(const dfe_config *c, char **out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup_string(dfe::config_to_text(c->config));
  });
}

dfe_status dfe_config_to_dot(const dfe_config *c, char **out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = dup_string(dfe::config_to_dot(c->config));
  });
}

// ---- arrays

dfe_status dfe_arrays_allocate(const dfe_kernel *k, const dfe_params *params, dfe_arrays **out) {
  return guarded([&] {
    require(k && out, "null argument");
    *out = nullptr;
    *out = new dfe_arrays{dfe::allocate_arrays(k->kernel, to_env(params))};
  });
}

dfe_status dfe_arrays_clone(const dfe_arrays *a, dfe_arrays **out) {
  return guarded([&] {
    require(a && out, "null argument");
    *out = new dfe_arrays{a->store};
  });
}

void dfe_arrays_free(dfe_arrays *a) { delete a; }

size_t dfe_arrays_count(const dfe_arrays *a) { return a ? a->store.size() : 0; }

const char *dfe_arrays_name(const dfe_arrays *a, size_t i) {
  if (!a || i >= a->store.size())
    return nullptr;
  return std::next(a->store.begin(), static_cast<std::ptrdiff_t>(i))->first.c_str();
}

dfe_status dfe_arrays_data(dfe_arrays *a, const char *name, int32_t **data, size_t *length) {
  return guarded([&] {
    require(a && name && data && length, "null argument");
    auto it = a->store.find(std::string_view(name));
    if (it == a->store.end())
      throw dfe::Error(dfe::ErrorCode::InvalidArgument, std::string("no array ") + name);
    *data = it->second.values.data();
    *length = it->second.values.size();
  });
}

dfe_status dfe_arrays_fill_random(dfe_arrays *a, uint64_t seed, int32_t lo, int32_t hi) {
  return guarded([&] {
    require(a, "null argument");
    require(lo <= hi, "empty value range");
    dfe::Rng rng(seed);
    for (auto &[name, arr] : a->store)
      for (auto &v : arr.values)
        v = static_cast<std::int32_t>(rng.between(lo, hi));
  });
}

int dfe_arrays_equal(const dfe_arrays *a, const dfe_arrays *b) {
  return a && b && a->store == b->store;
}

dfe_status dfe_software_run(const dfe_kernel *k, dfe_arrays *a, const dfe_params *params) {
  return guarded([&] {
    require(k && a, "null argument");
    dfe::run_software(k->kernel, a->store, to_env(params));
  });
}

// ---- simulation

dfe_status dfe_simulate(const dfe_placement *p, dfe_arrays *a, const dfe_params *params,
                        dfe_run_report *report) {
  return guarded([&] {
    require(p && a, "null argument");
    const dfe::Env env = to_env(params);
    const auto streams = dfe::build_streams(p->placement.graph, a->store, env);
    const auto rep = dfe::run(p->placement.config, streams.inputs, streams.length);
    dfe::write_back(p->placement.graph, rep, a->store, env);
    if (report)
      *report = to_c(rep);
  });
}

dfe_status dfe_input_frames(const dfe_placement *p, const dfe_arrays *a, const dfe_params *params,
                            uint8_t **buf, size_t *length) {
  return guarded([&] {
    require(p && a, "null argument");
    const auto streams = dfe::build_streams(p->placement.graph, a->store, to_env(params));
    std::vector<dfe::TaggedFrame> frames = streams.constants;
    const auto data = dfe::interleave(streams.inputs);
    frames.insert(frames.end(), data.begin(), data.end());
    give_buffer(dfe::encode_frames(frames), buf, length);
  });
}

dfe_status dfe_run_frames(const dfe_config *c, const uint8_t *frames, size_t length, uint8_t **out,
                          size_t *out_length, dfe_run_report *report) {
  return guarded([&] {
    require(c && (frames || length == 0), "null argument");
    const auto in = dfe::decode_frames(std::span<const std::uint8_t>(frames, length));
    const auto rep = dfe::run_frames(c->config, in);
    give_buffer(dfe::encode_frames(dfe::output_frames(rep)), out, out_length);
    if (report)
      *report = to_c(rep);
  });
}

// ---- runtime

void dfe_runtime_config_default(dfe_runtime_config *out) {
  if (!out)
    return;
  const dfe::RuntimeConfig r;
  *out = dfe_runtime_config{};
  out->rows = r.shape.rows;
  out->cols = r.shape.cols;
  out->unroll = r.unroll;
  out->min_calc_nodes = r.thresholds.min_calc_nodes;
  out->max_calc_nodes = 0;
  out->seed = r.seed;
  dfe_placer_params_default(&out->placer);
  store_cost(*out, r.cost, r.policy);
  out->cache_capacity = r.cache_capacity;
  out->mode = DFE_MODE_ADAPTIVE;
}

dfe_status dfe_runtime_config_load(dfe_runtime_config *cfg, const char *text, size_t length) {
  return guarded([&] {
    require(cfg && (text || length == 0), "null argument");
    dfe::CostModel m;
    dfe::DecisionPolicy p;
    load_cost(*cfg, m, p);
    dfe::load_cost_config(std::string_view(text ? text : "", length), m, p);
    store_cost(*cfg, m, p);
  });
}

dfe_status dfe_runtime_config_env(dfe_runtime_config *cfg) {
  return guarded([&] {
    require(cfg, "null argument");
    dfe::CostModel m;
    dfe::DecisionPolicy p;
    load_cost(*cfg, m, p);
    dfe::apply_env_overrides(m, p);
    store_cost(*cfg, m, p);
  });
}

double dfe_estimate_offload_time(const dfe_stats *stats, uint64_t n_iterations,
                                 const dfe_runtime_config *cfg, int cached) {
  if (!stats || !cfg)
    return -1;
  dfe::CostModel m;
  dfe::DecisionPolicy p;
  load_cost(*cfg, m, p);
  return dfe::estimate_offload_time(from_c(*stats), n_iterations, m, cached != 0);
}

const char *dfe_exec_path_name(dfe_exec_path path) {
  return dfe::exec_path_name(static_cast<dfe::ExecPath>(path));
}

dfe_status dfe_runtime_create(const dfe_runtime_config *cfg, dfe_runtime **out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = nullptr;
    *out = new dfe_runtime(from_c(*cfg));
  });
}

void dfe_runtime_free(dfe_runtime *rt) { delete rt; }

dfe_status dfe_runtime_execute(dfe_runtime *rt, const dfe_kernel *k, dfe_arrays *a,
                               const dfe_params *params, dfe_exec_result *result, char **trace) {
  return guarded([&] {
    require(rt && k && a && result, "null argument");
    const auto res = rt->runtime.execute(k->kernel, a->store, to_env(params));
    *result = dfe_exec_result{};
    result->path = static_cast<dfe_exec_path>(res.path);
    result->reason = static_cast<dfe_reason>(res.eligibility.reason);
    result->cache_hit = res.cache_hit;
    result->has_run = res.run.has_value();
    if (res.run)
      result->run = to_c(*res.run);
    result->modeled_offload_time = res.modeled_offload_time;
    result->software_time = res.software_time;
    result->has_hash = res.dfg_hash.has_value();
    result->dfg_hash = res.dfg_hash.value_or(0);
    if (trace)
      *trace = dup_string(dfe::format_trace(res.trace));
  });
}

dfe_status dfe_runtime_state(const dfe_runtime *rt, uint64_t dfg_hash, dfe_state_mode *mode,
                             uint64_t *calls) {
  return guarded([&] {
    require(rt, "null argument");
    const auto st = rt->runtime.state(dfg_hash);
    if (mode)
      *mode = static_cast<dfe_state_mode>(st.mode);
    if (calls)
      *calls = st.calls;
  });
}

void dfe_runtime_reset(dfe_runtime *rt, uint64_t dfg_hash) {
  if (rt)
    rt->runtime.reset(dfg_hash);
}

} // extern "C"
