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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Tolerances and workload sizes are fixed here.

#include "brute_mapper.hpp"
#include "dfe/arrays.hpp"
#include "dfe/error.hpp"
#include "dfe/frontend.hpp"
#include "dfe/placer.hpp"
#include "dfe/runtime.hpp"
#include "dfe/simulator.hpp"
#include "oracle.hpp"
#include "random_dfg.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace dfe;
using dfe::testing::load_corpus_kernel;

namespace {

constexpr double kTableSeconds = 5;
constexpr double kOracleSeconds = 300;
constexpr double kCompletenessSeconds = 600;
constexpr double kEstimateTolerance = 1e-9;
// Reductions index fixed columns 0..3, so every extent parameter is >= 4.
constexpr std::int64_t kMinExtent = 4;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

class Clock {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

/// Running tally of the frame accounting of every report produced below.
struct WireLedger {
  std::uint64_t reports = 0;
  std::uint64_t violations = 0;

  void check(const RunReport &r) {
    ++reports;
    const std::uint64_t words = r.frames_in + r.frames_out;
    if (r.bytes_on_wire != 16 * words || r.bytes_on_wire != 4 * (4 * words))
      ++violations;
  }
};

WireLedger g_wire;

// Outcome column of the benchmark table, by corpus file stem.
const std::map<std::string, std::string> kTable = {
    {"2mm", "Yes"},           {"3mm", "Yes"},           {"adi", "No, divisions"},
    {"atax", "Yes"},          {"bicg", "Yes"},          {"fdtd-2d", "No, fp data"},
    {"gemm", "Yes"},          {"gemver", "Yes"},        {"gesummv", "Yes"},
    {"heat-3d", "Yes"},       {"jacobi-1d", "No, fp data"}, {"jacobi-2d", "No, fp data"},
    {"lu", "No, divisions"},  {"ludcmp", "No, divisions"},  {"mvt", "Yes"},
    {"seidel", "No, divisions"}, {"symm", "Yes"},       {"syr2k", "Yes"},
    {"syrk", "Yes"},          {"trisolv", "No, divisions"}, {"trmm", "Yes"}};

std::vector<std::string> accepted_kernels() {
  std::vector<std::string> out;
  for (const auto &[stem, label] : kTable)
    if (label == "Yes")
      out.push_back(stem);
  return out;
}

void randomize(ArrayStore &arrays, Rng &rng, std::int64_t lo, std::int64_t hi) {
  for (auto &[name, a] : arrays)
    for (auto &v : a.values)
      v = static_cast<std::int32_t>(rng.between(lo, hi));
}

/// Streams the arrays through `cfg` and writes the outputs back; also checks
/// the overlay against the reference interpreter on the same streams.
bool offload_steady_state(const DataFlowGraph &g, const OverlayConfig &cfg, ArrayStore &arrays,
                          const Env &params, std::string *why) {
  const StreamSet s = build_streams(g, arrays, params);
  const RunReport rep = run(cfg, s.inputs, s.length);
  g_wire.check(rep);
  ValueStreams in;
  for (const TaggedStream &t : s.inputs)
    in[static_cast<NodeId>(t.tag)] = t.values;
  for (const auto &[node, values] : interpret_dfg(g, in, s.length)) {
    auto it = rep.outputs.find(static_cast<std::uint32_t>(node));
    if (it == rep.outputs.end() || it->second != values) {
      *why = "overlay output " + std::to_string(idx(node)) + " differs from interpret_dfg";
      return false;
    }
  }
  write_back(g, rep, arrays, params);
  return true;
}

// ---------------------------------------------------------------------------

Outcome table_classification() {
  Outcome v;
  Clock clock;
  std::map<std::string, int> counts;
  const Thresholds t = Thresholds::for_overlay(24, 18);
  for (const auto &[stem, expected] : kTable) {
    const Kernel k = load_corpus_kernel("polybench/" + stem + ".k");
    const EligibilityReport r = check_eligibility(k, t);
    const std::string label = reason_label(r.reason);
    ++counts[label];
    v.require(label == expected, stem + ": got '" + label + "', table says '" + expected + "'");
  }
  const double s = clock.seconds();
  v.require(counts["Yes"] == 13 && counts["No, divisions"] == 5 && counts["No, fp data"] == 3,
            "verdict counts differ from the table rows");
  v.require(s < kTableSeconds, "took " + std::to_string(s) + " s");
  std::ostringstream d;
  d << counts["Yes"] << " Yes / " << counts["No, divisions"] << " divisions / "
    << counts["No, fp data"] << " fp over " << kTable.size() << " kernels in " << s << " s";
  if (v.pass)
    v.detail = d.str();
  return v;
}

Outcome oracle_equivalence() {
  Outcome v;
  Clock clock;
  int placements = 0, attempts = 0;
  std::uint64_t input_sets = 0;
  for (const std::string &stem : accepted_kernels()) {
    const Kernel k = load_corpus_kernel("polybench/" + stem + ".k");
    const DataFlowGraph g = extract_dfg(k);
    std::set<std::string> scalars;
    for (NodeId id : g.nodes_of(NodeKind::Input))
      if (const IoBinding *b = g.binding(id); b->access.empty())
        scalars.insert(b->array);
    for (int size : {4, 6, 9}) {
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ++attempts;
        const PlaceResult r = place_and_route(g, {size, size}, PlacerParams{}, seed);
        if (!r.ok())
          continue;
        ++placements;
        const std::string where = stem + " on " + std::to_string(size) + "x" +
                                  std::to_string(size) + " seed " + std::to_string(seed);
        v.require(validate_config(r.placement->config).empty(), where + ": invalid config");
        Rng rng(seed * 1000 + static_cast<std::uint64_t>(size));
        for (int set = 0; set < 100 && v.pass; ++set) {
          Env params;
          for (const std::string &p : k.params)
            params[p] = scalars.count(p) ? rng.between(-100, 100) : rng.between(kMinExtent, 16);
          ArrayStore arrays = allocate_arrays(k, params);
          randomize(arrays, rng, -1000, 1000);
          ArrayStore expected = arrays;
          run_software(k, expected, params);
          std::string why;
          const bool ok = offload_steady_state(g, r.placement->config, arrays, params, &why);
          v.require(ok, where + ": " + why);
          v.require(!ok || arrays == expected, where + ": arrays differ from software");
          ++input_sets;
        }
      }
    }
  }
  const double s = clock.seconds();
  v.require(placements > 0, "no kernel was placed");
  v.require(s < kOracleSeconds, "took " + std::to_string(s) + " s");
  if (v.pass)
    v.detail = std::to_string(placements) + "/" + std::to_string(attempts) +
               " placements succeeded, " + std::to_string(input_sets) +
               " input sets bit-identical to interpret_dfg and software in " +
               std::to_string(s) + " s";
  return v;
}

Outcome fig2_end_to_end() {
  Outcome v;
  const Kernel k = load_corpus_kernel("fig2.k");
  const Env params{{"M", 8}, {"N", 8}};
  Rng rng(2);
  ArrayStore arrays = allocate_arrays(k, params);
  randomize(arrays, rng, -100, 100);
  const std::vector<std::int32_t> a = arrays["A"].values, b = arrays["B"].values;

  RuntimeConfig cfg;
  cfg.shape = {2, 2};
  cfg.thresholds = Thresholds{1, 4};
  cfg.mode = OffloadMode::Eager;
  cfg.seed = 42;
  Runtime rt(cfg);
  const ExecutionResult res = rt.execute(k, arrays, params);
  v.require(res.path == ExecPath::Offloaded, std::string("path ") + exec_path_name(res.path));
  for (std::size_t i = 0; i < a.size(); ++i)
    v.require(arrays["C"].values[i] == a[i] + 3 * b[i] + 1,
              "C[" + std::to_string(i) + "] != A + 3B + 1");
  if (res.run) {
    g_wire.check(*res.run);
    v.require(res.run->frames_in == 2 * 64, "frames_in " + std::to_string(res.run->frames_in));
    v.require(res.run->frames_out == 64, "frames_out " + std::to_string(res.run->frames_out));
  }
  const PlaceResult pr = place_and_route(extract_dfg(k), {2, 2}, PlacerParams{}, 42);
  v.require(pr.ok(), "placement failed");
  if (pr.ok()) {
    std::multiset<std::int32_t> masked;
    for (const CellConfig &c : pr.placement->config.cells())
      if (c.mask)
        masked.insert(c.mask->value);
    v.require(masked == std::multiset<std::int32_t>{1, 3}, "constants 3 and 1 are not masked");
  }
  if (v.pass)
    v.detail = "64/64 elements exact on 2x2, constants {1,3} masked, frames_in=128 frames_out=64";
  return v;
}

Outcome listing1_branches() {
  Outcome v;
  const Kernel k = load_corpus_kernel("listing1.k");
  const DataFlowGraph g = extract_dfg(k);
  const Env params{{"M", 8}, {"N", 8}};
  Rng rng(4);
  ArrayStore arrays = allocate_arrays(k, params);
  randomize(arrays, rng, -100, 100);
  const std::vector<std::int32_t> a = arrays["A"].values, b = arrays["B"].values;
  const PlaceResult pr = place_and_route(g, {4, 4}, PlacerParams{}, 1);
  v.require(pr.ok(), "placement failed on 4x4");
  if (!pr.ok())
    return v;
  std::string why;
  v.require(offload_steady_state(g, pr.placement->config, arrays, params, &why), why);
  int taken = 0, not_taken = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int32_t want = a[i] > b[i] ? a[i] + 3 * b[i] + 1 : a[i] - 5 * b[i] - 2;
    (a[i] > b[i] ? taken : not_taken) += 1;
    v.require(arrays["C"].values[i] == want, "C[" + std::to_string(i) + "] wrong");
  }
  v.require(taken > 0 && not_taken > 0, "one MUX arm never exercised");
  if (v.pass)
    v.detail = "64/64 exact; then-arm " + std::to_string(taken) + ", else-arm " +
               std::to_string(not_taken);
  return v;
}

Outcome unroll_invariance() {
  Outcome v;
  int kernels = 0, overlay_runs = 0;
  for (const std::string &stem : accepted_kernels()) {
    const Kernel k = load_corpus_kernel("polybench/" + stem + ".k");
    Env params;
    for (const std::string &p : k.params)
      params[p] = 8;
    Rng rng(8);
    ArrayStore input = allocate_arrays(k, params);
    randomize(input, rng, -1000, 1000);
    std::optional<ArrayStore> base;
    for (std::int64_t u : {1, 2, 4}) {
      const DataFlowGraph g = extract_dfg(k, ExtractOptions{u});
      v.require(remainder_iterations(g, params) == 0, stem + ": trip count not divisible");
      ArrayStore arrays = input;
      const StreamSet s = build_streams(g, arrays, params);
      ValueStreams in;
      for (const TaggedStream &t : s.inputs)
        in[static_cast<NodeId>(t.tag)] = t.values;
      RunReport rep;
      for (const auto &[node, values] : interpret_dfg(g, in, s.length))
        rep.outputs[static_cast<std::uint32_t>(node)] = values;
      write_back(g, rep, arrays, params);
      if (!base)
        base = arrays;
      v.require(arrays == *base, stem + ": unroll " + std::to_string(u) + " differs from 1");
    }
    ++kernels;
  }
  // Same on the overlay, for the factor/grid pairs the placer maps.
  struct OverlayCase {
    const char *kernel;
    std::int64_t unroll;
    int size;
  };
  for (const OverlayCase &c : {OverlayCase{"fig2.k", 1, 4}, OverlayCase{"fig2.k", 2, 6},
                               OverlayCase{"fig2.k", 4, 6}, OverlayCase{"listing1.k", 1, 6},
                               OverlayCase{"listing1.k", 2, 9}}) {
    const Kernel k = load_corpus_kernel(c.kernel);
    const Env params{{"M", 4}, {"N", 16}};
    Rng rng(static_cast<std::uint64_t>(c.unroll));
    ArrayStore arrays = allocate_arrays(k, params);
    randomize(arrays, rng, -100, 100);
    ArrayStore expected = arrays;
    run_software(k, expected, params);
    const DataFlowGraph g = extract_dfg(k, ExtractOptions{c.unroll});
    const PlaceResult pr = place_and_route(g, {c.size, c.size}, PlacerParams{}, 3);
    v.require(pr.ok(), std::string(c.kernel) + " unroll " + std::to_string(c.unroll) +
                           " did not map");
    if (!pr.ok())
      continue;
    std::string why;
    v.require(offload_steady_state(g, pr.placement->config, arrays, params, &why), why);
    v.require(arrays == expected, std::string(c.kernel) + " unroll " +
                                      std::to_string(c.unroll) + " differs on the overlay");
    ++overlay_runs;
  }
  // Lane partitions of factor 4: lane l reads j = l, l+4, l+8, l+12.
  const Kernel fig2 = load_corpus_kernel("fig2.k");
  const Env row{{"M", 1}, {"N", 16}};
  const DataFlowGraph g4 = extract_dfg(fig2, ExtractOptions{4});
  ArrayStore arrays = allocate_arrays(fig2, row);
  for (std::size_t j = 0; j < 16; ++j)
    arrays["A"].values[j] = static_cast<std::int32_t>(j);
  std::set<std::int64_t> lanes;
  for (const TaggedStream &t : build_streams(g4, arrays, row).inputs) {
    const IoBinding *b = g4.binding(static_cast<NodeId>(t.tag));
    if (b->array != "A")
      continue;
    const auto l = static_cast<std::int32_t>(b->lane.offset);
    lanes.insert(l);
    v.require(t.values == std::vector<std::int32_t>{l, l + 4, l + 8, l + 12},
              "lane " + std::to_string(l) + " partition wrong");
  }
  v.require(lanes == std::set<std::int64_t>{0, 1, 2, 3}, "lanes are not 0..3");
  if (v.pass)
    v.detail = std::to_string(kernels) + " kernels identical for u in {1,2,4}, " +
               std::to_string(overlay_runs) + " overlay runs exact, lanes {l, l+4, ...}";
  return v;
}

Outcome wire_overhead() {
  Outcome v;
  const double t = estimate_offload_time(DfgStats{2, 1, 0, 0}, 1024, CostModel{}, true);
  const double hand = 55e-6 + 16.0 * 1024 * 3 / 230e6;
  v.require(std::abs(t - hand) <= kEstimateTolerance, "estimate differs from 55e-6 + 49152/230e6");
  v.require(std::abs(t - 2.687e-4) <= 0.5e-7, "estimate does not round to 2.687e-4");
  v.require(g_wire.reports > 0, "no run reports were checked");
  v.require(g_wire.violations == 0,
            std::to_string(g_wire.violations) + " reports break bytes = 16 x frames");
  if (v.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "%llu reports with bytes = 16 x frames = 4 x payload; estimate %.6e s",
                  static_cast<unsigned long long>(g_wire.reports), t);
    v.detail = buf;
  }
  return v;
}

Outcome placer_soundness() {
  Outcome v;
  Rng gen(2718);
  dfe::testing::RandomDfgOptions opts;
  opts.min_ops = 1;
  opts.max_ops = 20;
  opts.max_inputs = 6;
  opts.max_streams = 12;
  int ok = 0;
  for (int t = 0; t < 1000 && v.pass; ++t) {
    const DataFlowGraph g = dfe::testing::random_dfg(gen, opts);
    const auto seed = static_cast<std::uint64_t>(t) + 1;
    const PlaceResult a = place_and_route(g, {6, 6}, PlacerParams{}, seed);
    if (!a.ok())
      continue;
    ++ok;
    const std::string where = "graph " + std::to_string(t);
    v.require(validate_config(a.placement->config).empty(), where + ": invalid config");
    v.require(apply_placement(*a.placement) == a.placement->config,
              where + ": config does not follow from the placement");
    Rng rng(seed);
    const std::string why = dfe::testing::check_placement_oracle(
        g, *a.placement, rng, 100, std::numeric_limits<std::int32_t>::min(),
        std::numeric_limits<std::int32_t>::max());
    v.require(why.empty(), where + ": " + why);
    const PlaceResult b = place_and_route(g, {6, 6}, PlacerParams{}, seed);
    v.require(b.ok() && serialize_config(b.placement->config) ==
                            serialize_config(a.placement->config) &&
                  placement_sidecar(*b.placement) == placement_sidecar(*a.placement),
              where + ": same seed, different placement");
  }
  // Pigeonhole: too many ops for 36 cells, too many streams for 24 ports.
  int rejected = 0;
  dfe::testing::RandomDfgOptions big;
  big.min_ops = 37;
  big.max_ops = 45;
  big.max_inputs = 6;
  big.max_streams = 40;
  for (int t = 0; t < 20; ++t) {
    const PlaceResult r = place_and_route(dfe::testing::random_dfg(gen, big), {6, 6},
                                          PlacerParams{}, 1);
    rejected += r.status == PlaceStatus::PreconditionViolated && r.attempts.iterations == 0;
  }
  DataFlowGraph wide;
  std::vector<NodeId> ins;
  for (int i = 0; i < 25; ++i)
    ins.push_back(wide.add_input("x" + std::to_string(i), {}));
  NodeId acc = ins[0];
  for (int i = 1; i < 25; ++i) {
    const NodeId s = wide.add_op(OpCode::Add);
    wide.connect(acc, s, 0);
    wide.connect(ins[static_cast<std::size_t>(i)], s, 1);
    acc = s;
  }
  wide.connect(acc, wide.add_output("y", {}), 0);
  const PlaceResult r = place_and_route(wide, {6, 6}, PlacerParams{}, 1);
  rejected += r.status == PlaceStatus::PreconditionViolated && r.attempts.iterations == 0;
  v.require(rejected == 21, std::to_string(21 - rejected) + " capacity violations searched");
  v.require(ok > 0, "no random graph was placed");
  if (v.pass)
    v.detail = std::to_string(ok) + "/1000 placed, all valid, oracle-exact and reproducible; " +
               "21/21 over-capacity graphs rejected without search";
  return v;
}

Outcome small_completeness() {
  Outcome v;
  Clock clock;
  Rng gen(1618);
  dfe::testing::RandomDfgOptions opts;
  opts.max_ops = 4;
  opts.max_inputs = 3;
  opts.max_streams = 4;
  PlacerParams params;
  params.global_budget = 1000000;
  int graphs = 0, mappable = 0, found = 0;
  while (graphs < 200) {
    const DataFlowGraph g = dfe::testing::random_dfg(gen, opts);
    const DataFlowGraph legal = legalize_for_overlay(g);
    if (legal.nodes_of(NodeKind::Op).size() > 4)
      continue;
    ++graphs;
    const auto brute = dfe::testing::brute_force_map(legal, {2, 2});
    const PlaceResult r =
        place_and_route(g, {2, 2}, params, static_cast<std::uint64_t>(graphs));
    if (brute.config) {
      ++mappable;
      found += r.ok();
      v.require(r.ok(), "graph " + std::to_string(graphs) + " maps by brute force only:\n" +
                            dfg_to_text(legal));
    }
    v.require(!r.ok() || brute.config.has_value(),
              "placer mapped a graph brute force calls unmappable");
  }
  const double s = clock.seconds();
  v.require(s < kCompletenessSeconds, "took " + std::to_string(s) + " s");
  if (v.pass)
    v.detail = std::to_string(found) + "/" + std::to_string(mappable) +
               " brute-force-mappable graphs placed (" + std::to_string(graphs) +
               " graphs) in " + std::to_string(s) + " s";
  return v;
}

Outcome rollback_policy() {
  Outcome v;
  const Kernel k = load_corpus_kernel("fig2.k");
  const Env params{{"M", 8}, {"N", 8}};
  RuntimeConfig cfg;
  cfg.shape = {2, 2};
  cfg.thresholds = Thresholds{1, 4};
  cfg.mode = OffloadMode::Eager;
  Runtime probe(cfg);
  Rng rng(9);
  ArrayStore scratch = allocate_arrays(k, params);
  probe.execute(k, scratch, params);
  const double estimate = probe.execute(k, scratch, params).modeled_offload_time;
  cfg.cost.software_time_per_call = estimate / 2;
  Runtime rt(cfg);
  int offloaded = 0, rolled_back_at = -1;
  for (int call = 0; call < 10; ++call) {
    ArrayStore arrays = allocate_arrays(k, params);
    randomize(arrays, rng, -100, 100);
    ArrayStore expected = arrays;
    run_software(k, expected, params);
    const ExecutionResult r = rt.execute(k, arrays, params);
    if (r.run)
      g_wire.check(*r.run);
    v.require(arrays == expected, "call " + std::to_string(call) + " not bit-correct");
    offloaded += r.path == ExecPath::Offloaded;
    if (rolled_back_at < 0 && r.dfg_hash && rt.state(*r.dfg_hash).mode == Mode::RolledBack)
      rolled_back_at = offloaded;
    if (rolled_back_at >= 0 && call > rolled_back_at)
      v.require(r.path == ExecPath::RolledBack, "offloaded again after rollback");
  }
  v.require(rolled_back_at > 0 && rolled_back_at <= 5,
            "no rollback within 5 offloaded calls (offloaded " + std::to_string(offloaded) + ")");
  if (v.pass)
    v.detail = "RolledBack after " + std::to_string(rolled_back_at) +
               " offloaded calls, 10/10 calls bit-correct";
  return v;
}

} // namespace

int main() {
  struct Criterion {
    const char *name;
    std::function<Outcome()> run;
  };
  // The wire check runs last so that it covers the reports of the others.
  const std::vector<Criterion> criteria = {
      {"table-classification", table_classification},
      {"oracle-equivalence", oracle_equivalence},
      {"fig2-end-to-end", fig2_end_to_end},
      {"listing1-branches", listing1_branches},
      {"unroll-invariance", unroll_invariance},
      {"placer-soundness", placer_soundness},
      {"small-completeness", small_completeness},
      {"rollback-policy", rollback_policy},
      {"wire-overhead", wire_overhead},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    Outcome v;
    try {
      v = c.run();
    } catch (const std::exception &e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
