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

#pragma once

#include "dfe/dfg.hpp"
#include "dfe/kernel.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>

namespace dfe {

enum class Verdict { Accepted, Rejected };

enum class RejectReason {
  None,
  Division,
  FloatingPoint,
  TooSmall,
  TooLarge,
  NonAffine,
  UnsupportedOp,
};

const char *reason_name(RejectReason reason);
/// Table-style label: "Yes", "No, divisions", "No, fp data", ...
const char *reason_label(RejectReason reason);

struct Thresholds {
  std::size_t min_calc_nodes = 8;
  std::size_t max_calc_nodes = std::numeric_limits<std::size_t>::max();

  /// Defaults for a target overlay: max = rows * cols.
  static Thresholds for_overlay(std::size_t rows, std::size_t cols) {
    return Thresholds{8, rows * cols};
  }
};

struct EligibilityReport {
  Verdict verdict = Verdict::Accepted;
  RejectReason reason = RejectReason::None;
  std::optional<DfgStats> dfg_stats;
  std::string detail;
};

/// Structural checks only (FloatingPoint, Division, UnsupportedOp,
/// NonAffine), in that order. RejectReason::None when none applies.
RejectReason structural_rejection(const Kernel &k, std::string *detail = nullptr);

/// Full classification: structural checks, then node-count thresholds on the
/// extracted (not unrolled) graph. Failures are verdicts, never exceptions.
EligibilityReport check_eligibility(const Kernel &k, const Thresholds &cfg);

struct ExtractOptions {
  std::int64_t unroll = 1;
  /// Calc-node cap for the replicated datapath (UnrollTooLarge above it).
  std::size_t max_calc_nodes = std::numeric_limits<std::size_t>::max();
};

/// Builds the graph of the innermost loop body. Requires a kernel without
/// structural rejections (throws Error(NotEligible) otherwise).
DataFlowGraph extract_dfg(const Kernel &k, const ExtractOptions &opts = {});

} // namespace dfe
