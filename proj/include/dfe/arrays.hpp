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

#include "dfe/affine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dfe {

class Kernel;

/// Row-major int32 storage for one kernel array.
struct ArrayData {
  std::vector<std::int64_t> dims;
  std::vector<std::int32_t> values;

  ArrayData() = default;
  explicit ArrayData(std::vector<std::int64_t> d);

  /// Throws Error(OutOfBounds).
  std::size_t offset(std::span<const std::int64_t> index) const;

  friend bool operator==(const ArrayData &, const ArrayData &) = default;
};

using ArrayStore = std::map<std::string, ArrayData, std::less<>>;

/// Zero-filled arrays sized by the kernel's declared extents.
ArrayStore allocate_arrays(const Kernel &k, const Env &params);

/// Innermost-loop iteration window [begin, end) for partial execution.
struct InnermostRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// Sequential reference execution of the kernel source. Integer arithmetic
/// wraps at 32 bits, x / 0 and x % 0 yield 0. Expressions with a float
/// literal are evaluated in double precision and truncated on store.
void run_software(const Kernel &k, ArrayStore &arrays, const Env &params,
                  std::optional<InnermostRange> innermost = std::nullopt);

} // namespace dfe
