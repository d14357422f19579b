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

// Shared helpers for the unit and acceptance tests.

#pragma once

#include "dfe/kernel.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dfe::testing {

inline std::string corpus_path(const std::string &rel) {
  return std::string(DFE_CORPUS_DIR) + "/" + rel;
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Kernel parse_kernel_file(const std::string &path) { return parse_kernel(read_file(path)); }

inline Kernel load_corpus_kernel(const std::string &rel) {
  return parse_kernel_file(corpus_path(rel));
}

} // namespace dfe::testing
