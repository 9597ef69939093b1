// Copyright 2026 The Proofbeam Authors. All Rights Reserved.
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
// =============================================================================

#ifndef PROOFBEAM_TESTS_TESTUTIL_H_
#define PROOFBEAM_TESTS_TESTUTIL_H_

#include <optional>
#include <string>
#include <vector>

#include "proofbeam/mock_backend.h"
#include "proofbeam/script.h"

namespace proofbeam::testing {

std::string fixture_path(const std::string& name);
SyntheticSpace load_space(const std::string& name);

// The list-reversal space used across tests.
inline SyntheticSpace rev_space() { return load_space("rev_space.json"); }

// Builds a space from a compact JSON literal.
SyntheticSpace space_from(const std::string& json_text);

std::string temp_dir(const std::string& tag);

// Exhaustive oracles over a space's edge table, written independently of the
// search code. Length counts commands, the finisher included.
std::optional<int> bfs_shortest_proof(const SyntheticSpace& space);
// Number of distinct root-to-terminal edge paths.
long count_solution_paths(const SyntheticSpace& space);

}  // namespace proofbeam::testing

#endif  // PROOFBEAM_TESTS_TESTUTIL_H_
