// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

// Shared test fixtures: sample documents, temp dirs, random calibration trees
// and a brute-force merge oracle that works on raw JSON documents.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>

#include <nlohmann/json.hpp>

#include "qcsv/diff.hpp"

namespace qcsv::testing {

using nlohmann::json;

extern const char* const kSampleCalibration;       // the sample, "twidht" spelling
extern const char* const kSampleCharacterization;  // the X4Y2 sample

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

using Rng = std::mt19937_64;

struct GenLimits {
  int max_chips = 3;
  int max_qubits = 8;
  int max_gates = 20;
  int max_edits = 4;
};

/// {chip: {"Qubits":..., "Gates":...}} with 1..max_chips chips. Always valid.
json random_tree(Rng& rng, const GenLimits& limits);
/// Applies 0..max_edits random edits; the result stays a valid tree and
/// never loses a chip.
void random_edits(Rng& rng, json& tree, const GenLimits& limits, int edits);

ChipSnapshots to_snapshots(const json& tree);
json to_tree_json(const ChipSnapshots& chips);

// Oracle side. Addresses are (chip, table, name, pulse, column).
using OAddr = std::tuple<std::string, std::string, std::string, int, std::string>;

struct OracleMerge {
  std::map<OAddr, std::string> conflicts;  // address -> kind
  std::set<OAddr> unresolved;
  bool invalid = false;  // merged result has a dangling reference
  json merged = json::object();
};

/// strategy: "manual", "ours" or "theirs".
OracleMerge oracle_merge(const json& base, const json& ours, const json& theirs, const std::string& strategy,
                         const std::map<OAddr, std::optional<json>>& resolutions);

/// Number of cell-level differences between two trees, by exhaustive join.
struct OracleDiffCounts {
  std::size_t rows_added = 0;
  std::size_t rows_removed = 0;
  std::size_t cells_modified = 0;  // cells that differ inside rows present on both sides
};
OracleDiffCounts oracle_diff(const json& from, const json& to);

OAddr to_oaddr(const CellAddress& a);
CellAddress from_oaddr(const OAddr& a);

/// One randomized three-way fixture: random base, independent edits on each
/// side, random strategy and partial resolutions. Compares merge_three_way
/// against oracle_merge. Returns an empty string on agreement, else what
/// differed.
std::string check_merge_fixture(std::uint64_t seed, const GenLimits& limits = {});

/// One random pair (a, b): apply(diff(a,b), a) == b, symmetry, and the
/// oracle's row/cell counts. Empty string on success.
std::string check_diff_pair(std::uint64_t seed, const GenLimits& limits = {});

}  // namespace qcsv::testing
