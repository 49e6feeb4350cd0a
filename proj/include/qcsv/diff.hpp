// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsv/calibration.hpp"

namespace qcsv {

/// Calibration state of a whole tree: chip id -> snapshot.
using ChipSnapshots = std::map<std::string, CalibrationSnapshot>;

enum class TableKind { Qubit, Gate };

std::string_view to_string(TableKind t);

/// Identifies one row: a qubit, or one pulse of a gate.
struct RowKey {
  std::string chip;
  TableKind table = TableKind::Qubit;
  std::string name;  // qubit id or gate name
  int pulse = 0;     // pulse index for gate rows, 0 for qubits

  auto operator<=>(const RowKey&) const = default;
};

struct CellAddress {
  RowKey row;
  std::string column;

  auto operator<=>(const CellAddress&) const = default;
};

/// A cell value in canonical JSON form. Comparing two cells is comparing
/// these strings; the env list is a single cell.
using CellValue = std::string;
using Row = std::map<std::string, CellValue>;
using CellTable = std::map<RowKey, Row>;

CellTable flatten(const ChipSnapshots& chips);
CellTable flatten_chip(const std::string& chip, const CalibrationSnapshot& snapshot);

/// Rebuilds one chip's snapshot from its rows. Gate pulses are ordered by
/// pulse index and renumbered densely. Throws the calibration parse errors.
CalibrationSnapshot rebuild_chip(const CellTable& rows, const std::string& chip);

struct RowChange {
  RowKey key;
  Row row;
};

struct CellChange {
  CellAddress address;
  std::optional<CellValue> old_value;
  std::optional<CellValue> new_value;
};

struct DiffSet {
  std::vector<std::string> chips_added;
  std::vector<std::string> chips_removed;
  std::vector<RowChange> row_additions;
  std::vector<RowChange> row_deletions;
  std::vector<CellChange> cell_modifications;

  bool empty() const noexcept {
    return chips_added.empty() && chips_removed.empty() && row_additions.empty() && row_deletions.empty() &&
           cell_modifications.empty();
  }
};

DiffSet compute_diff(const ChipSnapshots& from, const ChipSnapshots& to);

/// Applies `diff` to `base`. Throws Error(InvalidMerge) if the diff does not
/// fit the base.
ChipSnapshots apply_diff(const ChipSnapshots& base, const DiffSet& diff);

enum class MergeStrategy { Manual, Ours, Theirs };
enum class ConflictKind { Cell, DeleteVsModify, AddAdd };

std::string_view to_string(MergeStrategy s);
std::optional<MergeStrategy> merge_strategy_from_string(std::string_view name);
std::string_view to_string(ConflictKind k);

struct Conflict {
  CellAddress address;
  ConflictKind kind = ConflictKind::Cell;
  std::optional<CellValue> base;
  std::optional<CellValue> ours;
  std::optional<CellValue> theirs;
};

/// Chosen value per conflicted cell; nullopt removes the cell.
using Resolutions = std::map<CellAddress, std::optional<CellValue>>;

struct MergeOutcome {
  std::vector<Conflict> conflicts;        // every conflicted cell, resolved or not
  std::vector<Conflict> unresolved;       // non-empty => merged is empty
  std::optional<ChipSnapshots> merged;
};

/// Cell-level three-way merge. "ours" is the branch being merged into.
MergeOutcome merge_three_way(const ChipSnapshots& base, const ChipSnapshots& ours, const ChipSnapshots& theirs,
                             MergeStrategy strategy, const Resolutions& resolutions = {});

// Wire forms.
nlohmann::json cell_to_json(const std::optional<CellValue>& value);
std::optional<CellValue> cell_from_json(const nlohmann::json& value);
nlohmann::json to_json(const CellAddress& address);
CellAddress cell_address_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DiffSet& diff);
nlohmann::json to_json(const Conflict& conflict);
nlohmann::json conflict_report_json(const std::vector<Conflict>& conflicts);
Resolutions resolutions_from_json(const nlohmann::json& j);

}  // namespace qcsv
