// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsv/characterization.hpp"
#include "qcsv/repository.hpp"

namespace qcsv {

enum class XKind { Category, Time, Commit };

std::string_view to_string(XKind k);

struct ChartPoint {
  std::string x;  // category label, or ISO-8601 instant for time axes
  double y = 0;
  nlohmann::json meta = nlohmann::json::object();
};

struct ChartSeries {
  std::string label;
  XKind x_kind = XKind::Category;
  std::vector<ChartPoint> points;
};

nlohmann::json to_json(const ChartSeries& series);

enum class EntityKind { Qubit, Gate };
enum class CharacterizationMode { ByQubit, ByProperty };

/// Read-side chart computations over the repository and characterization
/// store. Commit axes follow the branch's first-parent chain, oldest first.
class ChartEngine {
 public:
  ChartEngine(const Repository& repository, const CharacterizationStore& characterization)
      : repository_(repository), characterization_(characterization) {}

  /// One series per gate group, x = gate name, y = the pulse's value with
  /// references resolved. Empty groups are omitted.
  std::map<std::string, ChartSeries> by_commit_gate_groups(const std::string& branch, const std::string& chip,
                                                           std::string_view commit, const std::string& property,
                                                           int pulse_index = 0) const;

  ChartSeries by_commit_qubits(const std::string& branch, const std::string& chip, std::string_view commit,
                               const std::string& property) const;

  /// One point per first-parent commit that has the entity and property;
  /// commits lacking it are skipped.
  ChartSeries calibration_property_series(const std::string& branch, const std::string& chip, EntityKind entity,
                                          const std::string& entity_name, const std::string& property,
                                          int pulse_index = 0) const;

  std::map<std::string, ChartSeries> characterization_series(const std::string& chip, CharacterizationMode mode,
                                                             const std::string& key) const;

 private:
  const CalibrationSnapshot& snapshot_at(const std::string& branch, const std::string& chip, std::string_view commit,
                                         CommitData& holder) const;

  const Repository& repository_;
  const CharacterizationStore& characterization_;
};

}  // namespace qcsv
