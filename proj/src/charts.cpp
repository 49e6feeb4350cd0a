// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/charts.hpp"

#include <algorithm>

#include "qcsv/error.hpp"

namespace qcsv {

using nlohmann::json;

namespace {

constexpr std::string_view kGateChartProperties[] = {"amp", "freq", "phase", "twidth", "t0"};

bool is_gate_chart_property(std::string_view p) {
  return std::find(std::begin(kGateChartProperties), std::end(kGateChartProperties), p) !=
         std::end(kGateChartProperties);
}

/// Numeric value of a pulse field, refs resolved; nullopt if absent.
std::optional<double> pulse_value(const CalibrationSnapshot& snap, const GatePulse& pulse, const std::string& property,
                                  json& meta) {
  if (property == "freq") {
    if (!pulse.freq) return std::nullopt;
    if (const auto* ref = std::get_if<QubitRef>(&*pulse.freq)) meta["ref"] = ref->str();
    return resolve_value(snap, *pulse.freq);
  }
  if (property == "amp") return pulse.amp;
  if (property == "phase") return pulse.phase;
  if (property == "twidth") return pulse.twidth;
  if (property == "t0") return pulse.t0;
  if (const auto it = pulse.extras.find(property); it != pulse.extras.end()) return it->second;
  return std::nullopt;
}

std::optional<double> qubit_value(const QubitRecord& q, const std::string& property) {
  if (const auto p = qubit_property_from_string(property)) return q.get(*p);
  if (const auto it = q.extras.find(property); it != q.extras.end()) return it->second;
  return std::nullopt;
}

std::string group_label(const std::string& gate_name) {
  try {
    return classify_gate(gate_name).label();
  } catch (const Error&) {
    return "Other(" + gate_name + ")";
  }
}

}  // namespace

std::string_view to_string(XKind k) {
  switch (k) {
    case XKind::Category:
      return "category";
    case XKind::Time:
      return "time";
    case XKind::Commit:
      return "commit";
  }
  return "category";
}

json to_json(const ChartSeries& s) {
  json points = json::array();
  for (const auto& p : s.points) points.push_back({{"x", p.x}, {"y", p.y}, {"meta", p.meta}});
  return {{"label", s.label}, {"x_kind", to_string(s.x_kind)}, {"points", std::move(points)}};
}

const CalibrationSnapshot& ChartEngine::snapshot_at(const std::string& branch, const std::string& chip,
                                                    std::string_view commit, CommitData& holder) const {
  const ObjectId id = repository_.resolve_commit(commit);
  if (!repository_.ancestors(repository_.get_branch(branch).head).count(id)) {
    throw Error(ErrorCode::NotOnBranch, "commit " + id.str() + " is not on " + branch);
  }
  holder = repository_.get_commit(id.str());
  const auto it = holder.chips.find(chip);
  if (it == holder.chips.end()) throw Error(ErrorCode::UnknownChip, "chip " + chip + " not in commit " + id.str());
  return it->second;
}

std::map<std::string, ChartSeries> ChartEngine::by_commit_gate_groups(const std::string& branch,
                                                                      const std::string& chip, std::string_view commit,
                                                                      const std::string& property,
                                                                      int pulse_index) const {
  if (!is_gate_chart_property(property)) {
    throw Error(ErrorCode::UnknownProperty, "gate charts support amp, freq, phase, twidth, t0; got " + property);
  }
  CommitData data;
  const CalibrationSnapshot& snap = snapshot_at(branch, chip, commit, data);
  std::map<std::string, ChartSeries> out;
  for (const auto& [name, gate] : snap.gates) {
    if (pulse_index < 0 || static_cast<std::size_t>(pulse_index) >= gate.pulses.size()) continue;
    json meta{{"commit", data.commit.id.str()}, {"gate", name}, {"pulse", pulse_index}};
    const auto y = pulse_value(snap, gate.pulses[pulse_index], property, meta);
    if (!y) continue;
    const std::string label = group_label(name);
    auto& series = out[label];
    series.label = label;
    series.x_kind = XKind::Category;
    series.points.push_back({name, *y, std::move(meta)});
  }
  if (out.empty()) throw Error(ErrorCode::NoData, "no gate on chip " + chip + " has " + property);
  return out;
}

ChartSeries ChartEngine::by_commit_qubits(const std::string& branch, const std::string& chip, std::string_view commit,
                                          const std::string& property) const {
  if (!qubit_property_from_string(property)) {
    throw Error(ErrorCode::UnknownProperty, "qubit charts support freq, readfreq, freq_ef; got " + property);
  }
  CommitData data;
  const CalibrationSnapshot& snap = snapshot_at(branch, chip, commit, data);
  ChartSeries series{property, XKind::Category, {}};
  for (const auto& [id, q] : snap.qubits) {
    if (const auto y = qubit_value(q, property)) {
      series.points.push_back({id, *y, {{"commit", data.commit.id.str()}, {"qubit", id}}});
    }
  }
  if (series.points.empty()) throw Error(ErrorCode::NoData, "no qubit on chip " + chip + " has " + property);
  return series;
}

ChartSeries ChartEngine::calibration_property_series(const std::string& branch, const std::string& chip,
                                                     EntityKind entity, const std::string& entity_name,
                                                     const std::string& property, int pulse_index) const {
  if (property == "dest" || property == "env") {
    throw Error(ErrorCode::UnknownProperty, property + " is not a numeric property");
  }
  std::vector<Commit> chain = repository_.log(branch);
  std::reverse(chain.begin(), chain.end());

  ChartSeries series{entity_name + "." + property, XKind::Commit, {}};
  for (const Commit& c : chain) {
    const Tree tree = repository_.read_tree(c.tree);
    const auto chip_it = tree.chips.find(chip);
    if (chip_it == tree.chips.end()) continue;
    const auto snap = repository_.read_snapshot(chip_it->second);
    json meta{{"commit", c.id.str()}, {"message", c.message}};
    std::optional<double> y;
    if (entity == EntityKind::Qubit) {
      if (const auto q = snap->qubits.find(entity_name); q != snap->qubits.end()) y = qubit_value(q->second, property);
    } else if (const auto g = snap->gates.find(entity_name); g != snap->gates.end()) {
      if (pulse_index >= 0 && static_cast<std::size_t>(pulse_index) < g->second.pulses.size()) {
        meta["pulse"] = pulse_index;
        y = pulse_value(*snap, g->second.pulses[pulse_index], property, meta);
      }
    }
    if (y) series.points.push_back({format_iso(c.timestamp), *y, std::move(meta)});
  }
  if (series.points.empty()) {
    throw Error(ErrorCode::NoData, entity_name + "." + property + " never present on " + branch + "/" + chip);
  }
  return series;
}

std::map<std::string, ChartSeries> ChartEngine::characterization_series(const std::string& chip,
                                                                        CharacterizationMode mode,
                                                                        const std::string& key) const {
  const auto source = mode == CharacterizationMode::ByQubit ? characterization_.series_by_qubit(chip, key)
                                                            : characterization_.series_by_property(chip, key);
  std::map<std::string, ChartSeries> out;
  for (const auto& [sub, exp] : source) {
    ChartSeries s{sub, XKind::Time, {}};
    for (const auto& p : exp.points) {
      s.points.push_back({format_iso(p.start),
                          p.mean,
                          {{"std", p.std}, {"enddatetime", format_iso(p.end)}, {"upload", p.upload.str()},
                           {"qubit", exp.qubit}, {"property", exp.property}}});
    }
    out.emplace(sub, std::move(s));
  }
  return out;
}

}  // namespace qcsv
