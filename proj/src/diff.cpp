// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/diff.hpp"

#include <set>

#include "qcsv/canonical_json.hpp"
#include "qcsv/error.hpp"

namespace qcsv {

using nlohmann::json;

std::string_view to_string(TableKind t) { return t == TableKind::Qubit ? "qubit" : "gate"; }

std::string_view to_string(MergeStrategy s) {
  switch (s) {
    case MergeStrategy::Manual:
      return "manual";
    case MergeStrategy::Ours:
      return "ours";
    case MergeStrategy::Theirs:
      return "theirs";
  }
  return "manual";
}

std::optional<MergeStrategy> merge_strategy_from_string(std::string_view name) {
  if (name == "manual") return MergeStrategy::Manual;
  if (name == "ours") return MergeStrategy::Ours;
  if (name == "theirs") return MergeStrategy::Theirs;
  return std::nullopt;
}

std::string_view to_string(ConflictKind k) {
  switch (k) {
    case ConflictKind::Cell:
      return "cell";
    case ConflictKind::DeleteVsModify:
      return "delete-vs-modify";
    case ConflictKind::AddAdd:
      return "add-add";
  }
  return "cell";
}

CellTable flatten_chip(const std::string& chip, const CalibrationSnapshot& snapshot) {
  CellTable out;
  for (const auto& [id, q] : snapshot.qubits) {
    Row row;
    for (const auto& [k, v] : q.extras) row[k] = canonical_number(v);
    if (q.freq) row["freq"] = canonical_number(*q.freq);
    if (q.readfreq) row["readfreq"] = canonical_number(*q.readfreq);
    if (q.freq_ef) row["freq_ef"] = canonical_number(*q.freq_ef);
    out.emplace(RowKey{chip, TableKind::Qubit, id, 0}, std::move(row));
  }
  for (const auto& [name, g] : snapshot.gates) {
    for (std::size_t i = 0; i < g.pulses.size(); ++i) {
      Row row;
      const json pulse = to_json(g.pulses[i]);
      for (const auto& [k, v] : pulse.items()) row[k] = canonical_dump(v);
      out.emplace(RowKey{chip, TableKind::Gate, name, static_cast<int>(i)}, std::move(row));
    }
  }
  return out;
}

CellTable flatten(const ChipSnapshots& chips) {
  CellTable out;
  for (const auto& [chip, snapshot] : chips) out.merge(flatten_chip(chip, snapshot));
  return out;
}

CalibrationSnapshot rebuild_chip(const CellTable& rows, const std::string& chip) {
  json qubits = json::object();
  json gates = json::object();
  const auto first = rows.lower_bound(RowKey{chip, TableKind::Qubit, "", 0});
  for (auto it = first; it != rows.end() && it->first.chip == chip; ++it) {
    json body = json::object();
    for (const auto& [col, value] : it->second) body[col] = json::parse(value);
    if (it->first.table == TableKind::Qubit) {
      qubits[it->first.name] = std::move(body);
    } else {
      // Rows iterate in pulse-index order, so appending renumbers densely.
      gates[it->first.name].push_back(std::move(body));
    }
  }
  return parse_calibration(json{{"Qubits", std::move(qubits)}, {"Gates", std::move(gates)}});
}

namespace {

std::optional<CellValue> lookup(const CellTable& t, const CellAddress& a) {
  const auto row = t.find(a.row);
  if (row == t.end()) return std::nullopt;
  const auto cell = row->second.find(a.column);
  if (cell == row->second.end()) return std::nullopt;
  return cell->second;
}

void assign(CellTable& t, const CellAddress& a, const std::optional<CellValue>& v) {
  if (v) {
    t[a.row][a.column] = *v;
    return;
  }
  const auto row = t.find(a.row);
  if (row == t.end()) return;
  row->second.erase(a.column);
  if (row->second.empty()) t.erase(row);
}

std::set<CellAddress> addresses(const CellTable& t) {
  std::set<CellAddress> out;
  for (const auto& [key, row] : t) {
    for (const auto& [col, _] : row) out.insert(CellAddress{key, col});
  }
  return out;
}

ChipSnapshots rebuild_all(const CellTable& table, const std::set<std::string>& chips) {
  ChipSnapshots out;
  for (const auto& chip : chips) out.emplace(chip, rebuild_chip(table, chip));
  for (const auto& [key, _] : table) {
    if (!chips.count(key.chip)) throw Error(ErrorCode::InvalidMerge, "rows for absent chip " + key.chip);
  }
  return out;
}

}  // namespace

DiffSet compute_diff(const ChipSnapshots& from, const ChipSnapshots& to) {
  DiffSet d;
  for (const auto& [chip, _] : to) {
    if (!from.count(chip)) d.chips_added.push_back(chip);
  }
  for (const auto& [chip, _] : from) {
    if (!to.count(chip)) d.chips_removed.push_back(chip);
  }
  const CellTable a = flatten(from);
  const CellTable b = flatten(to);
  for (const auto& [key, row] : a) {
    const auto other = b.find(key);
    if (other == b.end()) {
      d.row_deletions.push_back({key, row});
      continue;
    }
    std::set<std::string> cols;
    for (const auto& [c, _] : row) cols.insert(c);
    for (const auto& [c, _] : other->second) cols.insert(c);
    for (const auto& col : cols) {
      const auto old_it = row.find(col);
      const auto new_it = other->second.find(col);
      std::optional<CellValue> old_v, new_v;
      if (old_it != row.end()) old_v = old_it->second;
      if (new_it != other->second.end()) new_v = new_it->second;
      if (old_v != new_v) d.cell_modifications.push_back({{key, col}, old_v, new_v});
    }
  }
  for (const auto& [key, row] : b) {
    if (!a.count(key)) d.row_additions.push_back({key, row});
  }
  return d;
}

ChipSnapshots apply_diff(const ChipSnapshots& base, const DiffSet& diff) {
  std::set<std::string> chips;
  for (const auto& [chip, _] : base) chips.insert(chip);
  for (const auto& chip : diff.chips_removed) {
    if (!chips.erase(chip)) throw Error(ErrorCode::InvalidMerge, "diff removes absent chip " + chip);
  }
  for (const auto& chip : diff.chips_added) {
    if (!chips.insert(chip).second) throw Error(ErrorCode::InvalidMerge, "diff adds present chip " + chip);
  }
  CellTable table = flatten(base);
  for (const auto& del : diff.row_deletions) {
    const auto it = table.find(del.key);
    if (it == table.end() || it->second != del.row) {
      throw Error(ErrorCode::InvalidMerge, "diff deletes a row that does not match the base");
    }
    table.erase(it);
  }
  for (const auto& add : diff.row_additions) {
    if (!table.emplace(add.key, add.row).second) {
      throw Error(ErrorCode::InvalidMerge, "diff adds a row that already exists");
    }
  }
  for (const auto& mod : diff.cell_modifications) {
    if (lookup(table, mod.address) != mod.old_value) {
      throw Error(ErrorCode::InvalidMerge, "diff modifies a cell whose old value does not match");
    }
    assign(table, mod.address, mod.new_value);
  }
  return rebuild_all(table, chips);
}

MergeOutcome merge_three_way(const ChipSnapshots& base, const ChipSnapshots& ours, const ChipSnapshots& theirs,
                             MergeStrategy strategy, const Resolutions& resolutions) {
  std::set<std::string> chips;
  for (const auto& [chip, _] : ours) chips.insert(chip);
  for (const auto& [chip, _] : theirs) chips.insert(chip);

  const CellTable b = flatten(base);
  const CellTable o = flatten(ours);
  const CellTable t = flatten(theirs);
  std::set<CellAddress> all = addresses(b);
  all.merge(addresses(o));
  all.merge(addresses(t));

  MergeOutcome outcome;
  CellTable result;
  for (const auto& addr : all) {
    const auto bv = lookup(b, addr);
    const auto ov = lookup(o, addr);
    const auto tv = lookup(t, addr);
    std::optional<CellValue> chosen;
    if (ov == tv || tv == bv) {
      chosen = ov;
    } else if (ov == bv) {
      chosen = tv;
    } else {
      Conflict c{addr, ConflictKind::Cell, bv, ov, tv};
      if (!bv) {
        c.kind = ConflictKind::AddAdd;
      } else if (!ov || !tv) {
        c.kind = ConflictKind::DeleteVsModify;
      }
      outcome.conflicts.push_back(c);
      if (const auto r = resolutions.find(addr); r != resolutions.end()) {
        chosen = r->second;
      } else if (strategy == MergeStrategy::Ours) {
        chosen = ov;
      } else if (strategy == MergeStrategy::Theirs) {
        chosen = tv;
      } else {
        outcome.unresolved.push_back(std::move(c));
        continue;
      }
    }
    assign(result, addr, chosen);
  }
  if (!outcome.unresolved.empty()) return outcome;
  try {
    outcome.merged = rebuild_all(result, chips);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidMerge) throw;
    throw Error(ErrorCode::InvalidMerge, std::string("merged calibration is invalid: ") + e.what());
  }
  return outcome;
}

json cell_to_json(const std::optional<CellValue>& value) {
  if (!value) return nullptr;
  return json::parse(*value);
}

std::optional<CellValue> cell_from_json(const json& value) {
  if (value.is_null()) return std::nullopt;
  return canonical_dump(value);
}

namespace {

void put_row_key(json& out, const RowKey& key) {
  out["chip"] = key.chip;
  out["table"] = to_string(key.table);
  if (key.table == TableKind::Qubit) {
    out["qubit"] = key.name;
  } else {
    out["gate"] = key.name;
    out["pulse"] = key.pulse;
  }
}

json row_to_json(const RowChange& change) {
  json out = json::object();
  put_row_key(out, change.key);
  json row = json::object();
  for (const auto& [col, v] : change.row) row[col] = json::parse(v);
  out["row"] = std::move(row);
  return out;
}

}  // namespace

json to_json(const CellAddress& address) {
  json out = json::object();
  put_row_key(out, address.row);
  out["column"] = address.column;
  return out;
}

CellAddress cell_address_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "cell address must be an object");
  try {
    CellAddress a;
    a.row.chip = j.at("chip").get<std::string>();
    const std::string table = j.at("table").get<std::string>();
    if (table == "qubit") {
      a.row.table = TableKind::Qubit;
      a.row.name = j.at("qubit").get<std::string>();
    } else if (table == "gate") {
      a.row.table = TableKind::Gate;
      a.row.name = j.at("gate").get<std::string>();
      a.row.pulse = j.at("pulse").get<int>();
    } else {
      throw Error(ErrorCode::BadRequest, "cell address table must be \"qubit\" or \"gate\"");
    }
    a.column = j.at("column").get<std::string>();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("bad cell address: ") + e.what());
  }
}

json to_json(const DiffSet& diff) {
  json adds = json::array(), dels = json::array(), mods = json::array();
  for (const auto& r : diff.row_additions) adds.push_back(row_to_json(r));
  for (const auto& r : diff.row_deletions) dels.push_back(row_to_json(r));
  for (const auto& m : diff.cell_modifications) {
    mods.push_back({{"address", to_json(m.address)}, {"old", cell_to_json(m.old_value)}, {"new", cell_to_json(m.new_value)}});
  }
  return {{"chips_added", diff.chips_added},
          {"chips_removed", diff.chips_removed},
          {"row_additions", std::move(adds)},
          {"row_deletions", std::move(dels)},
          {"cell_modifications", std::move(mods)}};
}

json to_json(const Conflict& c) {
  return {{"address", to_json(c.address)},
          {"kind", to_string(c.kind)},
          {"base", cell_to_json(c.base)},
          {"ours", cell_to_json(c.ours)},
          {"theirs", cell_to_json(c.theirs)}};
}

json conflict_report_json(const std::vector<Conflict>& conflicts) {
  json list = json::array();
  for (const auto& c : conflicts) list.push_back(to_json(c));
  return {{"conflicts", std::move(list)}};
}

Resolutions resolutions_from_json(const json& j) {
  Resolutions out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw Error(ErrorCode::BadRequest, "resolutions must be an array of {address, value}");
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("address")) {
      throw Error(ErrorCode::BadRequest, "resolution entries need an \"address\"");
    }
    out[cell_address_from_json(item.at("address"))] = cell_from_json(item.value("value", json(nullptr)));
  }
  return out;
}

}  // namespace qcsv
