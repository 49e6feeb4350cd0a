// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <stdlib.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "qcsv/calibration.hpp"
#include "qcsv/error.hpp"

namespace qcsv::testing {

namespace fs = std::filesystem;

const char* const kSampleCalibration = R"({"Qubits": {
  "Q0": {"freq": 4100733234.438625,
        "readfreq": 6554300000.0,
        "freq_ef": 4182558902.85729}},
"Gates": {
  "Q0X90": [{"freq": "Q0.freq",
             "phase": 0.0,
             "dest": "Q0.qdrv",
             "twidht": 3.2e-08,
             "t0": 0.0,
             "amp": 0.50617256269105,
             "env": [{"env_func": "cos_edge_square", "paradict": {"ramp_fraction":0.25}}]}]}})";

const char* const kSampleCharacterization = R"({ "Q0": { "prep0read1": {
  "enddatetime": "20220526_182729_656142",
  "mean": 0.00290175,
  "startdatetime": "20220526_180730_062549",
  "std": 1.8719794650678421},
  "t2spinecho": {
    "enddatetime": "20220526_182729_656142",
    "mean": 8.3675e-05,
    "startdatetime": "20220526_180730_062549",
    "std": 6.59268344454669e-06}}})";

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "qcsv-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

const char* const kChipPool[] = {"X4Y2", "X4Y3", "X5Y1"};
const char* const kQubitProps[] = {"freq", "readfreq", "freq_ef"};
const char* const kPulseFields[] = {"freq", "phase", "dest", "twidth", "t0", "amp", "env", "sigma"};

// Small value pools so that independent edits collide often.
const double kFreqs[] = {4100733234.438625, 4.2e9, 5.1e9, 6554300000.0, 4182558902.85729};
const double kAmps[] = {0.50617256269105, 0.1, 0.25, 0.51, 1.0};
const double kPhases[] = {0.0, 1.5707963267948966, -3.141592653589793};
const double kTimes[] = {0.0, 3.2e-08, 1.6e-08, 2e-06, 1e-09};

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
bool coin(Rng& rng, int percent) { return static_cast<int>(rng() % 100) < percent; }

template <typename T, std::size_t N>
const T& choose(Rng& rng, const T (&arr)[N]) {
  return arr[pick(rng, N)];
}

std::string qname(int i) { return "Q" + std::to_string(i); }

std::string random_gate_name(Rng& rng, int max_qubits) {
  const int a = static_cast<int>(pick(rng, max_qubits));
  switch (pick(rng, 6)) {
    case 0:
    case 1:
      return qname(a) + "X90";
    case 2:
      return qname(a) + "read";
    case 3: {
      const int b = (a + 1 + static_cast<int>(pick(rng, max_qubits - 1))) % max_qubits;
      return qname(a) + qname(b) + "CR";
    }
    case 4:
      return qname(a) + "Y-90";
    default:
      return "M" + std::to_string(a) + "mark";
  }
}

/// Qubit-property references available in a chip document.
std::vector<std::string> ref_targets(const json& doc) {
  std::vector<std::string> out;
  for (const auto& [q, body] : doc["Qubits"].items()) {
    for (const auto& [k, _] : body.items()) out.push_back(q + "." + k);
  }
  return out;
}

bool is_referenced(const json& doc, const std::string& qubit, const std::string& prop) {
  for (const auto& [_, pulses] : doc["Gates"].items()) {
    for (const auto& p : pulses) {
      if (!p.contains("freq") || !p["freq"].is_string()) continue;
      const std::string r = p["freq"].get<std::string>();
      const auto dot = r.find('.');
      if (r.substr(0, dot) == qubit && (prop.empty() || r.substr(dot + 1) == prop)) return true;
    }
  }
  return false;
}

json random_field_value(Rng& rng, const std::string& field, const json& doc) {
  if (field == "freq") {
    const auto targets = ref_targets(doc);
    if (!targets.empty() && coin(rng, 40)) return targets[pick(rng, targets.size())];
    return choose(rng, kFreqs);
  }
  if (field == "amp") return choose(rng, kAmps);
  if (field == "phase") return choose(rng, kPhases);
  if (field == "twidth" || field == "t0") return choose(rng, kTimes);
  if (field == "dest") return "Q" + std::to_string(pick(rng, 3)) + (coin(rng, 50) ? ".qdrv" : ".rdrv");
  if (field == "env") {
    return json::array({{{"env_func", coin(rng, 70) ? "cos_edge_square" : "DRAG"},
                         {"paradict", {{"ramp_fraction", coin(rng, 50) ? 0.25 : 0.1}}}}});
  }
  return coin(rng, 50) ? 4.0 : 2.5;  // numeric extra ("sigma")
}

json random_pulse(Rng& rng, const json& doc) {
  json p = json::object();
  for (const char* f : kPulseFields) {
    if (coin(rng, 55)) p[f] = random_field_value(rng, f, doc);
  }
  if (p.empty()) p["amp"] = choose(rng, kAmps);
  return p;
}

json random_qubit(Rng& rng) {
  json q = json::object();
  for (const char* k : kQubitProps) {
    if (coin(rng, 70)) q[k] = choose(rng, kFreqs);
  }
  if (q.empty()) q["freq"] = choose(rng, kFreqs);
  return q;
}

json random_chip(Rng& rng, const GenLimits& limits) {
  json doc{{"Qubits", json::object()}, {"Gates", json::object()}};
  const int nq = static_cast<int>(pick(rng, limits.max_qubits + 1));
  for (int i = 0; i < nq; ++i) doc["Qubits"][qname(i)] = random_qubit(rng);
  const int ng = static_cast<int>(pick(rng, limits.max_gates + 1));
  for (int i = 0; i < ng; ++i) {
    const std::string name = random_gate_name(rng, limits.max_qubits);
    if (doc["Gates"].contains(name)) continue;
    json pulses = json::array();
    const int np = 1 + static_cast<int>(pick(rng, 2));
    for (int j = 0; j < np; ++j) pulses.push_back(random_pulse(rng, doc));
    doc["Gates"][name] = std::move(pulses);
  }
  return doc;
}

template <typename J>
std::string random_key(Rng& rng, const J& obj) {
  auto it = obj.begin();
  std::advance(it, pick(rng, obj.size()));
  return it.key();
}

/// One edit; returns false if the chosen edit did not apply.
bool edit_once(Rng& rng, json& tree, const GenLimits& limits) {
  const int op = static_cast<int>(pick(rng, 14));
  if (op == 13) {
    if (static_cast<int>(tree.size()) >= limits.max_chips) return false;
    const std::string chip = choose(rng, kChipPool);
    if (tree.contains(chip)) return false;
    tree[chip] = random_chip(rng, limits);
    return true;
  }
  json& doc = tree[random_key(rng, tree)];
  json& qubits = doc["Qubits"];
  json& gates = doc["Gates"];
  switch (op) {
    case 0:
    case 1:
    case 2: {  // set a qubit property
      if (qubits.empty()) return false;
      qubits[random_key(rng, qubits)][choose(rng, kQubitProps)] = choose(rng, kFreqs);
      return true;
    }
    case 3: {  // drop a qubit property
      if (qubits.empty()) return false;
      const std::string q = random_key(rng, qubits);
      const std::string k = random_key(rng, qubits[q]);
      if (is_referenced(doc, q, k)) return false;
      qubits[q].erase(k);
      if (qubits[q].empty()) qubits.erase(q);
      return true;
    }
    case 4: {  // add a qubit
      const std::string q = qname(static_cast<int>(pick(rng, limits.max_qubits)));
      if (qubits.contains(q)) return false;
      qubits[q] = random_qubit(rng);
      return true;
    }
    case 5: {  // delete a qubit
      if (qubits.empty()) return false;
      const std::string q = random_key(rng, qubits);
      if (is_referenced(doc, q, "")) return false;
      qubits.erase(q);
      return true;
    }
    case 6:
    case 7:
    case 8: {  // set a pulse field
      if (gates.empty()) return false;
      json& pulses = gates[random_key(rng, gates)];
      const std::string f = choose(rng, kPulseFields);
      pulses[pick(rng, pulses.size())][f] = random_field_value(rng, f, doc);
      return true;
    }
    case 9: {  // drop a pulse field
      if (gates.empty()) return false;
      const std::string g = random_key(rng, gates);
      json& pulse = gates[g][pick(rng, gates[g].size())];
      if (pulse.size() <= 1) return false;
      pulse.erase(random_key(rng, pulse));
      return true;
    }
    case 10: {  // append a pulse
      if (gates.empty()) return false;
      const std::string g = random_key(rng, gates);
      gates[g].push_back(random_pulse(rng, doc));
      return true;
    }
    case 11: {  // drop the last pulse, or the gate with it
      if (gates.empty()) return false;
      const std::string g = random_key(rng, gates);
      if (gates[g].size() <= 1) {
        gates.erase(g);
      } else {
        gates[g].erase(gates[g].size() - 1);
      }
      return true;
    }
    default: {  // add a gate
      if (static_cast<int>(gates.size()) >= limits.max_gates) return false;
      const std::string g = random_gate_name(rng, limits.max_qubits);
      if (gates.contains(g)) return false;
      gates[g] = json::array({random_pulse(rng, doc)});
      return true;
    }
  }
}

// ---- oracle ----

using OKey = std::tuple<std::string, std::string, std::string, int>;
using OTable = std::map<OKey, std::map<std::string, json>>;

OTable otable(const json& tree) {
  OTable out;
  for (const auto& [chip, doc] : tree.items()) {
    for (const auto& [q, body] : doc.at("Qubits").items()) {
      for (const auto& [k, v] : body.items()) out[{chip, "qubit", q, 0}][k] = v;
    }
    for (const auto& [g, pulses] : doc.at("Gates").items()) {
      for (std::size_t i = 0; i < pulses.size(); ++i) {
        for (const auto& [k, v] : pulses[i].items()) out[{chip, "gate", g, static_cast<int>(i)}][k] = v;
      }
    }
  }
  return out;
}

std::optional<json> cell(const OTable& t, const OAddr& a) {
  const auto row = t.find({std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a)});
  if (row == t.end()) return std::nullopt;
  const auto c = row->second.find(std::get<4>(a));
  if (c == row->second.end()) return std::nullopt;
  return std::optional<json>(std::in_place, c->second);
}

std::set<OAddr> all_addresses(std::initializer_list<const OTable*> tables) {
  std::set<OAddr> out;
  for (const OTable* t : tables) {
    for (const auto& [k, row] : *t) {
      for (const auto& [col, _] : row) out.insert({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), col});
    }
  }
  return out;
}

}  // namespace

json random_tree(Rng& rng, const GenLimits& limits) {
  json tree = json::object();
  const int n = 1 + static_cast<int>(pick(rng, limits.max_chips));
  std::vector<std::string> pool(std::begin(kChipPool), std::end(kChipPool));
  std::shuffle(pool.begin(), pool.end(), rng);
  for (int i = 0; i < n; ++i) tree[pool[i]] = random_chip(rng, limits);
  return tree;
}

void random_edits(Rng& rng, json& tree, const GenLimits& limits, int edits) {
  for (int done = 0, tries = 0; done < edits && tries < 200; ++tries) {
    if (edit_once(rng, tree, limits)) ++done;
  }
}

ChipSnapshots to_snapshots(const json& tree) {
  ChipSnapshots out;
  for (const auto& [chip, doc] : tree.items()) out.emplace(chip, parse_calibration(doc));
  return out;
}

json to_tree_json(const ChipSnapshots& chips) {
  json out = json::object();
  for (const auto& [chip, snap] : chips) out[chip] = to_json(snap);
  return out;
}

OracleMerge oracle_merge(const json& base, const json& ours, const json& theirs, const std::string& strategy,
                         const std::map<OAddr, std::optional<json>>& resolutions) {
  const OTable b = otable(base), o = otable(ours), t = otable(theirs);
  OracleMerge out;
  OTable merged;
  for (const OAddr& a : all_addresses({&b, &o, &t})) {
    const auto bv = cell(b, a), ov = cell(o, a), tv = cell(t, a);
    std::optional<json> v;
    if (ov == tv) {
      v = ov;
    } else if (ov == bv) {
      v = tv;
    } else if (tv == bv) {
      v = ov;
    } else {
      out.conflicts[a] = !bv ? "add-add" : (!ov || !tv) ? "delete-vs-modify" : "cell";
      if (const auto r = resolutions.find(a); r != resolutions.end()) {
        v = r->second;
      } else if (strategy == "ours") {
        v = ov;
      } else if (strategy == "theirs") {
        v = tv;
      } else {
        out.unresolved.insert(a);
        continue;
      }
    }
    if (v) merged[{std::get<0>(a), std::get<1>(a), std::get<2>(a), std::get<3>(a)}][std::get<4>(a)] = *v;
  }
  if (!out.unresolved.empty()) return out;

  for (const auto& [chip, _] : ours.items()) out.merged[chip] = {{"Qubits", json::object()}, {"Gates", json::object()}};
  for (const auto& [chip, _] : theirs.items()) out.merged[chip] = {{"Qubits", json::object()}, {"Gates", json::object()}};
  // Map iteration is ordered by pulse index, so appending compacts gaps.
  for (const auto& [key, row] : merged) {
    const auto& [chip, table, name, pulse] = key;
    json body(row);
    if (table == "qubit") {
      out.merged[chip]["Qubits"][name] = body;
    } else {
      out.merged[chip]["Gates"][name].push_back(body);
    }
  }
  for (const auto& [chip, doc] : out.merged.items()) {
    for (const auto& [_, pulses] : doc["Gates"].items()) {
      for (const auto& p : pulses) {
        if (!p.contains("freq") || !p["freq"].is_string()) continue;
        const std::string r = p["freq"].get<std::string>();
        const std::string q = r.substr(0, r.find('.'));
        const std::string k = r.substr(r.find('.') + 1);
        if (!doc["Qubits"].contains(q) || !doc["Qubits"][q].contains(k)) out.invalid = true;
      }
    }
  }
  return out;
}

OracleDiffCounts oracle_diff(const json& from, const json& to) {
  const OTable a = otable(from), b = otable(to);
  OracleDiffCounts out;
  for (const auto& [k, row] : b) {
    if (!a.count(k)) ++out.rows_added;
  }
  for (const auto& [k, row] : a) {
    const auto other = b.find(k);
    if (other == b.end()) {
      ++out.rows_removed;
      continue;
    }
    std::set<std::string> cols;
    for (const auto& [c, _] : row) cols.insert(c);
    for (const auto& [c, _] : other->second) cols.insert(c);
    for (const auto& c : cols) {
      const auto x = row.find(c);
      const auto y = other->second.find(c);
      const bool same = x != row.end() && y != other->second.end() && x->second == y->second;
      if (!same) ++out.cells_modified;
    }
  }
  return out;
}

OAddr to_oaddr(const CellAddress& a) {
  return {a.row.chip, std::string(to_string(a.row.table)), a.row.name, a.row.pulse, a.column};
}

CellAddress from_oaddr(const OAddr& a) {
  return {{std::get<0>(a), std::get<1>(a) == "qubit" ? TableKind::Qubit : TableKind::Gate, std::get<2>(a),
           std::get<3>(a)},
          std::get<4>(a)};
}

}  // namespace qcsv::testing

namespace qcsv::testing {

namespace {

std::string describe(const OAddr& a) {
  return std::get<0>(a) + "/" + std::get<1>(a) + "/" + std::get<2>(a) + "[" + std::to_string(std::get<3>(a)) + "]." +
         std::get<4>(a);
}

std::string kind_name(ConflictKind k) {
  switch (k) {
    case ConflictKind::Cell:
      return "cell";
    case ConflictKind::DeleteVsModify:
      return "delete-vs-modify";
    case ConflictKind::AddAdd:
      return "add-add";
  }
  return "?";
}

}  // namespace

std::string check_merge_fixture(std::uint64_t seed, const GenLimits& limits) {
  Rng rng(seed);
  const json base = random_tree(rng, limits);
  json ours = base, theirs = base;
  random_edits(rng, ours, limits, static_cast<int>(rng() % (limits.max_edits + 1)));
  random_edits(rng, theirs, limits, static_cast<int>(rng() % (limits.max_edits + 1)));
  const char* strategies[] = {"manual", "ours", "theirs"};
  const std::string strategy = strategies[rng() % 3];

  // Pre-compute the conflict set once (strategy-independent) to pick resolutions.
  const OracleMerge probe = oracle_merge(base, ours, theirs, "ours", {});
  std::map<OAddr, std::optional<json>> oracle_res;
  Resolutions impl_res;
  for (const auto& [addr, _] : probe.conflicts) {
    if (rng() % 100 >= 60) continue;
    std::optional<json> v;
    switch (rng() % 3) {
      case 0: {
        // whatever the "theirs" side holds at addr (may be absent)
        const auto& tree = theirs;
        const auto& [chip, table, name, pulse, col] = addr;
        const json* node = nullptr;
        if (tree.contains(chip)) {
          const json& doc = tree[chip];
          if (table == "qubit" && doc["Qubits"].contains(name)) node = &doc["Qubits"][name];
          if (table == "gate" && doc["Gates"].contains(name) && static_cast<int>(doc["Gates"][name].size()) > pulse) {
            node = &doc["Gates"][name][pulse];
          }
        }
        if (node && node->contains(col)) v.emplace((*node)[col]);
        break;
      }
      case 1:  // a fresh value of the column's type
        if (std::get<1>(addr) == "qubit") {
          v.emplace(0.125);
        } else {
          v.emplace(random_field_value(rng, std::get<4>(addr), json{{"Qubits", json::object()}}));
        }
        break;
      default:
        break;  // explicit removal
    }
    oracle_res[addr] = v;
    impl_res[from_oaddr(addr)] = v ? std::optional<CellValue>(cell_from_json(*v)) : std::nullopt;
  }

  const OracleMerge want = oracle_merge(base, ours, theirs, strategy, oracle_res);
  const MergeStrategy s = *merge_strategy_from_string(strategy);
  MergeOutcome got;
  bool invalid = false;
  std::string invalid_reason;
  try {
    got = merge_three_way(to_snapshots(base), to_snapshots(ours), to_snapshots(theirs), s, impl_res);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidMerge) return std::string("unexpected error: ") + e.what();
    invalid = true;
    invalid_reason = e.what();
  }

  std::map<OAddr, std::string> got_conflicts;
  for (const auto& c : got.conflicts) got_conflicts[to_oaddr(c.address)] = kind_name(c.kind);
  std::set<OAddr> got_unresolved;
  for (const auto& c : got.unresolved) got_unresolved.insert(to_oaddr(c.address));

  if (!invalid && got_conflicts != want.conflicts) {
    std::string msg = "conflict sets differ (strategy " + strategy + "):";
    for (const auto& [a, k] : want.conflicts) {
      if (!got_conflicts.count(a)) msg += " missing " + describe(a) + "(" + k + ")";
    }
    for (const auto& [a, k] : got_conflicts) {
      if (!want.conflicts.count(a)) msg += " extra " + describe(a) + "(" + k + ")";
      else if (want.conflicts.at(a) != k) msg += " kind " + describe(a) + " " + k + "!=" + want.conflicts.at(a);
    }
    return msg;
  }
  if (!want.unresolved.empty()) {
    if (invalid) return "implementation raised InvalidMerge where conflicts were unresolved";
    if (got_unresolved != want.unresolved) return "unresolved sets differ";
    if (got.merged) return "merged tree produced despite unresolved conflicts";
    return {};
  }
  if (want.invalid != invalid) {
    return std::string("validity differs: oracle ") + (want.invalid ? "invalid" : "valid") + ", implementation " +
           (invalid ? "invalid (" + invalid_reason + ")" : "valid");
  }
  if (invalid) return {};
  if (!got.merged) return "no merged tree";
  const json merged = to_tree_json(*got.merged);
  if (merged != want.merged) return "merged trees differ:\n" + merged.dump() + "\n" + want.merged.dump();
  return {};
}

std::string check_diff_pair(std::uint64_t seed, const GenLimits& limits) {
  Rng rng(seed);
  const json a = random_tree(rng, limits);
  json b;
  if (rng() % 2) {
    b = a;
    random_edits(rng, b, limits, 1 + static_cast<int>(rng() % 8));
  } else {
    b = random_tree(rng, limits);
  }
  const ChipSnapshots sa = to_snapshots(a), sb = to_snapshots(b);
  const DiffSet ab = compute_diff(sa, sb);
  const DiffSet ba = compute_diff(sb, sa);

  if (apply_diff(sa, ab) != sb) return "apply(diff(a,b), a) != b";
  if (apply_diff(sb, ba) != sa) return "apply(diff(b,a), b) != a";
  if (!compute_diff(sa, sa).empty()) return "diff(a,a) not empty";
  if (ab.empty() != (a == b)) return "emptiness disagrees with equality";

  if (ab.chips_added != ba.chips_removed || ab.chips_removed != ba.chips_added) return "chip lists not symmetric";
  const auto keys = [](const std::vector<RowChange>& v) {
    std::vector<std::pair<RowKey, Row>> out;
    for (const auto& r : v) out.emplace_back(r.key, r.row);
    std::sort(out.begin(), out.end());
    return out;
  };
  if (keys(ab.row_additions) != keys(ba.row_deletions)) return "row additions/deletions not symmetric";
  if (keys(ab.row_deletions) != keys(ba.row_additions)) return "row deletions/additions not symmetric";
  std::map<CellAddress, std::pair<std::optional<CellValue>, std::optional<CellValue>>> fwd, rev;
  for (const auto& c : ab.cell_modifications) fwd[c.address] = {c.old_value, c.new_value};
  for (const auto& c : ba.cell_modifications) rev[c.address] = {c.new_value, c.old_value};
  if (fwd != rev || fwd.size() != ab.cell_modifications.size()) return "cell modifications not symmetric";

  // No address appears in two categories.
  std::set<RowKey> rows;
  for (const auto& r : ab.row_additions) rows.insert(r.key);
  for (const auto& r : ab.row_deletions) {
    if (!rows.insert(r.key).second) return "row both added and deleted";
  }
  for (const auto& c : ab.cell_modifications) {
    if (rows.count(c.address.row)) return "modified cell inside an added/deleted row";
  }

  const OracleDiffCounts want = oracle_diff(a, b);
  if (want.rows_added != ab.row_additions.size() || want.rows_removed != ab.row_deletions.size() ||
      want.cells_modified != ab.cell_modifications.size()) {
    return "counts differ from the exhaustive join";
  }
  return {};
}

}  // namespace qcsv::testing
