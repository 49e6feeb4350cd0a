// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/calibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "qcsv/canonical_json.hpp"
#include "qcsv/error.hpp"

namespace qcsv {

using nlohmann::json;

std::string_view to_string(QubitProperty p) {
  switch (p) {
    case QubitProperty::Freq:
      return "freq";
    case QubitProperty::ReadFreq:
      return "readfreq";
    case QubitProperty::FreqEf:
      return "freq_ef";
  }
  return "freq";
}

std::optional<QubitProperty> qubit_property_from_string(std::string_view name) {
  if (name == "freq") return QubitProperty::Freq;
  if (name == "readfreq") return QubitProperty::ReadFreq;
  if (name == "freq_ef") return QubitProperty::FreqEf;
  return std::nullopt;
}

std::string QubitRef::str() const { return qubit_id + "." + std::string(to_string(property)); }

std::optional<double> QubitRecord::get(QubitProperty p) const {
  switch (p) {
    case QubitProperty::Freq:
      return freq;
    case QubitProperty::ReadFreq:
      return readfreq;
    case QubitProperty::FreqEf:
      return freq_ef;
  }
  return std::nullopt;
}

namespace {

double require_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidField, where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidField, where + ": number is not finite");
  return d;
}

QubitRef parse_ref(const std::string& text, const std::string& where) {
  const auto dot = text.rfind('.');
  if (dot == std::string::npos) throw Error(ErrorCode::InvalidField, where + ": reference must be <qubit>.<property>");
  QubitRef ref;
  ref.qubit_id = text.substr(0, dot);
  const auto prop = qubit_property_from_string(std::string_view(text).substr(dot + 1));
  if (ref.qubit_id.empty()) throw Error(ErrorCode::InvalidField, where + ": reference has empty qubit id");
  if (!prop) throw Error(ErrorCode::InvalidField, where + ": unknown reference property in \"" + text + "\"");
  ref.property = *prop;
  return ref;
}

QubitRecord parse_qubit(const std::string& id, const json& body) {
  const std::string where = "Qubits." + id;
  if (id.empty()) throw Error(ErrorCode::InvalidField, "empty qubit id");
  if (!body.is_object()) throw Error(ErrorCode::InvalidField, where + ": expected an object");
  if (body.empty()) throw Error(ErrorCode::InvalidField, where + ": qubit has no properties");
  QubitRecord q;
  q.qubit_id = id;
  for (const auto& [key, value] : body.items()) {
    const double d = require_number(value, where + "." + key);
    if (key == "freq") {
      q.freq = d;
    } else if (key == "readfreq") {
      q.readfreq = d;
    } else if (key == "freq_ef") {
      q.freq_ef = d;
    } else {
      q.extras.emplace(key, d);
    }
  }
  return q;
}

std::vector<EnvelopeSpec> parse_env(const json& v, const std::string& where) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidField, where + ": env must be an array");
  std::vector<EnvelopeSpec> env;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& e = v[i];
    if (!e.is_object()) throw Error(ErrorCode::InvalidField, at + ": expected an object");
    EnvelopeSpec spec;
    for (const auto& [key, value] : e.items()) {
      if (key == "env_func") {
        if (!value.is_string() || value.get_ref<const std::string&>().empty()) {
          throw Error(ErrorCode::InvalidField, at + ".env_func: expected a non-empty string");
        }
        spec.env_func = value.get<std::string>();
      } else if (key == "paradict") {
        if (!value.is_object()) throw Error(ErrorCode::InvalidField, at + ".paradict: expected an object");
        for (const auto& [pk, pv] : value.items()) spec.paradict.emplace(pk, require_number(pv, at + ".paradict." + pk));
      } else {
        throw Error(ErrorCode::InvalidField, at + ": unknown envelope field \"" + key + "\"");
      }
    }
    if (spec.env_func.empty()) throw Error(ErrorCode::InvalidField, at + ": missing env_func");
    env.push_back(std::move(spec));
  }
  return env;
}

GatePulse parse_pulse(const json& body, const std::string& where) {
  if (!body.is_object()) throw Error(ErrorCode::InvalidField, where + ": expected an object");
  if (body.empty()) throw Error(ErrorCode::InvalidField, where + ": pulse has no fields");
  if (body.contains("twidth") && body.contains("twidht")) {
    throw Error(ErrorCode::InvalidField, where + ": both twidth and twidht given");
  }
  GatePulse p;
  for (const auto& [key, value] : body.items()) {
    const std::string at = where + "." + key;
    if (key == "freq") {
      if (value.is_string()) {
        p.freq = parse_ref(value.get<std::string>(), at);
      } else {
        p.freq = require_number(value, at);
      }
    } else if (key == "phase") {
      p.phase = require_number(value, at);
    } else if (key == "dest") {
      if (!value.is_string()) throw Error(ErrorCode::InvalidField, at + ": expected a string");
      p.dest = value.get<std::string>();
    } else if (key == "twidth" || key == "twidht") {
      p.twidth = require_number(value, at);
    } else if (key == "t0") {
      p.t0 = require_number(value, at);
    } else if (key == "amp") {
      p.amp = require_number(value, at);
    } else if (key == "env") {
      p.env = parse_env(value, at);
    } else if (value.is_number()) {
      p.extras.emplace(key, require_number(value, at));
    } else {
      throw Error(ErrorCode::InvalidField, at + ": unknown non-numeric gate field");
    }
  }
  return p;
}

void check_pulse(const GatePulse& p, const std::string& where) {
  if (p.twidth && *p.twidth < 0) throw Error(ErrorCode::InvalidField, where + ".twidth: negative");
  if (p.t0 && *p.t0 < 0) throw Error(ErrorCode::InvalidField, where + ".t0: negative");
  if (p.dest && p.dest->empty()) throw Error(ErrorCode::InvalidField, where + ".dest: empty");
}

bool finite_or_absent(const std::optional<double>& v) { return !v || std::isfinite(*v); }

}  // namespace

void validate(const CalibrationSnapshot& snapshot) {
  for (const auto& [id, q] : snapshot.qubits) {
    if (id.empty() || q.qubit_id != id) throw Error(ErrorCode::InvalidField, "qubit key mismatch: " + id);
    if (!q.freq && !q.readfreq && !q.freq_ef && q.extras.empty()) {
      throw Error(ErrorCode::InvalidField, "Qubits." + id + ": qubit has no properties");
    }
    if (!finite_or_absent(q.freq) || !finite_or_absent(q.readfreq) || !finite_or_absent(q.freq_ef)) {
      throw Error(ErrorCode::InvalidField, "Qubits." + id + ": non-finite frequency");
    }
    for (const auto& [k, v] : q.extras) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidField, "Qubits." + id + "." + k + ": non-finite");
    }
  }
  for (const auto& [name, g] : snapshot.gates) {
    if (name.empty() || g.gate_name != name) throw Error(ErrorCode::InvalidField, "gate key mismatch: " + name);
    if (g.pulses.empty()) throw Error(ErrorCode::InvalidField, "Gates." + name + ": no pulses");
    for (std::size_t i = 0; i < g.pulses.size(); ++i) {
      const GatePulse& p = g.pulses[i];
      const std::string where = "Gates." + name + "[" + std::to_string(i) + "]";
      if (p == GatePulse{}) throw Error(ErrorCode::InvalidField, where + ": pulse has no fields");
      check_pulse(p, where);
      if (p.freq) {
        if (const auto* ref = std::get_if<QubitRef>(&*p.freq)) {
          const auto it = snapshot.qubits.find(ref->qubit_id);
          if (it == snapshot.qubits.end() || !it->second.get(ref->property)) {
            throw Error(ErrorCode::DanglingRef, where + ".freq: reference " + ref->str() + " does not resolve");
          }
        }
      }
    }
  }
}

CalibrationSnapshot parse_calibration(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedDocument, "calibration document must be a JSON object");
  const auto qubits = doc.find("Qubits");
  const auto gates = doc.find("Gates");
  if (qubits == doc.end() || !qubits->is_object()) {
    throw Error(ErrorCode::MalformedDocument, "missing top-level \"Qubits\" object");
  }
  if (gates == doc.end() || !gates->is_object()) {
    throw Error(ErrorCode::MalformedDocument, "missing top-level \"Gates\" object");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "Qubits" && key != "Gates") {
      throw Error(ErrorCode::InvalidField, "unknown top-level key \"" + key + "\"");
    }
  }

  CalibrationSnapshot s;
  for (const auto& [id, body] : qubits->items()) s.qubits.emplace(id, parse_qubit(id, body));
  for (const auto& [name, body] : gates->items()) {
    if (name.empty()) throw Error(ErrorCode::InvalidField, "empty gate name");
    if (!body.is_array() || body.empty()) {
      throw Error(ErrorCode::InvalidField, "Gates." + name + ": expected a non-empty pulse array");
    }
    GateRecord g;
    g.gate_name = name;
    for (std::size_t i = 0; i < body.size(); ++i) {
      g.pulses.push_back(parse_pulse(body[i], "Gates." + name + "[" + std::to_string(i) + "]"));
    }
    s.gates.emplace(name, std::move(g));
  }
  validate(s);
  return s;
}

CalibrationSnapshot parse_calibration(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("invalid JSON: ") + e.what());
  }
  return parse_calibration(doc);
}

json to_json(const ScalarOrRef& value) {
  if (const auto* ref = std::get_if<QubitRef>(&value)) return ref->str();
  return std::get<double>(value);
}

json to_json(const std::vector<EnvelopeSpec>& env) {
  json out = json::array();
  for (const auto& e : env) {
    json paradict = json::object();
    for (const auto& [k, v] : e.paradict) paradict[k] = v;
    out.push_back({{"env_func", e.env_func}, {"paradict", std::move(paradict)}});
  }
  return out;
}

json to_json(const GatePulse& p) {
  json out = json::object();
  for (const auto& [k, v] : p.extras) out[k] = v;
  if (p.freq) out["freq"] = to_json(*p.freq);
  if (p.phase) out["phase"] = *p.phase;
  if (p.dest) out["dest"] = *p.dest;
  if (p.twidth) out["twidth"] = *p.twidth;
  if (p.t0) out["t0"] = *p.t0;
  if (p.amp) out["amp"] = *p.amp;
  if (p.env) out["env"] = to_json(*p.env);
  return out;
}

json to_json(const CalibrationSnapshot& s) {
  json qubits = json::object();
  for (const auto& [id, q] : s.qubits) {
    json body = json::object();
    for (const auto& [k, v] : q.extras) body[k] = v;
    if (q.freq) body["freq"] = *q.freq;
    if (q.readfreq) body["readfreq"] = *q.readfreq;
    if (q.freq_ef) body["freq_ef"] = *q.freq_ef;
    qubits[id] = std::move(body);
  }
  json gates = json::object();
  for (const auto& [name, g] : s.gates) {
    json pulses = json::array();
    for (const auto& p : g.pulses) pulses.push_back(to_json(p));
    gates[name] = std::move(pulses);
  }
  return {{"Gates", std::move(gates)}, {"Qubits", std::move(qubits)}};
}

std::string serialize_canonical(const CalibrationSnapshot& snapshot) { return canonical_dump(to_json(snapshot)); }

double resolve_value(const CalibrationSnapshot& snapshot, const ScalarOrRef& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  const auto& ref = std::get<QubitRef>(value);
  const auto it = snapshot.qubits.find(ref.qubit_id);
  if (it != snapshot.qubits.end()) {
    if (const auto v = it->second.get(ref.property)) return *v;
  }
  throw Error(ErrorCode::DanglingRef, "reference " + ref.str() + " does not resolve");
}

std::string GateClassification::label() const {
  switch (group) {
    case GateGroup::Read:
      return "ReadGroup";
    case GateGroup::X90:
      return "X90Group";
    case GateGroup::CR:
      return "CRGroup";
    case GateGroup::Other:
      break;
  }
  return "Other(" + suffix + ")";
}

GateClassification classify_gate(std::string_view gate_name) {
  GateClassification out;
  std::size_t pos = 0;
  while (pos < gate_name.size() && gate_name[pos] == 'Q') {
    std::size_t end = pos + 1;
    while (end < gate_name.size() && std::isdigit(static_cast<unsigned char>(gate_name[end]))) ++end;
    if (end == pos + 1) break;
    out.targets.emplace_back(gate_name.substr(pos, end - pos));
    pos = end;
  }
  if (out.targets.empty()) {
    throw Error(ErrorCode::UnparsableName, "gate name has no leading qubit token: " + std::string(gate_name));
  }
  out.suffix = std::string(gate_name.substr(pos));
  std::string lower = out.suffix;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "read") {
    out.group = GateGroup::Read;
  } else if (out.suffix == "X90") {
    out.group = GateGroup::X90;
  } else if (out.suffix == "CR" && out.targets.size() == 2) {
    out.group = GateGroup::CR;
  } else {
    out.group = GateGroup::Other;
  }
  return out;
}

}  // namespace qcsv
