// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace qcsv {

/// The three qubit properties a gate field may reference.
enum class QubitProperty { Freq, ReadFreq, FreqEf };

std::string_view to_string(QubitProperty p);
std::optional<QubitProperty> qubit_property_from_string(std::string_view name);

/// Symbolic gate-field value such as "Q0.freq".
struct QubitRef {
  std::string qubit_id;
  QubitProperty property = QubitProperty::Freq;

  std::string str() const;
  bool operator==(const QubitRef&) const = default;
};

using ScalarOrRef = std::variant<double, QubitRef>;

struct QubitRecord {
  std::string qubit_id;
  std::optional<double> freq;      // Hz, drive
  std::optional<double> readfreq;  // Hz, readout
  std::optional<double> freq_ef;   // Hz, e-f transition
  std::map<std::string, double> extras;

  std::optional<double> get(QubitProperty p) const;
  bool operator==(const QubitRecord&) const = default;
};

struct EnvelopeSpec {
  std::string env_func;
  std::map<std::string, double> paradict;

  bool operator==(const EnvelopeSpec&) const = default;
};

/// One pulse of a gate. Fields are optional because gate kinds differ in
/// which parameters they carry; a pulse must carry at least one.
struct GatePulse {
  std::optional<ScalarOrRef> freq;
  std::optional<double> phase;
  std::optional<std::string> dest;
  std::optional<double> twidth;  // seconds
  std::optional<double> t0;      // seconds
  std::optional<double> amp;
  std::optional<std::vector<EnvelopeSpec>> env;
  std::map<std::string, double> extras;

  bool operator==(const GatePulse&) const = default;
};

struct GateRecord {
  std::string gate_name;
  std::vector<GatePulse> pulses;

  bool operator==(const GateRecord&) const = default;
};

struct CalibrationSnapshot {
  std::map<std::string, QubitRecord> qubits;
  std::map<std::string, GateRecord> gates;

  bool empty() const noexcept { return qubits.empty() && gates.empty(); }
  bool operator==(const CalibrationSnapshot&) const = default;
};

/// Parses a calibration document with top-level "Qubits" and "Gates".
/// Accepts the legacy "twidht" spelling. Throws Error with MalformedDocument,
/// InvalidField or DanglingRef.
CalibrationSnapshot parse_calibration(std::string_view document);
CalibrationSnapshot parse_calibration(const nlohmann::json& document);

/// Checks every invariant, including reference closure.
void validate(const CalibrationSnapshot& snapshot);

nlohmann::json to_json(const CalibrationSnapshot& snapshot);
nlohmann::json to_json(const GatePulse& pulse);
nlohmann::json to_json(const ScalarOrRef& value);
nlohmann::json to_json(const std::vector<EnvelopeSpec>& env);

/// Deterministic byte encoding used for content addressing.
std::string serialize_canonical(const CalibrationSnapshot& snapshot);

/// Throws Error(DanglingRef) when a reference cannot be satisfied.
double resolve_value(const CalibrationSnapshot& snapshot, const ScalarOrRef& value);

enum class GateGroup { Read, X90, CR, Other };

struct GateClassification {
  GateGroup group = GateGroup::Other;
  std::string suffix;
  std::vector<std::string> targets;

  /// "ReadGroup", "X90Group", "CRGroup" or "Other(<suffix>)".
  std::string label() const;
  bool operator==(const GateClassification&) const = default;
};

/// Splits a gate name into leading qubit tokens (Q<digits>) and a suffix.
/// Throws Error(UnparsableName) if there is no leading qubit token.
GateClassification classify_gate(std::string_view gate_name);

}  // namespace qcsv
