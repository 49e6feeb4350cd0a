// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace qcsv {

// Canonical JSON: object keys sorted bytewise, no whitespace, numbers as the
// shortest decimal that round-trips to the same double ("e" lowercase, no "+"
// and no leading zeros in the exponent). Every hashed payload goes through
// this encoder.

std::string canonical_number(double value);

/// Throws Error(InvalidField) on non-finite numbers.
std::string canonical_dump(const nlohmann::json& value);

}  // namespace qcsv
