// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace qcsv {

/// UTC instant with microsecond precision.
using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;

Timestamp now_utc();

/// "YYYY-MM-DDTHH:MM:SS.ffffffZ"
std::string format_iso(Timestamp t);

/// Accepts the format produced by format_iso. Fractional digits are optional
/// (0 to 6); throws Error(BadDatetime) otherwise.
Timestamp parse_iso(std::string_view text);

/// Compact experiment form "YYYYMMDD_HHMMSS_ffffff" (22 chars).
Timestamp parse_compact(std::string_view text);
std::string format_compact(Timestamp t);

}  // namespace qcsv
