// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/timestamp.hpp"

#include <charconv>
#include <cstdio>

#include "qcsv/error.hpp"

namespace qcsv {

namespace {

using namespace std::chrono;

int read_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) throw Error(ErrorCode::BadDatetime, "truncated datetime: " + std::string(text));
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw Error(ErrorCode::BadDatetime, "non-digit in datetime: " + std::string(text));
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw Error(ErrorCode::BadDatetime, "unexpected separator in datetime: " + std::string(text));
  }
}

Timestamp assemble(std::string_view text, int y, int mo, int d, int h, int mi, int s, int micros) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorCode::BadDatetime, "datetime out of range: " + std::string(text));
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + microseconds{micros};
}

struct Fields {
  int year, month, day, hour, minute, second, micros;
};

Fields split(Timestamp t) {
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  auto rest = t - day_point;
  const auto h = duration_cast<hours>(rest);
  rest -= h;
  const auto m = duration_cast<minutes>(rest);
  rest -= m;
  const auto s = duration_cast<seconds>(rest);
  rest -= s;
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(h.count()),
          static_cast<int>(m.count()), static_cast<int>(s.count()), static_cast<int>(rest.count())};
}

}  // namespace

Timestamp now_utc() { return floor<microseconds>(system_clock::now()); }

std::string format_iso(Timestamp t) {
  const Fields f = split(t);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06dZ", f.year, f.month, f.day, f.hour, f.minute,
                f.second, f.micros);
  return buf;
}

Timestamp parse_iso(std::string_view text) {
  const int y = read_digits(text, 0, 4);
  expect_char(text, 4, '-');
  const int mo = read_digits(text, 5, 2);
  expect_char(text, 7, '-');
  const int d = read_digits(text, 8, 2);
  expect_char(text, 10, 'T');
  const int h = read_digits(text, 11, 2);
  expect_char(text, 13, ':');
  const int mi = read_digits(text, 14, 2);
  expect_char(text, 16, ':');
  const int s = read_digits(text, 17, 2);
  std::size_t pos = 19;
  int micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (++digits > 6) throw Error(ErrorCode::BadDatetime, "more than microsecond precision: " + std::string(text));
      micros = micros * 10 + (text[pos] - '0');
      ++pos;
    }
    if (digits == 0) throw Error(ErrorCode::BadDatetime, "empty fraction: " + std::string(text));
    for (std::size_t i = digits; i < 6; ++i) micros *= 10;
  }
  expect_char(text, pos, 'Z');
  if (pos + 1 != text.size()) throw Error(ErrorCode::BadDatetime, "trailing characters: " + std::string(text));
  return assemble(text, y, mo, d, h, mi, s, micros);
}

Timestamp parse_compact(std::string_view text) {
  if (text.size() != 22) throw Error(ErrorCode::BadDatetime, "compact datetime must be 22 chars: " + std::string(text));
  const int y = read_digits(text, 0, 4);
  const int mo = read_digits(text, 4, 2);
  const int d = read_digits(text, 6, 2);
  expect_char(text, 8, '_');
  const int h = read_digits(text, 9, 2);
  const int mi = read_digits(text, 11, 2);
  const int s = read_digits(text, 13, 2);
  expect_char(text, 15, '_');
  const int micros = read_digits(text, 16, 6);
  return assemble(text, y, mo, d, h, mi, s, micros);
}

std::string format_compact(Timestamp t) {
  const Fields f = split(t);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d_%02d%02d%02d_%06d", f.year, f.month, f.day, f.hour, f.minute, f.second,
                f.micros);
  return buf;
}

}  // namespace qcsv
