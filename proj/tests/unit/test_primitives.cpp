// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "qcsv/canonical_json.hpp"
#include "qcsv/error.hpp"
#include "qcsv/object_id.hpp"
#include "qcsv/timestamp.hpp"
#include "test_util.hpp"

using namespace qcsv;
using nlohmann::json;

namespace {

std::int64_t micros(Timestamp t) { return t.time_since_epoch().count(); }

}  // namespace

TEST_CASE("compact characterization datetimes") {
  // Reference microsecond counts from Python's datetime.
  CHECK(micros(parse_compact("20220526_180730_062549")) == 1653588450062549);
  CHECK(micros(parse_compact("20240229_235959_999999")) == 1709251199999999);
  CHECK(format_compact(parse_compact("20220526_182729_656142")) == "20220526_182729_656142");
  CHECK(format_iso(parse_compact("20220526_180730_062549")) == "2022-05-26T18:07:30.062549Z");

  CHECK(code_of([] { parse_compact("20220526_180730"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_compact("20220526-180730-062549"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_compact("20221326_180730_062549"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_compact("20230229_000000_000000"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_compact("2022052a_180730_062549"); }) == ErrorCode::BadDatetime);
}

TEST_CASE("ISO timestamps") {
  CHECK(micros(parse_iso("2022-05-26T18:07:30.062549Z")) == 1653588450062549);
  CHECK(micros(parse_iso("2022-05-26T18:07:30Z")) == 1653588450000000);
  CHECK(micros(parse_iso("2022-05-26T18:07:30.5Z")) == 1653588450500000);
  CHECK(format_iso(parse_iso("1970-01-01T00:00:00Z")) == "1970-01-01T00:00:00.000000Z");
  CHECK(code_of([] { parse_iso("2022-05-26T18:07:30"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_iso("2022-05-26T18:07:30.1234567Z"); }) == ErrorCode::BadDatetime);
  CHECK(code_of([] { parse_iso("2022-05-26 18:07:30Z"); }) == ErrorCode::BadDatetime);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Timestamp t{std::chrono::microseconds(static_cast<std::int64_t>(rng() % 4102444800000000ULL))};
    CHECK(parse_iso(format_iso(t)) == t);
    CHECK(parse_compact(format_compact(t)) == t);
  }
}

TEST_CASE("canonical numbers match the reference encoder") {
  // Frozen from tests/oracles/reference_ids.py
  CHECK(canonical_number(0.0) == "0");
  CHECK(canonical_number(-0.0) == "-0");
  CHECK(canonical_number(1.0) == "1");
  CHECK(canonical_number(0.25) == "0.25");
  CHECK(canonical_number(3.2e-08) == "3.2e-8");
  CHECK(canonical_number(6554300000.0) == "6554300000");
  CHECK(canonical_number(1e21) == "1e21");
  CHECK(canonical_number(1e-7) == "1e-7");
  CHECK(canonical_number(123456.789) == "123456.789");
  CHECK(canonical_number(100000.0) == "1e5");
  CHECK(canonical_number(-2.5e-300) == "-2.5e-300");
  CHECK(canonical_number(1.7976931348623157e308) == "1.7976931348623157e308");
  CHECK(canonical_number(5e-324) == "5e-324");
  CHECK(canonical_number(4100733234.438625) == "4100733234.438625");
  CHECK(code_of([] { canonical_number(std::numeric_limits<double>::infinity()); }) == ErrorCode::InvalidField);
  CHECK(code_of([] { canonical_number(std::nan("")); }) == ErrorCode::InvalidField);
}

TEST_CASE("canonical numbers round-trip") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t bits = rng();
    double d;
    std::memcpy(&d, &bits, sizeof d);
    if (!std::isfinite(d)) continue;
    const std::string s = canonical_number(d);
    CHECK(s.find('+') == std::string::npos);
    CHECK(s.find('E') == std::string::npos);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(std::memcmp(&back, &d, sizeof d) == 0);
  }
}

TEST_CASE("canonical dump sorts keys and strips whitespace") {
  const json a = json::parse(R"({"b": [1, 2.5, {"z": null, "a": true}], "a": "x\"y", "é": 1e-8})");
  CHECK(canonical_dump(a) == "{\"a\":\"x\\\"y\",\"b\":[1,2.5,{\"a\":true,\"z\":null}],\"é\":1e-8}");
  const json b = json::parse(R"({"é": 1e-8, "a": "x\"y", "b": [1, 2.5, {"a": true, "z": null}]})");
  CHECK(canonical_dump(a) == canonical_dump(b));
}

TEST_CASE("object ids") {
  // First 160 bits of SHA-256("") in base32hex, from Python's base64 module.
  const auto empty = sha256("");
  CHECK(base32hex(std::span(empty.data(), 20)) == "seoc8gkovge196nruj49irtp4gjqsgf4");
  const auto abc = sha256("abc");
  CHECK(abc[0] == 0xba);
  CHECK(abc[31] == 0xad);

  // Frozen from tests/oracles/expected_ids.json
  CHECK(ObjectId::of("tree", "{\"chips\":{}}").str() == "5fnal3erc67ip21f11nfqhupqnskk5m0");
  CHECK(ObjectId::of("snap", "{\"Gates\":{},\"Qubits\":{}}").str() == "i0372onk4c8044oc43vcefdotrmqpd55");

  const ObjectId id = ObjectId::of("snap", "x");
  CHECK(id.str().size() == ObjectId::kLength);
  CHECK(ObjectId::is_valid_display(id.str()));
  CHECK(ObjectId::parse(id.str()) == id);
  CHECK_FALSE(ObjectId::is_valid_display("W" + id.str().substr(1)));
  CHECK_FALSE(ObjectId::is_valid_display(id.str().substr(1)));
  CHECK_FALSE(ObjectId::is_valid_display(id.str().substr(0, 31) + "w"));
  CHECK(code_of([] { ObjectId::parse("not-an-id"); }) == ErrorCode::UnknownCommit);
  CHECK(ObjectId::of("snap", "x") != ObjectId::of("tree", "x"));
}

TEST_CASE("error codes map onto HTTP statuses") {
  CHECK(http_status(ErrorCode::InvalidField) == 400);
  CHECK(http_status(ErrorCode::UnknownBranch) == 404);
  CHECK(http_status(ErrorCode::ConcurrentUpdate) == 409);
  CHECK(http_status(ErrorCode::UnresolvedConflicts) == 409);
  CHECK(http_status(ErrorCode::NoChanges) == 422);
  CHECK(http_status(ErrorCode::CorruptLayout) == 500);
  CHECK(to_string(ErrorCode::DanglingRef) == "DanglingRef");
  const Error e(ErrorCode::NoData, "nothing", json{{"k", 1}});
  CHECK(e.code() == ErrorCode::NoData);
  CHECK(e.detail()["k"] == 1);
}
