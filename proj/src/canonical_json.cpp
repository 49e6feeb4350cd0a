// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/canonical_json.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "qcsv/error.hpp"

namespace qcsv {

std::string canonical_number(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidField, "non-finite number cannot be encoded");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, res.ptr);
  const auto e = out.find('e');
  if (e == std::string::npos) return out;
  // to_chars gives e.g. "3.2e-08" / "1e+21"; strip the sign and zero padding.
  std::string mantissa = out.substr(0, e);
  std::string exponent = out.substr(e + 1);
  bool negative = false;
  if (!exponent.empty() && (exponent[0] == '+' || exponent[0] == '-')) {
    negative = exponent[0] == '-';
    exponent.erase(0, 1);
  }
  const auto nz = exponent.find_first_not_of('0');
  exponent = nz == std::string::npos ? "0" : exponent.substr(nz);
  return mantissa + "e" + (negative ? "-" : "") + exponent;
}

namespace {

void encode(const nlohmann::json& v, std::string& out) {
  using value_t = nlohmann::json::value_t;
  switch (v.type()) {
    case value_t::null:
      out += "null";
      break;
    case value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case value_t::number_integer:
    case value_t::number_unsigned:
    case value_t::number_float:
      out += canonical_number(v.get<double>());
      break;
    case value_t::string:
      out += nlohmann::json(v.get_ref<const std::string&>()).dump();
      break;
    case value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        encode(item, out);
      }
      out += ']';
      break;
    }
    case value_t::object: {
      // nlohmann's default object_t is a std::map, already bytewise ordered.
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        encode(item, out);
      }
      out += '}';
      break;
    }
    default:
      throw Error(ErrorCode::InvalidField, "unsupported JSON value in canonical encoding");
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  encode(value, out);
  return out;
}

}  // namespace qcsv
