// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/object_id.hpp"

#include <openssl/sha.h>

#include "qcsv/error.hpp"

namespace qcsv {

namespace {
constexpr std::string_view kAlphabet = "0123456789abcdefghijklmnopqrstuv";
}

Sha256Digest sha256(std::string_view bytes) {
  Sha256Digest out{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), out.data());
  return out;
}

std::string base32hex(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() * 8 + 4) / 5);
  std::uint32_t buffer = 0;
  int bits = 0;
  for (const std::uint8_t b : bytes) {
    buffer = (buffer << 8) | b;
    bits += 8;
    while (bits >= 5) {
      bits -= 5;
      out += kAlphabet[(buffer >> bits) & 0x1f];
    }
  }
  if (bits > 0) out += kAlphabet[(buffer << (5 - bits)) & 0x1f];
  return out;
}

ObjectId ObjectId::of(std::string_view tag, std::string_view payload) {
  std::string bytes;
  bytes.reserve(tag.size() + 1 + payload.size());
  bytes.append(tag).append(":").append(payload);
  const Sha256Digest digest = sha256(bytes);
  return ObjectId(base32hex(std::span<const std::uint8_t>(digest.data(), 20)));
}

bool ObjectId::is_valid_display(std::string_view display) {
  if (display.size() != kLength) return false;
  for (const char c : display) {
    if (kAlphabet.find(c) == std::string_view::npos) return false;
  }
  return true;
}

ObjectId ObjectId::parse(std::string_view display) {
  if (!is_valid_display(display)) throw Error(ErrorCode::UnknownCommit, "not an object id: " + std::string(display));
  return ObjectId(std::string(display));
}

}  // namespace qcsv
