// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace qcsv {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);

/// Lowercase base32hex ("0123456789abcdefghijklmnopqrstuv"), no padding.
std::string base32hex(std::span<const std::uint8_t> bytes);

/// Identifier of a stored object. The display form is the first 160 bits of
/// the SHA-256 digest of the tagged payload, 32 base32hex characters.
class ObjectId {
 public:
  static constexpr std::size_t kLength = 32;

  ObjectId() = default;

  /// Hashes `tag + ":" + payload`.
  static ObjectId of(std::string_view tag, std::string_view payload);
  /// Validates a full 32-character display string.
  static ObjectId parse(std::string_view display);
  static bool is_valid_display(std::string_view display);

  const std::string& str() const noexcept { return display_; }
  bool empty() const noexcept { return display_.empty(); }

  auto operator<=>(const ObjectId&) const = default;

 private:
  explicit ObjectId(std::string display) : display_(std::move(display)) {}
  std::string display_;
};

}  // namespace qcsv
