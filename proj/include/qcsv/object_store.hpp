// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsv/object_id.hpp"
#include "qcsv/timestamp.hpp"

namespace qcsv {

inline constexpr std::string_view kFormatVersion = "qubicsv-store-1";

struct Actor {
  std::string name;
  std::string email;

  bool operator==(const Actor&) const = default;
};

struct AuditEvent {
  std::uint64_t seq = 0;
  Timestamp timestamp{};
  Actor actor;
  std::string action;  // create_branch, delete_branch, rename_branch, copy_branch, merge, commit, ingest_characterization
  nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const AuditEvent& event);
AuditEvent audit_event_from_json(const nlohmann::json& j);

/// Persisted branch ref.
struct RefRecord {
  ObjectId head;
  std::string owner_name;
  std::string owner_email;
  std::string description;
  Timestamp created_at{};
};

struct FsckReport {
  std::size_t objects_checked = 0;
  std::size_t refs_checked = 0;
  std::size_t audit_events = 0;
  std::vector<std::string> problems;

  bool ok() const noexcept { return problems.empty(); }
};

/// On-disk repository layout:
///
///   <root>/format-version        "qubicsv-store-1"
///   <root>/objects/ab/cdef...    tagged payload, named by its id
///   <root>/refs/branches/<name>  one JSON line per ref
///   <root>/audit.log             JSON lines, strictly increasing seq
///   <root>/characterization/     per-chip upload logs
///
/// Safe for concurrent use within one process. Only one process may own a
/// data directory at a time.
class ObjectStore {
 public:
  /// Opens (or initializes) the layout. Throws FormatVersionMismatch or
  /// CorruptLayout. `created` reports whether a fresh layout was written.
  static std::unique_ptr<ObjectStore> open(const std::filesystem::path& root, bool create_if_missing,
                                           bool* created = nullptr);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path characterization_dir() const { return root_ / "characterization"; }

  /// Idempotent; returns the id of `tag:payload`.
  ObjectId put_object(std::string_view tag, std::string_view payload);
  /// Payload of an object with the given tag; nullopt if absent or of another type.
  std::optional<std::string> get_object(const ObjectId& id, std::string_view tag) const;
  bool has_object(const ObjectId& id) const;
  /// All ids starting with `prefix` (at least 2 characters).
  std::vector<ObjectId> find_by_prefix(std::string_view prefix) const;

  std::optional<RefRecord> read_ref(const std::string& name) const;
  std::map<std::string, RefRecord> list_refs() const;
  /// Compare-and-swap. `expected_head` nullopt means the ref must be absent;
  /// `next` nullopt deletes it. Throws CasMismatch or UnknownRef.
  void update_ref(const std::string& name, const std::optional<ObjectId>& expected_head,
                  const std::optional<RefRecord>& next);
  /// Moves a ref to a new name. Throws UnknownRef if `from` is absent and
  /// CasMismatch if `to` exists.
  RefRecord rename_ref(const std::string& from, const std::string& to);

  /// Assigns the next seq, appends one line and flushes before returning.
  std::uint64_t append_audit(AuditEvent event);
  std::vector<AuditEvent> audit_events() const;

  FsckReport fsck() const;

 private:
  explicit ObjectStore(std::filesystem::path root);
  void load_audit();
  std::filesystem::path object_path(const ObjectId& id) const;
  std::filesystem::path ref_path(const std::string& name) const;
  std::mutex& ref_lock(const std::string& name);
  void write_ref_file(const std::string& name, const RefRecord& record);

  std::filesystem::path root_;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::string> cache_;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> ref_locks_;

  mutable std::mutex audit_mutex_;
  std::vector<AuditEvent> audit_;
};

/// Writes `bytes` to a sibling temp file and renames it over `target`.
void write_file_atomic(const std::filesystem::path& target, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace qcsv
