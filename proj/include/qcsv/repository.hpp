// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcsv/calibration.hpp"
#include "qcsv/diff.hpp"
#include "qcsv/object_id.hpp"
#include "qcsv/object_store.hpp"
#include "qcsv/timestamp.hpp"

namespace qcsv {

struct Commit {
  ObjectId id;
  ObjectId tree;
  std::vector<ObjectId> parents;  // merge commits: [to-branch head, from-branch head]
  Actor author;
  std::string message;
  Timestamp timestamp{};
};

struct Tree {
  ObjectId id;
  std::map<std::string, ObjectId> chips;  // chip id -> snapshot object
};

struct BranchRef {
  std::string name;
  ObjectId head;
  Actor owner;
  std::string description;
  Timestamp created_at{};
};

struct CommitData {
  Commit commit;
  Tree tree;
  ChipSnapshots chips;
};

struct MergeResult {
  ObjectId commit;
  ObjectId base;
  std::vector<Conflict> conflicts;  // conflicts settled by strategy or resolutions
};

// Canonical payloads hashed into object ids.
std::string tree_payload(const std::map<std::string, ObjectId>& chips);
std::string commit_payload(const ObjectId& tree, const std::vector<ObjectId>& parents, const Actor& author,
                           std::string_view message, Timestamp timestamp);

/// Branch and chip names: [A-Za-z0-9._-]{1,64}, not starting with '.'.
bool is_valid_name(std::string_view name);

nlohmann::json to_json(const Commit& commit);
nlohmann::json to_json(const BranchRef& ref);
nlohmann::json to_json(const Tree& tree);

/// Git-style commit graph over calibration snapshots.
///
/// Every repository starts from the same empty-tree root commit, so any two
/// commits share an ancestor. The root never appears in logs or charts.
class Repository {
 public:
  static constexpr std::string_view kDefaultBranch = "main";

  /// Opens a data directory; on creation writes the root commit and "main".
  static std::shared_ptr<Repository> open(const std::filesystem::path& root, bool create_if_missing);

  ObjectStore& store() noexcept { return *store_; }
  const ObjectStore& store() const noexcept { return *store_; }

  static ObjectId root_commit_id();

  ObjectId commit_snapshot(const std::string& branch, const std::string& chip_id, const CalibrationSnapshot& snapshot,
                           const Actor& author, const std::string& message,
                           std::optional<Timestamp> timestamp = std::nullopt);

  /// Accepts a full id or a unique prefix of at least 8 characters.
  ObjectId resolve_commit(std::string_view id_or_prefix) const;
  Commit read_commit(const ObjectId& id) const;
  Tree read_tree(const ObjectId& id) const;
  std::shared_ptr<const CalibrationSnapshot> read_snapshot(const ObjectId& id) const;
  ChipSnapshots materialize(const Commit& commit) const;
  CommitData get_commit(std::string_view id_or_prefix) const;

  /// First-parent chain from the branch head, newest first, root excluded.
  std::vector<Commit> log(const std::string& branch) const;
  std::vector<Commit> first_parent_chain(const ObjectId& head) const;
  /// `id` plus every commit reachable through any parent.
  std::set<ObjectId> ancestors(const ObjectId& id) const;

  BranchRef get_branch(const std::string& name) const;
  std::vector<BranchRef> list_branches() const;
  BranchRef create_branch(const std::string& name, const Actor& owner, const std::string& description,
                          const std::optional<std::string>& from = std::nullopt);
  BranchRef rename_branch(const std::string& old_name, const std::string& new_name, const Actor& actor);
  BranchRef copy_branch(const std::string& source, const std::string& new_name, const Actor& actor);
  void delete_branch(const std::string& name, const std::string& confirm_name, const Actor& actor);

  /// With a branch, both commits must be reachable from its head.
  DiffSet diff(const std::optional<std::string>& branch, std::string_view from, std::string_view to) const;
  ObjectId merge_base(const ObjectId& a, const ObjectId& b) const;
  /// Throws Error(UnresolvedConflicts) carrying the conflict report when a
  /// manual merge leaves cells unresolved; nothing is written in that case.
  MergeResult merge(const std::string& from_branch, const std::string& to_branch, const Actor& author,
                    const std::string& message, MergeStrategy strategy, const Resolutions& resolutions = {},
                    std::optional<Timestamp> timestamp = std::nullopt);

  /// Newest first. `branch` keeps events that name that branch.
  std::vector<AuditEvent> history(std::optional<std::size_t> limit = std::nullopt,
                                  const std::optional<std::string>& branch = std::nullopt) const;
  std::uint64_t record_event(const Actor& actor, std::string action, nlohmann::json details);

 private:
  explicit Repository(std::unique_ptr<ObjectStore> store);
  void bootstrap();
  ObjectId write_commit(const ObjectId& tree, const std::vector<ObjectId>& parents, const Actor& author,
                        const std::string& message, Timestamp timestamp);
  void advance(const std::string& branch, const RefRecord& ref, const ObjectId& new_head);

  std::unique_ptr<ObjectStore> store_;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<const CalibrationSnapshot>> snapshots_;
  mutable std::unordered_map<std::string, Commit> commits_;
};

}  // namespace qcsv
