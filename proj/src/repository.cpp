// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/repository.hpp"

#include <algorithm>
#include <deque>

#include "qcsv/canonical_json.hpp"
#include "qcsv/error.hpp"

namespace qcsv {

using nlohmann::json;

namespace {

constexpr std::string_view kSnapTag = "snap";
constexpr std::string_view kTreeTag = "tree";
constexpr std::string_view kCommitTag = "cmit";
constexpr std::size_t kMinPrefix = 8;

const Actor kRootAuthor{"qcsv", ""};
constexpr std::string_view kRootMessage = "root";

Timestamp epoch() { return Timestamp{}; }

void require_name(std::string_view name, std::string_view what) {
  if (!is_valid_name(name)) {
    throw Error(ErrorCode::InvalidName, std::string(what) + " name \"" + std::string(name) +
                                            "\" must match [A-Za-z0-9._-]{1,64} and not start with '.'");
  }
}

BranchRef to_branch(const std::string& name, const RefRecord& r) {
  return {name, r.head, {r.owner_name, r.owner_email}, r.description, r.created_at};
}

json actor_json(const Actor& a) { return {{"email", a.email}, {"name", a.name}}; }

}  // namespace

bool is_valid_name(std::string_view name) {
  if (name.empty() || name.size() > 64 || name[0] == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
           c == '-';
  });
}

std::string tree_payload(const std::map<std::string, ObjectId>& chips) {
  json c = json::object();
  for (const auto& [chip, id] : chips) c[chip] = id.str();
  return canonical_dump(json{{"chips", std::move(c)}});
}

std::string commit_payload(const ObjectId& tree, const std::vector<ObjectId>& parents, const Actor& author,
                           std::string_view message, Timestamp timestamp) {
  json p = json::array();
  for (const auto& id : parents) p.push_back(id.str());
  return canonical_dump(json{{"author", actor_json(author)},
                             {"message", std::string(message)},
                             {"parents", std::move(p)},
                             {"timestamp", format_iso(timestamp)},
                             {"tree", tree.str()}});
}

json to_json(const Commit& c) {
  json parents = json::array();
  for (const auto& p : c.parents) parents.push_back(p.str());
  return {{"id", c.id.str()},
          {"tree", c.tree.str()},
          {"parents", std::move(parents)},
          {"author", actor_json(c.author)},
          {"message", c.message},
          {"timestamp", format_iso(c.timestamp)}};
}

json to_json(const BranchRef& r) {
  return {{"name", r.name},
          {"head", r.head.str()},
          {"owner", actor_json(r.owner)},
          {"description", r.description},
          {"created_at", format_iso(r.created_at)}};
}

json to_json(const Tree& t) {
  json chips = json::object();
  for (const auto& [chip, id] : t.chips) chips[chip] = id.str();
  return {{"id", t.id.str()}, {"chips", std::move(chips)}};
}

Repository::Repository(std::unique_ptr<ObjectStore> store) : store_(std::move(store)) {}

std::shared_ptr<Repository> Repository::open(const std::filesystem::path& root, bool create_if_missing) {
  bool created = false;
  auto store = ObjectStore::open(root, create_if_missing, &created);
  std::shared_ptr<Repository> repo(new Repository(std::move(store)));
  if (created) repo->bootstrap();
  if (!repo->store_->get_object(root_commit_id(), kCommitTag)) {
    throw Error(ErrorCode::CorruptLayout, "root commit missing");
  }
  return repo;
}

ObjectId Repository::root_commit_id() {
  static const ObjectId id = [] {
    const ObjectId tree = ObjectId::of(kTreeTag, tree_payload({}));
    return ObjectId::of(kCommitTag, commit_payload(tree, {}, kRootAuthor, kRootMessage, epoch()));
  }();
  return id;
}

void Repository::bootstrap() {
  const ObjectId tree = store_->put_object(kTreeTag, tree_payload({}));
  const ObjectId root = write_commit(tree, {}, kRootAuthor, std::string(kRootMessage), epoch());
  RefRecord main{root, kRootAuthor.name, kRootAuthor.email, "default branch", now_utc()};
  store_->update_ref(std::string(kDefaultBranch), std::nullopt, main);
}

ObjectId Repository::write_commit(const ObjectId& tree, const std::vector<ObjectId>& parents, const Actor& author,
                                  const std::string& message, Timestamp timestamp) {
  return store_->put_object(kCommitTag, commit_payload(tree, parents, author, message, timestamp));
}

Commit Repository::read_commit(const ObjectId& id) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = commits_.find(id.str()); it != commits_.end()) return it->second;
  }
  const auto payload = store_->get_object(id, kCommitTag);
  if (!payload) throw Error(ErrorCode::UnknownCommit, "no commit " + id.str());
  Commit c;
  try {
    const json j = json::parse(*payload);
    c.id = id;
    c.tree = ObjectId::parse(j.at("tree").get<std::string>());
    for (const auto& p : j.at("parents")) c.parents.push_back(ObjectId::parse(p.get<std::string>()));
    c.author = {j.at("author").at("name").get<std::string>(), j.at("author").at("email").get<std::string>()};
    c.message = j.at("message").get<std::string>();
    c.timestamp = parse_iso(j.at("timestamp").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptLayout, "corrupt commit " + id.str() + ": " + e.what());
  }
  std::lock_guard lock(cache_mutex_);
  commits_.emplace(id.str(), c);
  return c;
}

Tree Repository::read_tree(const ObjectId& id) const {
  const auto payload = store_->get_object(id, kTreeTag);
  if (!payload) throw Error(ErrorCode::CorruptLayout, "missing tree " + id.str());
  Tree t;
  t.id = id;
  try {
    const json doc = json::parse(*payload);
    for (const auto& [chip, snap] : doc.at("chips").items()) {
      t.chips.emplace(chip, ObjectId::parse(snap.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptLayout, "corrupt tree " + id.str() + ": " + e.what());
  }
  return t;
}

std::shared_ptr<const CalibrationSnapshot> Repository::read_snapshot(const ObjectId& id) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = snapshots_.find(id.str()); it != snapshots_.end()) return it->second;
  }
  const auto payload = store_->get_object(id, kSnapTag);
  if (!payload) throw Error(ErrorCode::CorruptLayout, "missing snapshot " + id.str());
  auto snap = std::make_shared<const CalibrationSnapshot>(parse_calibration(std::string_view(*payload)));
  std::lock_guard lock(cache_mutex_);
  snapshots_.emplace(id.str(), snap);
  return snap;
}

ChipSnapshots Repository::materialize(const Commit& commit) const {
  ChipSnapshots out;
  for (const auto& [chip, snap] : read_tree(commit.tree).chips) out.emplace(chip, *read_snapshot(snap));
  return out;
}

ObjectId Repository::resolve_commit(std::string_view text) const {
  if (ObjectId::is_valid_display(text)) {
    const ObjectId id = ObjectId::parse(text);
    if (!store_->get_object(id, kCommitTag)) throw Error(ErrorCode::UnknownCommit, "no commit " + std::string(text));
    return id;
  }
  const bool plausible = text.size() >= kMinPrefix && text.size() < ObjectId::kLength &&
                         std::all_of(text.begin(), text.end(), [](char c) {
                           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'v');
                         });
  if (!plausible) throw Error(ErrorCode::UnknownCommit, "no commit " + std::string(text));
  std::vector<ObjectId> hits;
  for (const auto& id : store_->find_by_prefix(text)) {
    if (store_->get_object(id, kCommitTag)) hits.push_back(id);
  }
  if (hits.empty()) throw Error(ErrorCode::UnknownCommit, "no commit " + std::string(text));
  if (hits.size() > 1) throw Error(ErrorCode::AmbiguousPrefix, "prefix " + std::string(text) + " is ambiguous");
  return hits.front();
}

CommitData Repository::get_commit(std::string_view id_or_prefix) const {
  CommitData out;
  out.commit = read_commit(resolve_commit(id_or_prefix));
  out.tree = read_tree(out.commit.tree);
  for (const auto& [chip, snap] : out.tree.chips) out.chips.emplace(chip, *read_snapshot(snap));
  return out;
}

BranchRef Repository::get_branch(const std::string& name) const {
  const auto ref = store_->read_ref(name);
  if (!ref) throw Error(ErrorCode::UnknownBranch, "no branch " + name);
  return to_branch(name, *ref);
}

std::vector<BranchRef> Repository::list_branches() const {
  std::vector<BranchRef> out;
  for (const auto& [name, ref] : store_->list_refs()) out.push_back(to_branch(name, ref));
  return out;
}

std::vector<Commit> Repository::first_parent_chain(const ObjectId& head) const {
  std::vector<Commit> out;
  Commit c = read_commit(head);
  while (!c.parents.empty()) {
    out.push_back(c);
    c = read_commit(c.parents.front());
  }
  return out;
}

std::vector<Commit> Repository::log(const std::string& branch) const { return first_parent_chain(get_branch(branch).head); }

std::set<ObjectId> Repository::ancestors(const ObjectId& id) const {
  std::set<ObjectId> seen{id};
  std::deque<ObjectId> queue{id};
  while (!queue.empty()) {
    const ObjectId cur = queue.front();
    queue.pop_front();
    for (const auto& p : read_commit(cur).parents) {
      if (seen.insert(p).second) queue.push_back(p);
    }
  }
  return seen;
}

void Repository::advance(const std::string& branch, const RefRecord& ref, const ObjectId& new_head) {
  RefRecord next = ref;
  next.head = new_head;
  try {
    store_->update_ref(branch, ref.head, next);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CasMismatch || e.code() == ErrorCode::UnknownRef) {
      throw Error(ErrorCode::ConcurrentUpdate, "branch " + branch + " moved during the update; retry");
    }
    throw;
  }
}

ObjectId Repository::commit_snapshot(const std::string& branch, const std::string& chip_id,
                                     const CalibrationSnapshot& snapshot, const Actor& author,
                                     const std::string& message, std::optional<Timestamp> timestamp) {
  require_name(chip_id, "chip");
  validate(snapshot);
  const auto ref = store_->read_ref(branch);
  if (!ref) throw Error(ErrorCode::UnknownBranch, "no branch " + branch);
  const Commit parent = read_commit(ref->head);
  Tree tree = read_tree(parent.tree);

  tree.chips[chip_id] = store_->put_object(kSnapTag, serialize_canonical(snapshot));
  const ObjectId tree_id = store_->put_object(kTreeTag, tree_payload(tree.chips));
  if (tree_id == parent.tree) throw Error(ErrorCode::NoChanges, "commit would not change branch " + branch);

  const ObjectId id = write_commit(tree_id, {ref->head}, author, message, timestamp.value_or(now_utc()));
  advance(branch, *ref, id);
  record_event(author, "commit", {{"branch", branch}, {"chip", chip_id}, {"commit", id.str()}});
  return id;
}

BranchRef Repository::create_branch(const std::string& name, const Actor& owner, const std::string& description,
                                    const std::optional<std::string>& from) {
  require_name(name, "branch");
  ObjectId head = root_commit_id();
  if (from) {
    if (const auto src = store_->read_ref(*from)) {
      head = src->head;
    } else {
      try {
        head = resolve_commit(*from);
      } catch (const Error&) {
        throw Error(ErrorCode::UnknownSource, "no branch or commit " + *from);
      }
    }
  }
  RefRecord rec{head, owner.name, owner.email, description, now_utc()};
  try {
    store_->update_ref(name, std::nullopt, rec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CasMismatch) throw Error(ErrorCode::BranchExists, "branch " + name + " exists");
    throw;
  }
  json details{{"branch", name}, {"head", head.str()}, {"description", description}};
  if (from) details["from"] = *from;
  record_event(owner, "create_branch", std::move(details));
  return to_branch(name, rec);
}

BranchRef Repository::rename_branch(const std::string& old_name, const std::string& new_name, const Actor& actor) {
  if (!store_->read_ref(old_name)) throw Error(ErrorCode::UnknownBranch, "no branch " + old_name);
  require_name(new_name, "branch");
  if (old_name == new_name) throw Error(ErrorCode::BranchExists, "branch " + new_name + " exists");
  RefRecord rec;
  try {
    rec = store_->rename_ref(old_name, new_name);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CasMismatch) throw Error(ErrorCode::BranchExists, "branch " + new_name + " exists");
    if (e.code() == ErrorCode::UnknownRef) throw Error(ErrorCode::UnknownBranch, "no branch " + old_name);
    throw;
  }
  record_event(actor, "rename_branch", {{"old", old_name}, {"new", new_name}, {"head", rec.head.str()}});
  return to_branch(new_name, rec);
}

BranchRef Repository::copy_branch(const std::string& source, const std::string& new_name, const Actor& actor) {
  const auto src = store_->read_ref(source);
  if (!src) throw Error(ErrorCode::UnknownBranch, "no branch " + source);
  require_name(new_name, "branch");
  RefRecord rec{src->head, actor.name, actor.email, src->description, now_utc()};
  try {
    store_->update_ref(new_name, std::nullopt, rec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CasMismatch) throw Error(ErrorCode::BranchExists, "branch " + new_name + " exists");
    throw;
  }
  record_event(actor, "copy_branch", {{"source", source}, {"branch", new_name}, {"head", rec.head.str()}});
  return to_branch(new_name, rec);
}

void Repository::delete_branch(const std::string& name, const std::string& confirm_name, const Actor& actor) {
  const auto ref = store_->read_ref(name);
  if (!ref) throw Error(ErrorCode::UnknownBranch, "no branch " + name);
  if (confirm_name != name) {
    throw Error(ErrorCode::ConfirmationMismatch, "confirmation \"" + confirm_name + "\" does not match " + name);
  }
  if (store_->list_refs().size() <= 1) throw Error(ErrorCode::LastBranch, "cannot delete the only branch");
  try {
    store_->update_ref(name, ref->head, std::nullopt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CasMismatch || e.code() == ErrorCode::UnknownRef) {
      throw Error(ErrorCode::ConcurrentUpdate, "branch " + name + " changed during delete; retry");
    }
    throw;
  }
  record_event(actor, "delete_branch", {{"branch", name}, {"head", ref->head.str()}});
}

DiffSet Repository::diff(const std::optional<std::string>& branch, std::string_view from, std::string_view to) const {
  const ObjectId a = resolve_commit(from);
  const ObjectId b = resolve_commit(to);
  if (branch) {
    const auto reachable = ancestors(get_branch(*branch).head);
    for (const auto& id : {a, b}) {
      if (!reachable.count(id)) throw Error(ErrorCode::NotOnBranch, "commit " + id.str() + " is not on " + *branch);
    }
  }
  if (a == b) return {};
  return compute_diff(materialize(read_commit(a)), materialize(read_commit(b)));
}

ObjectId Repository::merge_base(const ObjectId& a, const ObjectId& b) const {
  const auto anc_a = ancestors(a);
  const auto anc_b = ancestors(b);
  std::vector<Commit> common;
  for (const auto& id : anc_a) {
    if (anc_b.count(id)) common.push_back(read_commit(id));
  }
  if (common.empty()) throw Error(ErrorCode::UnknownCommit, "commits share no ancestor");
  // Newest first; then drop every common ancestor reachable from another one.
  std::sort(common.begin(), common.end(), [](const Commit& x, const Commit& y) {
    if (x.timestamp != y.timestamp) return x.timestamp > y.timestamp;
    return x.id < y.id;
  });
  std::set<ObjectId> dominated;
  for (const auto& c : common) {
    if (dominated.count(c.id)) continue;
    for (const auto& p : c.parents) {
      if (dominated.count(p)) continue;
      for (const auto& anc : ancestors(p)) dominated.insert(anc);
    }
  }
  for (const auto& c : common) {
    if (!dominated.count(c.id)) return c.id;
  }
  return common.front().id;
}

MergeResult Repository::merge(const std::string& from_branch, const std::string& to_branch, const Actor& author,
                              const std::string& message, MergeStrategy strategy, const Resolutions& resolutions,
                              std::optional<Timestamp> timestamp) {
  if (from_branch == to_branch) throw Error(ErrorCode::SameBranch, "cannot merge " + from_branch + " into itself");
  const auto to_ref = store_->read_ref(to_branch);
  if (!to_ref) throw Error(ErrorCode::UnknownBranch, "no branch " + to_branch);
  const auto from_ref = store_->read_ref(from_branch);
  if (!from_ref) throw Error(ErrorCode::UnknownBranch, "no branch " + from_branch);

  const ObjectId ours_head = to_ref->head;
  const ObjectId theirs_head = from_ref->head;
  if (ancestors(ours_head).count(theirs_head)) {
    throw Error(ErrorCode::NoChanges, from_branch + " is already merged into " + to_branch);
  }
  const ObjectId base = merge_base(ours_head, theirs_head);
  MergeOutcome outcome = merge_three_way(materialize(read_commit(base)), materialize(read_commit(ours_head)),
                                         materialize(read_commit(theirs_head)), strategy, resolutions);
  if (!outcome.unresolved.empty()) {
    throw Error(ErrorCode::UnresolvedConflicts,
                std::to_string(outcome.unresolved.size()) + " conflicting cell(s) need resolution",
                conflict_report_json(outcome.unresolved));
  }

  std::map<std::string, ObjectId> chips;
  for (const auto& [chip, snap] : *outcome.merged) chips[chip] = store_->put_object(kSnapTag, serialize_canonical(snap));
  const ObjectId tree = store_->put_object(kTreeTag, tree_payload(chips));
  const ObjectId id = write_commit(tree, {ours_head, theirs_head}, author, message, timestamp.value_or(now_utc()));
  advance(to_branch, *to_ref, id);
  record_event(author, "merge",
               {{"from_branch", from_branch},
                {"to_branch", to_branch},
                {"commit", id.str()},
                {"base", base.str()},
                {"strategy", to_string(strategy)},
                {"conflicts", outcome.conflicts.size()}});
  return {id, base, std::move(outcome.conflicts)};
}

std::vector<AuditEvent> Repository::history(std::optional<std::size_t> limit,
                                            const std::optional<std::string>& branch) const {
  std::vector<AuditEvent> events = store_->audit_events();
  std::reverse(events.begin(), events.end());
  if (branch) {
    std::erase_if(events, [&](const AuditEvent& e) {
      for (const auto* key : {"branch", "old", "new", "source", "from_branch", "to_branch"}) {
        const auto it = e.details.find(key);
        if (it != e.details.end() && it->is_string() && it->get<std::string>() == *branch) return false;
      }
      return true;
    });
  }
  if (limit && events.size() > *limit) events.resize(*limit);
  return events;
}

std::uint64_t Repository::record_event(const Actor& actor, std::string action, json details) {
  AuditEvent e;
  e.timestamp = now_utc();
  e.actor = actor;
  e.action = std::move(action);
  e.details = std::move(details);
  return store_->append_audit(std::move(e));
}

}  // namespace qcsv
