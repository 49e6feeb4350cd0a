// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/object_store.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "qcsv/error.hpp"

namespace qcsv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kCacheLimit = 8192;

std::atomic<std::uint64_t> g_temp_counter{0};

std::string temp_suffix() {
  std::ostringstream s;
  s << ".tmp-" << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "-" << g_temp_counter.fetch_add(1);
  return s.str();
}

json ref_to_json(const RefRecord& r) {
  return {{"head", r.head.str()},
          {"owner_name", r.owner_name},
          {"owner_email", r.owner_email},
          {"description", r.description},
          {"created_at", format_iso(r.created_at)}};
}

RefRecord ref_from_json(const json& j) {
  RefRecord r;
  r.head = ObjectId::parse(j.at("head").get<std::string>());
  r.owner_name = j.at("owner_name").get<std::string>();
  r.owner_email = j.at("owner_email").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.created_at = parse_iso(j.at("created_at").get<std::string>());
  return r;
}

}  // namespace

void write_file_atomic(const fs::path& target, std::string_view bytes) {
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + temp_suffix());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot rename into " + target.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json to_json(const AuditEvent& e) {
  return {{"seq", e.seq},
          {"timestamp", format_iso(e.timestamp)},
          {"actor", {{"name", e.actor.name}, {"email", e.actor.email}}},
          {"action", e.action},
          {"details", e.details}};
}

AuditEvent audit_event_from_json(const json& j) {
  AuditEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.timestamp = parse_iso(j.at("timestamp").get<std::string>());
  e.actor.name = j.at("actor").at("name").get<std::string>();
  e.actor.email = j.at("actor").at("email").get<std::string>();
  e.action = j.at("action").get<std::string>();
  e.details = j.at("details");
  return e;
}

ObjectStore::ObjectStore(fs::path root) : root_(std::move(root)) {}

std::unique_ptr<ObjectStore> ObjectStore::open(const fs::path& root, bool create_if_missing, bool* created) {
  if (created) *created = false;
  const fs::path version_file = root / "format-version";
  std::error_code ec;
  if (!fs::exists(version_file, ec)) {
    const bool empty_dir = !fs::exists(root, ec) || (fs::is_directory(root, ec) && fs::is_empty(root, ec));
    if (!create_if_missing || !empty_dir) {
      throw Error(ErrorCode::CorruptLayout, "no repository at " + root.string());
    }
    fs::create_directories(root / "objects", ec);
    fs::create_directories(root / "refs" / "branches", ec);
    fs::create_directories(root / "characterization", ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create repository at " + root.string());
    std::ofstream(root / "audit.log", std::ios::app).close();
    write_file_atomic(version_file, std::string(kFormatVersion) + "\n");
    if (created) *created = true;
  }
  std::string version = read_file(version_file);
  while (!version.empty() && (version.back() == '\n' || version.back() == '\r')) version.pop_back();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::FormatVersionMismatch, "unsupported repository format \"" + version + "\"");
  }
  for (const auto* sub : {"objects", "refs/branches", "characterization"}) {
    if (!fs::is_directory(root / sub, ec)) throw Error(ErrorCode::CorruptLayout, std::string("missing ") + sub);
  }
  std::unique_ptr<ObjectStore> store(new ObjectStore(root));
  store->load_audit();
  return store;
}

void ObjectStore::load_audit() {
  const fs::path path = root_ / "audit.log";
  std::error_code ec;
  if (!fs::exists(path, ec)) std::ofstream(path, std::ios::app).close();
  const std::string data = read_file(path);
  std::size_t pos = 0;
  std::size_t good_end = 0;
  std::uint64_t last_seq = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const bool last_line = nl == std::string::npos || nl + 1 >= data.size();
    const std::string line = data.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    try {
      if (nl == std::string::npos) throw std::runtime_error("unterminated line");
      AuditEvent e = audit_event_from_json(json::parse(line));
      if (e.seq <= last_seq) throw Error(ErrorCode::CorruptLayout, "audit.log seq not increasing");
      last_seq = e.seq;
      audit_.push_back(std::move(e));
      good_end = nl + 1;
      pos = nl + 1;
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      // A torn final line is the only damage a crash can leave behind.
      if (!last_line) throw Error(ErrorCode::CorruptLayout, "audit.log has a corrupt line before the end");
      break;
    }
  }
  if (good_end != data.size()) fs::resize_file(path, good_end);
}

fs::path ObjectStore::object_path(const ObjectId& id) const {
  const std::string& s = id.str();
  return root_ / "objects" / s.substr(0, 2) / s.substr(2);
}

fs::path ObjectStore::ref_path(const std::string& name) const { return root_ / "refs" / "branches" / name; }

ObjectId ObjectStore::put_object(std::string_view tag, std::string_view payload) {
  const ObjectId id = ObjectId::of(tag, payload);
  {
    std::lock_guard lock(cache_mutex_);
    if (cache_.count(id.str())) return id;
  }
  const fs::path path = object_path(id);
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    fs::create_directories(path.parent_path(), ec);
    std::string bytes;
    bytes.append(tag).append(":").append(payload);
    write_file_atomic(path, bytes);
  }
  return id;
}

std::optional<std::string> ObjectStore::get_object(const ObjectId& id, std::string_view tag) const {
  std::string bytes;
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = cache_.find(id.str()); it != cache_.end()) bytes = it->second;
  }
  if (bytes.empty()) {
    const fs::path path = object_path(id);
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    bytes = read_file(path);
    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= kCacheLimit) cache_.clear();
    cache_.emplace(id.str(), bytes);
  }
  if (bytes.size() < tag.size() + 1 || bytes.compare(0, tag.size(), tag) != 0 || bytes[tag.size()] != ':') {
    return std::nullopt;
  }
  return bytes.substr(tag.size() + 1);
}

bool ObjectStore::has_object(const ObjectId& id) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (cache_.count(id.str())) return true;
  }
  std::error_code ec;
  return fs::exists(object_path(id), ec);
}

std::vector<ObjectId> ObjectStore::find_by_prefix(std::string_view prefix) const {
  std::vector<ObjectId> out;
  if (prefix.size() < 2) return out;
  const fs::path dir = root_ / "objects" / std::string(prefix.substr(0, 2));
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  const std::string rest(prefix.substr(2));
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    if (name.compare(0, rest.size(), rest) == 0) {
      const std::string full = std::string(prefix.substr(0, 2)) + name;
      if (ObjectId::is_valid_display(full)) out.push_back(ObjectId::parse(full));
    }
  }
  return out;
}

std::mutex& ObjectStore::ref_lock(const std::string& name) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = ref_locks_[name];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<RefRecord> ObjectStore::read_ref(const std::string& name) const {
  const fs::path path = ref_path(name);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    // Deleted between the existence check and the read.
    return std::nullopt;
  }
  try {
    return ref_from_json(json::parse(text));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorruptLayout, "corrupt ref " + name + ": " + e.what());
  }
}

std::map<std::string, RefRecord> ObjectStore::list_refs() const {
  std::map<std::string, RefRecord> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_ / "refs" / "branches", ec)) {
    const std::string name = entry.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    if (auto r = read_ref(name)) out.emplace(name, std::move(*r));
  }
  return out;
}

void ObjectStore::write_ref_file(const std::string& name, const RefRecord& record) {
  write_file_atomic(ref_path(name), ref_to_json(record).dump() + "\n");
}

void ObjectStore::update_ref(const std::string& name, const std::optional<ObjectId>& expected_head,
                             const std::optional<RefRecord>& next) {
  std::lock_guard lock(ref_lock(name));
  const auto current = read_ref(name);
  if (!current && expected_head) throw Error(ErrorCode::UnknownRef, "no ref " + name);
  if (current && (!expected_head || current->head != *expected_head)) {
    throw Error(ErrorCode::CasMismatch, "ref " + name + " moved");
  }
  if (!next) {
    if (!current) throw Error(ErrorCode::UnknownRef, "no ref " + name);
    std::error_code ec;
    fs::remove(ref_path(name), ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot delete ref " + name);
    return;
  }
  write_ref_file(name, *next);
}

RefRecord ObjectStore::rename_ref(const std::string& from, const std::string& to) {
  if (from == to) throw Error(ErrorCode::CasMismatch, "ref " + to + " exists");
  std::mutex& a = ref_lock(from < to ? from : to);
  std::mutex& b = ref_lock(from < to ? to : from);
  std::scoped_lock lock(a, b);
  const auto current = read_ref(from);
  if (!current) throw Error(ErrorCode::UnknownRef, "no ref " + from);
  if (read_ref(to)) throw Error(ErrorCode::CasMismatch, "ref " + to + " exists");
  write_ref_file(to, *current);
  std::error_code ec;
  fs::remove(ref_path(from), ec);
  if (ec) {
    fs::remove(ref_path(to), ec);
    throw Error(ErrorCode::IoFailure, "cannot remove old ref " + from);
  }
  return *current;
}

std::uint64_t ObjectStore::append_audit(AuditEvent event) {
  std::lock_guard lock(audit_mutex_);
  event.seq = audit_.empty() ? 1 : audit_.back().seq + 1;
  const std::string line = to_json(event).dump() + "\n";
  std::ofstream out(root_ / "audit.log", std::ios::binary | std::ios::app);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot append to audit.log");
  audit_.push_back(std::move(event));
  return audit_.back().seq;
}

std::vector<AuditEvent> ObjectStore::audit_events() const {
  std::lock_guard lock(audit_mutex_);
  return audit_;
}

FsckReport ObjectStore::fsck() const {
  FsckReport report;
  std::error_code ec;
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto& fan : fs::directory_iterator(root_ / "objects", ec)) {
    if (!fan.is_directory()) {
      report.problems.push_back("stray file in objects/: " + fan.path().filename().string());
      continue;
    }
    for (const auto& entry : fs::directory_iterator(fan.path(), ec)) {
      const std::string file = entry.path().filename().string();
      const std::string name = fan.path().filename().string() + file;
      if (!file.empty() && file[0] == '.') {
        report.problems.push_back("leftover temp file " + name);
        continue;
      }
      ++report.objects_checked;
      const std::string bytes = read_file(entry.path());
      const auto colon = bytes.find(':');
      if (colon == std::string::npos) {
        report.problems.push_back("object " + name + " has no type tag");
        continue;
      }
      const std::string_view tag = std::string_view(bytes).substr(0, colon);
      const std::string_view payload = std::string_view(bytes).substr(colon + 1);
      const ObjectId actual = ObjectId::of(tag, payload);
      if (actual.str() != name) {
        report.problems.push_back("object " + name + " hashes to " + actual.str());
        continue;
      }
      // Links: commits name a tree and parents, trees name snapshots.
      try {
        const json j = json::parse(payload);
        if (tag == "cmit") {
          links.emplace_back(name, j.at("tree").get<std::string>());
          for (const auto& p : j.at("parents")) links.emplace_back(name, p.get<std::string>());
        } else if (tag == "tree") {
          for (const auto& [_, snap] : j.at("chips").items()) links.emplace_back(name, snap.get<std::string>());
        }
      } catch (const json::exception&) {
        report.problems.push_back("object " + name + " has an unreadable payload");
      }
    }
  }
  for (const auto& [from, to] : links) {
    if (!ObjectId::is_valid_display(to) || !fs::exists(object_path(ObjectId::parse(to)), ec)) {
      report.problems.push_back("object " + from + " links to missing " + to);
    }
  }
  for (const auto& [name, ref] : list_refs()) {
    ++report.refs_checked;
    if (!get_object(ref.head, "cmit")) report.problems.push_back("ref " + name + " names missing commit " + ref.head.str());
  }
  std::uint64_t last = 0;
  for (const auto& e : audit_events()) {
    ++report.audit_events;
    if (e.seq <= last) report.problems.push_back("audit seq " + std::to_string(e.seq) + " not increasing");
    last = e.seq;
  }
  return report;
}

}  // namespace qcsv
