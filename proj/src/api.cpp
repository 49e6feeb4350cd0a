// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include "qcsv/api.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <thread>
#include <vector>

#include <httplib.h>

namespace qcsv {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const auto slash = path.find('/', pos);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > pos) out.emplace_back(path.substr(pos, end - pos));
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

const std::string* find_param(const ApiRequest& req, const std::string& name) {
  const auto it = req.query.find(name);
  return it == req.query.end() ? nullptr : &it->second;
}

std::string required_param(const ApiRequest& req, const std::string& name) {
  const auto* v = find_param(req, name);
  if (!v || v->empty()) throw Error(ErrorCode::BadRequest, "missing query parameter \"" + name + "\"");
  return *v;
}

std::optional<std::string> optional_param(const ApiRequest& req, const std::string& name) {
  const auto* v = find_param(req, name);
  if (!v || v->empty()) return std::nullopt;
  return *v;
}

long long parse_int(const std::string& text, const std::string& what) {
  long long value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadRequest, what + " must be an integer");
  }
  return value;
}

json json_body(const ApiRequest& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, std::string("request body is not JSON: ") + e.what());
  }
}

std::string body_string(const json& body, const char* key, const std::string& fallback = "") {
  const auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  if (!it->is_string()) throw Error(ErrorCode::BadRequest, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

Actor header_actor(const ApiRequest& req) {
  Actor a{"anonymous", ""};
  if (const auto it = req.headers.find("x-author-name"); it != req.headers.end() && !it->second.empty()) {
    a.name = it->second;
  }
  if (const auto it = req.headers.find("x-author-email"); it != req.headers.end()) a.email = it->second;
  return a;
}

/// Reads {"author": {"name","email"}} or flat "<prefix>_name"/"<prefix>_email".
Actor body_actor(const json& body, const char* object_key, const std::string& prefix, const Actor& fallback) {
  Actor a = fallback;
  if (const auto it = body.find(object_key); it != body.end() && it->is_object()) {
    a.name = body_string(*it, "name", a.name);
    a.email = body_string(*it, "email", a.email);
  }
  a.name = body_string(body, (prefix + "_name").c_str(), a.name);
  a.email = body_string(body, (prefix + "_email").c_str(), a.email);
  return a;
}

json array_of(const auto& items) {
  json out = json::array();
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

json series_map(const std::map<std::string, ChartSeries>& m) {
  json out = json::object();
  for (const auto& [k, s] : m) out[k] = to_json(s);
  return out;
}

json experiment_map(const std::map<std::string, ExperimentSeries>& m) {
  json out = json::object();
  for (const auto& [k, s] : m) out[k] = to_json(s);
  return out;
}

[[noreturn]] void not_found(const ApiRequest& req) {
  throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
}

[[noreturn]] void bad_method(const ApiRequest& req) {
  throw Error(ErrorCode::MethodNotAllowed, req.method + " not allowed on " + req.path);
}

}  // namespace

ApiResponse error_response(const Error& error) {
  json body{{"status", http_status(error.code())},
            {"code", to_string(error.code())},
            {"message", error.what()},
            {"detail", error.detail()}};
  return {http_status(error.code()), body.dump()};
}

std::shared_ptr<Workspace> Workspace::open(const std::filesystem::path& data_dir, bool create_if_missing) {
  auto ws = std::make_shared<Workspace>();
  ws->repository = Repository::open(data_dir, create_if_missing);
  ws->characterization = std::make_unique<CharacterizationStore>(*ws->repository);
  return ws;
}

ApiService::ApiService(std::shared_ptr<Workspace> workspace)
    : workspace_(std::move(workspace)), charts_(*workspace_->repository, *workspace_->characterization) {}

ApiResponse ApiService::handle(const ApiRequest& request) const {
  try {
    int status = 200;
    json body = dispatch(request, status);
    return {status, body.dump()};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(ErrorCode::BadRequest, e.what()));
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::Internal, e.what()));
  }
}

json ApiService::dispatch(const ApiRequest& req, int& status) const {
  if (req.path.rfind(kApiBase, 0) != 0) not_found(req);
  const std::vector<std::string> seg = split_path(std::string_view(req.path).substr(kApiBase.size()));
  const std::string& m = req.method;
  Repository& repo = *workspace_->repository;
  CharacterizationStore& chars = *workspace_->characterization;
  const auto n = seg.size();

  if (n >= 1 && seg[0] == "branches") {
    if (n == 1) {
      if (m == "GET") return array_of(repo.list_branches());
      if (m != "POST") bad_method(req);
      const json body = json_body(req);
      const Actor owner = body_actor(body, "owner", "owner", header_actor(req));
      std::optional<std::string> from;
      if (const auto f = body_string(body, "from"); !f.empty()) from = f;
      status = 201;
      return to_json(repo.create_branch(body_string(body, "name"), owner, body_string(body, "description"), from));
    }
    const std::string& name = seg[1];
    if (n == 2) {
      if (m != "DELETE") bad_method(req);
      std::string confirm;
      if (const auto c = optional_param(req, "confirm")) confirm = *c;
      confirm = body_string(json_body(req), "confirm", confirm);
      repo.delete_branch(name, confirm, header_actor(req));
      return {{"deleted", name}};
    }
    if (n == 3 && seg[2] == "rename") {
      if (m != "POST") bad_method(req);
      return to_json(repo.rename_branch(name, body_string(json_body(req), "new_name"), header_actor(req)));
    }
    if (n == 3 && seg[2] == "copy") {
      if (m != "POST") bad_method(req);
      status = 201;
      return to_json(repo.copy_branch(name, body_string(json_body(req), "new_name"), header_actor(req)));
    }
    if (n == 3 && seg[2] == "commits") {
      if (m != "GET") bad_method(req);
      return array_of(repo.log(name));
    }
    if (n == 5 && seg[2] == "chips" && seg[4] == "commits") {
      if (m != "POST") bad_method(req);
      CalibrationSnapshot snapshot;
      json meta;
      if (const auto f = req.files.find("file"); f != req.files.end()) {
        snapshot = parse_calibration(std::string_view(f->second.content));
        meta = json::object();
        for (const auto& [k, v] : req.form) meta[k] = v;
      } else {
        meta = json_body(req);
        const auto cal = meta.find("calibration");
        if (cal == meta.end()) throw Error(ErrorCode::BadRequest, "missing \"calibration\" document");
        snapshot = parse_calibration(*cal);
      }
      const Actor author = body_actor(meta, "author", "author", header_actor(req));
      std::optional<Timestamp> ts;
      if (const auto t = body_string(meta, "timestamp"); !t.empty()) ts = parse_iso(t);
      const ObjectId id = repo.commit_snapshot(name, seg[3], snapshot, author, body_string(meta, "message"), ts);
      status = 201;
      return {{"id", id.str()}, {"commit", to_json(repo.read_commit(id))}};
    }
    not_found(req);
  }

  if (n == 2 && seg[0] == "commits") {
    if (m != "GET") bad_method(req);
    const CommitData data = repo.get_commit(seg[1]);
    json chips = json::object();
    for (const auto& [chip, snap] : data.chips) chips[chip] = to_json(snap);
    return {{"commit", to_json(data.commit)}, {"tree", to_json(data.tree)}, {"chips", std::move(chips)}};
  }

  if (n == 1 && seg[0] == "diff") {
    if (m != "GET") bad_method(req);
    const std::string from = required_param(req, "from");
    const std::string to = required_param(req, "to");
    json out = to_json(repo.diff(optional_param(req, "branch"), from, to));
    out["from"] = repo.resolve_commit(from).str();
    out["to"] = repo.resolve_commit(to).str();
    return out;
  }

  if (n == 1 && seg[0] == "merge") {
    if (m != "POST") bad_method(req);
    const json body = json_body(req);
    const std::string strategy_name = body_string(body, "strategy", "manual");
    const auto strategy = merge_strategy_from_string(strategy_name);
    if (!strategy) throw Error(ErrorCode::BadRequest, "strategy must be manual, ours or theirs");
    Resolutions resolutions;
    if (const auto r = body.find("resolutions"); r != body.end()) resolutions = resolutions_from_json(*r);
    std::optional<Timestamp> ts;
    if (const auto t = body_string(body, "timestamp"); !t.empty()) ts = parse_iso(t);
    const std::string from = body_string(body, "from_branch");
    const std::string to = body_string(body, "to_branch");
    const Actor author = body_actor(body, "author", "author", header_actor(req));
    const std::string message = body_string(body, "message", "merge " + from + " into " + to);
    const MergeResult result = repo.merge(from, to, author, message, *strategy, resolutions, ts);
    json settled = json::array();
    for (const auto& c : result.conflicts) settled.push_back(to_json(c));
    status = 201;
    return {{"id", result.commit.str()},
            {"commit", to_json(repo.read_commit(result.commit))},
            {"base", result.base.str()},
            {"resolved_conflicts", std::move(settled)}};
  }

  if (n == 1 && seg[0] == "history") {
    if (m != "GET") bad_method(req);
    std::optional<std::size_t> limit;
    if (const auto l = optional_param(req, "limit")) {
      const long long v = parse_int(*l, "limit");
      if (v < 0) throw Error(ErrorCode::BadRequest, "limit must be non-negative");
      limit = static_cast<std::size_t>(v);
    }
    return array_of(repo.history(limit, optional_param(req, "branch")));
  }

  if (n >= 1 && seg[0] == "characterization") {
    if (n == 1) {
      if (m != "POST") bad_method(req);
      IngestResult result;
      const Actor actor = header_actor(req);
      if (const auto f = req.files.find("file"); f != req.files.end()) {
        result = chars.ingest_upload(f->second.filename, std::string_view(f->second.content), actor);
      } else if (const auto fn = optional_param(req, "filename")) {
        result = chars.ingest_upload(*fn, std::string_view(req.body), actor);
      } else {
        const json body = json_body(req);
        const auto doc = body.find("document");
        if (doc == body.end()) throw Error(ErrorCode::BadRequest, "missing \"document\"");
        result = chars.ingest_upload(body_string(body, "filename"), *doc, actor);
      }
      status = result.duplicate ? 200 : 201;
      return {{"chip", result.chip}, {"upload", result.upload.str()}, {"duplicate", result.duplicate}};
    }
    if (m != "GET") bad_method(req);
    if (n == 2 && seg[1] == "chips") return array_of(chars.list_chips());
    if (n == 4 && seg[2] == "qubits") {
      return {{"chip", seg[1]}, {"qubit", seg[3]}, {"series", experiment_map(chars.series_by_qubit(seg[1], seg[3]))}};
    }
    if (n == 4 && seg[2] == "properties") {
      return {{"chip", seg[1]},
              {"property", seg[3]},
              {"series", experiment_map(chars.series_by_property(seg[1], seg[3]))}};
    }
    not_found(req);
  }

  if (n >= 2 && seg[0] == "charts") {
    if (m != "GET") bad_method(req);
    if (n == 3 && seg[1] == "calibration" && seg[2] == "by-commit") {
      const std::string branch = required_param(req, "branch");
      const std::string chip = required_param(req, "chip");
      const std::string commit = required_param(req, "commit");
      const std::string property = required_param(req, "property");
      const std::string kind = optional_param(req, "kind").value_or("gates");
      if (kind == "gates") {
        int pulse = 0;
        if (const auto p = optional_param(req, "pulse")) pulse = static_cast<int>(parse_int(*p, "pulse"));
        return series_map(charts_.by_commit_gate_groups(branch, chip, commit, property, pulse));
      }
      if (kind == "qubits") return to_json(charts_.by_commit_qubits(branch, chip, commit, property));
      throw Error(ErrorCode::BadRequest, "kind must be gates or qubits");
    }
    if (n == 3 && seg[1] == "calibration" && seg[2] == "by-property") {
      const std::string entity = required_param(req, "entity");
      if (entity != "qubit" && entity != "gate") throw Error(ErrorCode::BadRequest, "entity must be qubit or gate");
      int pulse = 0;
      if (const auto p = optional_param(req, "pulse")) pulse = static_cast<int>(parse_int(*p, "pulse"));
      return to_json(charts_.calibration_property_series(
          required_param(req, "branch"), required_param(req, "chip"),
          entity == "qubit" ? EntityKind::Qubit : EntityKind::Gate, required_param(req, "name"),
          required_param(req, "property"), pulse));
    }
    if (n == 2 && seg[1] == "characterization") {
      const std::string mode = required_param(req, "mode");
      if (mode != "qubit" && mode != "property") throw Error(ErrorCode::BadRequest, "mode must be qubit or property");
      return series_map(charts_.characterization_series(
          required_param(req, "chip"),
          mode == "qubit" ? CharacterizationMode::ByQubit : CharacterizationMode::ByProperty,
          required_param(req, "key")));
    }
  }
  not_found(req);
}

void serve(const ApiService& service, const ServeOptions& options, const std::atomic<bool>& stop,
           const std::function<void(int)>& on_ready) {
  httplib::Server server;
  // SO_REUSEPORT (the library default) would let a second server share the port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (options.static_dir && !server.set_mount_point("/", options.static_dir->string())) {
    throw Error(ErrorCode::BadRequest, "static directory not found: " + options.static_dir->string());
  }
  const auto handler = [&service](const httplib::Request& in, httplib::Response& out) {
    ApiRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.query.emplace(k, v);
    for (const auto& [k, v] : in.headers) req.headers.emplace(lower(k), v);
    req.body = in.body;
    for (const auto& [name, item] : in.files) {
      if (item.filename.empty()) {
        req.form.emplace(name, item.content);
      } else {
        req.files.emplace(name, UploadedFile{item.filename, item.content});
      }
    }
    const ApiResponse res = service.handle(req);
    out.status = res.status;
    out.set_content(res.body, res.content_type);
  };
  const std::string pattern = ".*";
  server.Get(pattern, handler);
  server.Post(pattern, handler);
  server.Put(pattern, handler);
  server.Patch(pattern, handler);
  server.Delete(pattern, handler);

  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.bind_addr);
    if (port < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + options.bind_addr);
  } else if (!server.bind_to_port(options.bind_addr, port)) {
    throw Error(ErrorCode::PortInUse, "cannot bind " + options.bind_addr + ":" + std::to_string(port));
  }
  std::thread listener([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  if (on_ready) on_ready(port);
  while (!stop.load() && server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(25));
  // stop() lets in-flight requests finish before the worker pool joins.
  server.stop();
  listener.join();
}

}  // namespace qcsv
