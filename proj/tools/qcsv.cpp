// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

// qcsv: command-line client and server launcher.
//
// Without QCSV_URL (or --url) every subcommand runs in-process against the
// local data directory; with it, requests go to a running server. Both paths
// produce the same API payloads, which --json prints verbatim.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "qcsv/api.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitError = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

class Transport {
 public:
  virtual ~Transport() = default;
  virtual qcsv::ApiResponse send(const qcsv::ApiRequest& request) = 0;
};

class LocalTransport : public Transport {
 public:
  explicit LocalTransport(const fs::path& data_dir) : service_(qcsv::Workspace::open(data_dir, false)) {}
  qcsv::ApiResponse send(const qcsv::ApiRequest& request) override { return service_.handle(request); }

 private:
  qcsv::ApiService service_;
};

class RemoteTransport : public Transport {
 public:
  explicit RemoteTransport(const std::string& url) : client_(url) {
    client_.set_connection_timeout(5);
    client_.set_read_timeout(60);
  }

  qcsv::ApiResponse send(const qcsv::ApiRequest& req) override {
    httplib::Headers headers;
    for (const auto& [k, v] : req.headers) headers.emplace(k, v);
    const std::string path = req.path;
    httplib::Result res;
    if (req.method == "GET") {
      httplib::Params params(req.query.begin(), req.query.end());
      res = client_.Get(path, params, headers);
    } else if (!req.files.empty()) {
      httplib::MultipartFormDataItems items;
      for (const auto& [name, f] : req.files) items.push_back({name, f.content, f.filename, "application/json"});
      for (const auto& [name, v] : req.form) items.push_back({name, v, "", "text/plain"});
      res = client_.Post(path, headers, items);
    } else if (req.method == "POST") {
      res = client_.Post(path, headers, req.body, "application/json");
    } else if (req.method == "DELETE") {
      res = client_.Delete(path, headers, req.body, "application/json");
    } else {
      throw qcsv::Error(qcsv::ErrorCode::BadRequest, "unsupported method " + req.method);
    }
    if (!res) {
      throw std::runtime_error("cannot reach server: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body, res->get_header_value("Content-Type")};
  }

 private:
  httplib::Client client_;
};

struct Globals {
  std::string data_dir;
  std::string url;
  bool json_output = false;
  std::string author_name;
  std::string author_email;
};

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CLI::ValidationError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt_value(const json& v) { return v.is_null() ? "(absent)" : v.dump(); }

std::string fmt_row_key(const json& a) {
  std::string s = a.at("chip").get<std::string>() + "/" + a.at("table").get<std::string>() + "/";
  if (a.at("table") == "qubit") return s + a.at("qubit").get<std::string>();
  return s + a.at("gate").get<std::string>() + "[" + std::to_string(a.at("pulse").get<int>()) + "]";
}

void print_commit(std::ostream& out, const json& c) {
  out << "commit " << c.at("id").get<std::string>() << "\n";
  if (c.at("parents").size() > 1) {
    out << "Merge:";
    for (const auto& p : c.at("parents")) out << " " << p.get<std::string>().substr(0, 8);
    out << "\n";
  }
  out << "Author: " << c.at("author").at("name").get<std::string>() << " <"
      << c.at("author").at("email").get<std::string>() << ">\n";
  out << "Date:   " << c.at("timestamp").get<std::string>() << "\n\n";
  out << "    " << c.at("message").get<std::string>() << "\n\n";
}

void print_series(std::ostream& out, const json& s) {
  out << s.at("label").get<std::string>() << " (" << s.at("x_kind").get<std::string>() << ")\n";
  for (const auto& p : s.at("points")) {
    out << "  " << p.at("x").get<std::string>() << "  " << p.at("y").dump() << "\n";
  }
}

/// Renders a successful payload for humans; `kind` names the subcommand.
void print_human(const std::string& kind, const json& body) {
  std::ostream& out = std::cout;
  if (kind == "branch list") {
    for (const auto& b : body) {
      out << b.at("name").get<std::string>() << "  " << b.at("head").get<std::string>() << "  "
          << b.at("owner").at("name").get<std::string>() << "  " << b.at("description").get<std::string>() << "\n";
    }
  } else if (kind == "branch create" || kind == "branch rename" || kind == "branch copy") {
    out << body.at("name").get<std::string>() << " -> " << body.at("head").get<std::string>() << "\n";
  } else if (kind == "branch delete") {
    out << "deleted " << body.at("deleted").get<std::string>() << "\n";
  } else if (kind == "commit") {
    out << body.at("id").get<std::string>() << "\n";
  } else if (kind == "log") {
    for (const auto& c : body) print_commit(out, c);
  } else if (kind == "show") {
    print_commit(out, body.at("commit"));
    for (const auto& [chip, doc] : body.at("chips").items()) {
      out << "chip " << chip << "\n";
      for (const auto& [q, props] : doc.at("Qubits").items()) out << "  qubit " << q << " " << props.dump() << "\n";
      for (const auto& [g, pulses] : doc.at("Gates").items()) {
        for (std::size_t i = 0; i < pulses.size(); ++i) out << "  gate " << g << "[" << i << "] " << pulses[i].dump() << "\n";
      }
    }
  } else if (kind == "diff") {
    const bool empty = body.at("chips_added").empty() && body.at("chips_removed").empty() &&
                       body.at("row_additions").empty() && body.at("row_deletions").empty() &&
                       body.at("cell_modifications").empty();
    if (empty) {
      out << "no differences\n";
      return;
    }
    for (const auto& c : body.at("chips_added")) out << "+ chip " << c.get<std::string>() << "\n";
    for (const auto& c : body.at("chips_removed")) out << "- chip " << c.get<std::string>() << "\n";
    for (const auto& r : body.at("row_additions")) out << "+ " << fmt_row_key(r) << " " << r.at("row").dump() << "\n";
    for (const auto& r : body.at("row_deletions")) out << "- " << fmt_row_key(r) << " " << r.at("row").dump() << "\n";
    for (const auto& m : body.at("cell_modifications")) {
      const json& a = m.at("address");
      out << "~ " << fmt_row_key(a) << "." << a.at("column").get<std::string>() << ": " << fmt_value(m.at("old"))
          << " -> " << fmt_value(m.at("new")) << "\n";
    }
  } else if (kind == "merge") {
    out << "merged " << body.at("id").get<std::string>() << " (" << body.at("resolved_conflicts").size()
        << " conflict(s) resolved)\n";
  } else if (kind == "history") {
    for (const auto& e : body) {
      out << e.at("seq").get<std::uint64_t>() << "  " << e.at("timestamp").get<std::string>() << "  "
          << e.at("actor").at("name").get<std::string>() << "  " << e.at("action").get<std::string>() << "  "
          << e.at("details").dump() << "\n";
    }
  } else if (kind == "char ingest") {
    out << (body.at("duplicate").get<bool>() ? "duplicate upload " : "ingested ") << body.at("upload").get<std::string>()
        << " for chip " << body.at("chip").get<std::string>() << "\n";
  } else if (kind == "char chips") {
    for (const auto& c : body) {
      out << c.at("chip").get<std::string>() << "  uploads=" << c.at("uploads").get<std::size_t>() << "  qubits=";
      bool first = true;
      for (const auto& q : c.at("qubits")) {
        out << (first ? "" : ",") << q.get<std::string>();
        first = false;
      }
      out << "\n";
    }
  } else if (kind == "char by-qubit" || kind == "char by-property") {
    for (const auto& [key, s] : body.at("series").items()) {
      out << key << "\n";
      for (const auto& p : s.at("points")) {
        out << "  " << p.at("startdatetime").get<std::string>() << "  mean=" << p.at("mean").dump()
            << "  std=" << p.at("std").dump() << "\n";
      }
    }
  } else if (kind == "chart by-property") {
    print_series(out, body);
  } else if (kind == "chart by-commit" || kind == "chart char") {
    if (body.contains("points")) {
      print_series(out, body);
    } else {
      for (const auto& [_, s] : body.items()) print_series(out, s);
    }
  } else {
    out << body.dump(2) << "\n";
  }
}

int report_error(const qcsv::ApiResponse& res) {
  try {
    const json e = res.json();
    std::cerr << "error: " << e.at("code").get<std::string>() << ": " << e.at("message").get<std::string>() << "\n";
    if (e.at("code") == "UnresolvedConflicts" && e.at("detail").is_object()) {
      for (const auto& c : e.at("detail").at("conflicts")) {
        const json& a = c.at("address");
        std::cerr << "  " << c.at("kind").get<std::string>() << "  " << fmt_row_key(a) << "."
                  << a.at("column").get<std::string>() << "  base=" << fmt_value(c.at("base"))
                  << "  ours=" << fmt_value(c.at("ours")) << "  theirs=" << fmt_value(c.at("theirs")) << "\n";
      }
    }
  } catch (const std::exception&) {
    std::cerr << "error: HTTP " << res.status << ": " << res.body << "\n";
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcsv: versioned calibration and characterization data store"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--data-dir", g.data_dir, "Data directory (env QCSV_DATA_DIR, default ./qcsv-data)");
  app.add_option("--url", g.url, "Server URL; switches to client mode (env QCSV_URL)");
  app.add_flag("--json", g.json_output, "Print the raw API response body");
  app.add_option("--author-name", g.author_name, "Actor / commit author name");
  app.add_option("--author-email", g.author_email, "Actor / commit author email");

  qcsv::ApiRequest req;
  std::string kind;
  bool local_only = false;

  // init / serve
  auto* init = app.add_subcommand("init", "Create an empty repository");
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = qcsv::kDefaultPort;
  std::string bind_addr = "127.0.0.1";
  std::string static_dir;
  bool create = false;
  serve->add_option("--port", port, "Port (default 5000)");
  serve->add_option("--bind", bind_addr, "Bind address");
  serve->add_option("--static-dir", static_dir, "Directory served at /");
  serve->add_flag("--init", create, "Create the data directory if missing");

  // branch
  auto* branch = app.add_subcommand("branch", "Branch management");
  branch->require_subcommand(1);
  auto* b_create = branch->add_subcommand("create", "Create a branch");
  auto* b_list = branch->add_subcommand("list", "List branches");
  auto* b_rename = branch->add_subcommand("rename", "Rename a branch");
  auto* b_copy = branch->add_subcommand("copy", "Copy a branch");
  auto* b_delete = branch->add_subcommand("delete", "Delete a branch");
  std::string name, new_name, owner_name, owner_email, description, from, confirm;
  b_create->add_option("name", name)->required();
  b_create->add_option("--owner-name", owner_name);
  b_create->add_option("--owner-email", owner_email);
  b_create->add_option("--description", description);
  b_create->add_option("--from", from, "Source branch or commit");
  b_rename->add_option("old", name)->required();
  b_rename->add_option("new", new_name)->required();
  b_copy->add_option("source", name)->required();
  b_copy->add_option("new", new_name)->required();
  b_delete->add_option("name", name)->required();
  b_delete->add_option("--confirm", confirm, "Repeat the branch name to confirm");

  // commit / log / show / diff / merge / history
  auto* commit = app.add_subcommand("commit", "Commit a calibration file for a chip");
  std::string branch_name, chip, file, message, timestamp;
  commit->add_option("-b,--branch", branch_name)->required();
  commit->add_option("-c,--chip", chip)->required();
  commit->add_option("-f,--file", file)->required()->check(CLI::ExistingFile);
  commit->add_option("-m,--message", message)->required();
  commit->add_option("--timestamp", timestamp, "Commit time, YYYY-MM-DDTHH:MM:SS.ffffffZ");

  auto* log = app.add_subcommand("log", "First-parent history of a branch");
  log->add_option("-b,--branch", branch_name)->required();

  auto* show = app.add_subcommand("show", "Show a commit and its calibration data");
  std::string commit_id, out_file;
  show->add_option("commit", commit_id)->required();
  show->add_option("-o,--output", out_file, "Also write the payload to this file");

  auto* diff = app.add_subcommand("diff", "Cell-level diff between two commits");
  std::string diff_from, diff_to;
  bool any_branch = false;
  diff->add_option("-b,--branch", branch_name);
  diff->add_option("--from", diff_from)->required();
  diff->add_option("--to", diff_to)->required();
  diff->add_flag("--any-branch", any_branch, "Allow commits from different branches");

  auto* merge = app.add_subcommand("merge", "Merge one branch into another");
  std::string merge_from, merge_to, strategy = "manual", resolutions_file;
  merge->add_option("--from", merge_from)->required();
  merge->add_option("--to", merge_to)->required();
  merge->add_option("-m,--message", message);
  merge->add_option("--strategy", strategy)->check(CLI::IsMember({"manual", "ours", "theirs"}));
  merge->add_option("--resolutions", resolutions_file, "JSON array of {address, value}")->check(CLI::ExistingFile);
  merge->add_option("--timestamp", timestamp);

  auto* history = app.add_subcommand("history", "Repository activity, newest first");
  int limit = -1;
  history->add_option("--limit", limit);
  history->add_option("--branch", branch_name);

  // characterization
  auto* ch = app.add_subcommand("char", "Characterization data");
  ch->require_subcommand(1);
  auto* c_ingest = ch->add_subcommand("ingest", "Upload a <chip>.data.json file");
  auto* c_chips = ch->add_subcommand("chips", "List chips");
  auto* c_qubit = ch->add_subcommand("by-qubit", "All properties of one qubit");
  auto* c_prop = ch->add_subcommand("by-property", "One property across qubits");
  std::string key;
  c_ingest->add_option("file", file)->required()->check(CLI::ExistingFile);
  c_qubit->add_option("chip", chip)->required();
  c_qubit->add_option("qubit", key)->required();
  c_prop->add_option("chip", chip)->required();
  c_prop->add_option("property", key)->required();

  // charts
  auto* chart = app.add_subcommand("chart", "Chart series");
  chart->require_subcommand(1);
  auto* h_commit = chart->add_subcommand("by-commit", "Gate groups or qubits at one commit");
  auto* h_prop = chart->add_subcommand("by-property", "One entity property across commits");
  auto* h_char = chart->add_subcommand("char", "Characterization series");
  std::string chart_kind = "gates", property, entity, mode;
  int pulse = 0;
  h_commit->add_option("-b,--branch", branch_name)->required();
  h_commit->add_option("-c,--chip", chip)->required();
  h_commit->add_option("--commit", commit_id)->required();
  h_commit->add_option("--kind", chart_kind)->check(CLI::IsMember({"gates", "qubits"}));
  h_commit->add_option("--property", property)->required();
  h_commit->add_option("--pulse", pulse);
  h_prop->add_option("-b,--branch", branch_name)->required();
  h_prop->add_option("-c,--chip", chip)->required();
  h_prop->add_option("--entity", entity)->required()->check(CLI::IsMember({"qubit", "gate"}));
  h_prop->add_option("--name", name)->required();
  h_prop->add_option("--property", property)->required();
  h_prop->add_option("--pulse", pulse);
  h_char->add_option("--chip", chip)->required();
  h_char->add_option("--mode", mode)->required()->check(CLI::IsMember({"qubit", "property"}));
  h_char->add_option("--key", key)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (g.data_dir.empty()) g.data_dir = env_or("QCSV_DATA_DIR", "./qcsv-data");
  if (g.url.empty()) g.url = env_or("QCSV_URL", "");

  try {
    if (*init) {
      const bool existed = fs::exists(fs::path(g.data_dir) / "format-version");
      qcsv::Workspace::open(g.data_dir, true);
      std::cout << (existed ? "repository already initialized at " : "initialized repository at ") << g.data_dir
                << "\n";
      return kExitOk;
    }
    if (*serve) {
      auto ws = qcsv::Workspace::open(g.data_dir, create);
      qcsv::ApiService service(ws);
      qcsv::ServeOptions options;
      options.bind_addr = bind_addr;
      options.port = port;
      if (!static_dir.empty()) options.static_dir = static_dir;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      qcsv::serve(service, options, g_stop, [&](int p) {
        std::cout << "listening on http://" << bind_addr << ":" << p << std::endl;
      });
      return kExitOk;
    }
  } catch (const qcsv::Error& e) {
    return report_error(qcsv::error_response(e));
  }

  if (!g.author_name.empty()) req.headers["x-author-name"] = g.author_name;
  if (!g.author_email.empty()) req.headers["x-author-email"] = g.author_email;
  const std::string base(qcsv::kApiBase);

  try {
    if (*b_list) {
      kind = "branch list";
      req.method = "GET";
      req.path = base + "/branches";
    } else if (*b_create) {
      kind = "branch create";
      req.method = "POST";
      req.path = base + "/branches";
      json body{{"name", name}, {"description", description}};
      json owner = json::object();
      if (!owner_name.empty()) owner["name"] = owner_name;
      if (!owner_email.empty()) owner["email"] = owner_email;
      if (!owner.empty()) body["owner"] = owner;
      if (!from.empty()) body["from"] = from;
      req.body = body.dump();
    } else if (*b_rename || *b_copy) {
      kind = *b_rename ? "branch rename" : "branch copy";
      req.method = "POST";
      req.path = base + "/branches/" + name + (*b_rename ? "/rename" : "/copy");
      req.body = json{{"new_name", new_name}}.dump();
    } else if (*b_delete) {
      kind = "branch delete";
      req.method = "DELETE";
      req.path = base + "/branches/" + name;
      req.body = json{{"confirm", confirm}}.dump();
    } else if (*commit) {
      kind = "commit";
      req.method = "POST";
      req.path = base + "/branches/" + branch_name + "/chips/" + chip + "/commits";
      req.files["file"] = {fs::path(file).filename().string(), read_whole_file(file)};
      req.form["message"] = message;
      if (!g.author_name.empty()) req.form["author_name"] = g.author_name;
      if (!g.author_email.empty()) req.form["author_email"] = g.author_email;
      if (!timestamp.empty()) req.form["timestamp"] = timestamp;
    } else if (*log) {
      kind = "log";
      req.method = "GET";
      req.path = base + "/branches/" + branch_name + "/commits";
    } else if (*show) {
      kind = "show";
      req.method = "GET";
      req.path = base + "/commits/" + commit_id;
    } else if (*diff) {
      kind = "diff";
      if (branch_name.empty() && !any_branch) {
        std::cerr << "diff needs -b/--branch (or --any-branch)\n" << diff->help();
        return kExitUsage;
      }
      req.method = "GET";
      req.path = base + "/diff";
      req.query = {{"from", diff_from}, {"to", diff_to}};
      if (!any_branch) req.query["branch"] = branch_name;
    } else if (*merge) {
      kind = "merge";
      req.method = "POST";
      req.path = base + "/merge";
      json body{{"from_branch", merge_from}, {"to_branch", merge_to}, {"strategy", strategy}};
      if (!message.empty()) body["message"] = message;
      if (!timestamp.empty()) body["timestamp"] = timestamp;
      json author = json::object();
      if (!g.author_name.empty()) author["name"] = g.author_name;
      if (!g.author_email.empty()) author["email"] = g.author_email;
      if (!author.empty()) body["author"] = author;
      if (!resolutions_file.empty()) body["resolutions"] = json::parse(read_whole_file(resolutions_file));
      req.body = body.dump();
    } else if (*history) {
      kind = "history";
      req.method = "GET";
      req.path = base + "/history";
      if (limit >= 0) req.query["limit"] = std::to_string(limit);
      if (!branch_name.empty()) req.query["branch"] = branch_name;
    } else if (*c_ingest) {
      kind = "char ingest";
      req.method = "POST";
      req.path = base + "/characterization";
      req.files["file"] = {fs::path(file).filename().string(), read_whole_file(file)};
    } else if (*c_chips) {
      kind = "char chips";
      req.method = "GET";
      req.path = base + "/characterization/chips";
    } else if (*c_qubit) {
      kind = "char by-qubit";
      req.method = "GET";
      req.path = base + "/characterization/" + chip + "/qubits/" + key;
    } else if (*c_prop) {
      kind = "char by-property";
      req.method = "GET";
      req.path = base + "/characterization/" + chip + "/properties/" + key;
    } else if (*h_commit) {
      kind = "chart by-commit";
      req.method = "GET";
      req.path = base + "/charts/calibration/by-commit";
      req.query = {{"branch", branch_name}, {"chip", chip},         {"commit", commit_id},
                   {"kind", chart_kind},    {"property", property}, {"pulse", std::to_string(pulse)}};
    } else if (*h_prop) {
      kind = "chart by-property";
      req.method = "GET";
      req.path = base + "/charts/calibration/by-property";
      req.query = {{"branch", branch_name}, {"chip", chip},         {"entity", entity},
                   {"name", name},          {"property", property}, {"pulse", std::to_string(pulse)}};
    } else if (*h_char) {
      kind = "chart char";
      req.method = "GET";
      req.path = base + "/charts/characterization";
      req.query = {{"chip", chip}, {"mode", mode}, {"key", key}};
    } else {
      std::cerr << app.help();
      return kExitUsage;
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: bad JSON input: " << e.what() << "\n";
    return kExitUsage;
  }

  qcsv::ApiResponse res;
  try {
    std::unique_ptr<Transport> transport;
    if (!g.url.empty()) {
      transport = std::make_unique<RemoteTransport>(g.url);
    } else {
      transport = std::make_unique<LocalTransport>(g.data_dir);
    }
    res = transport->send(req);
  } catch (const qcsv::Error& e) {
    res = qcsv::error_response(e);
  } catch (const std::exception& e) {
    std::cerr << "error: ConnectionError: " << e.what() << "\n";
    return kExitError;
  }

  if (res.status >= 300) {
    if (g.json_output) std::cout << res.body;
    return report_error(res);
  }
  if (!out_file.empty()) {
    std::ofstream(out_file, std::ios::binary) << res.body;
  }
  if (g.json_output) {
    std::cout << res.body;
    return kExitOk;
  }
  try {
    print_human(kind, res.json());
  } catch (const json::exception& e) {
    std::cerr << "error: unexpected response: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}
