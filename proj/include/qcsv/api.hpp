// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qcsv/characterization.hpp"
#include "qcsv/charts.hpp"
#include "qcsv/error.hpp"
#include "qcsv/repository.hpp"

namespace qcsv {

inline constexpr std::string_view kApiBase = "/api/v1";
inline constexpr int kDefaultPort = 5000;

struct UploadedFile {
  std::string filename;
  std::string content;
};

/// Transport-neutral request. `path` excludes the query string.
struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
  std::map<std::string, std::string> form;     // multipart text fields
  std::map<std::string, UploadedFile> files;   // multipart file fields
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// {"status","code","message","detail"} body for a failed request.
ApiResponse error_response(const Error& error);

/// The data directory as the service sees it.
struct Workspace {
  std::shared_ptr<Repository> repository;
  std::unique_ptr<CharacterizationStore> characterization;

  static std::shared_ptr<Workspace> open(const std::filesystem::path& data_dir, bool create_if_missing);
};

/// Routes /api/v1 requests onto the repository, characterization store and
/// chart engine. Holds no per-client state; safe to call from many threads.
class ApiService {
 public:
  explicit ApiService(std::shared_ptr<Workspace> workspace);

  ApiResponse handle(const ApiRequest& request) const;

  Workspace& workspace() const noexcept { return *workspace_; }

 private:
  nlohmann::json dispatch(const ApiRequest& request, int& status) const;

  std::shared_ptr<Workspace> workspace_;
  ChartEngine charts_;
};

struct ServeOptions {
  std::string bind_addr = "127.0.0.1";
  int port = kDefaultPort;
  std::optional<std::filesystem::path> static_dir;  // served at "/"
};

/// Runs the HTTP server until `stop` becomes true (polled) or the server is
/// stopped. Calls `on_ready(port)` once listening. Throws Error(PortInUse).
void serve(const ApiService& service, const ServeOptions& options, const std::atomic<bool>& stop,
           const std::function<void(int)>& on_ready = {});

}  // namespace qcsv
