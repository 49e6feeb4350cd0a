// Copyright (c) 2026 The qcsv Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <atomic>
#include <future>
#include <thread>

#include "qcsv/api.hpp"
#include "qcsv/canonical_json.hpp"

namespace py = pybind11;

namespace {

// In-process API plus an optional background HTTP listener.
class Service {
 public:
  Service(const std::filesystem::path& data_dir, bool create)
      : api_(qcsv::Workspace::open(data_dir, create)) {}
  ~Service() { stop(); }

  std::pair<int, std::string> request(const std::string& method, const std::string& path,
                                      const std::map<std::string, std::string>& query, const std::string& body,
                                      const std::map<std::string, std::string>& headers) const {
    qcsv::ApiRequest req;
    req.method = method;
    req.path = path;
    req.query = query;
    req.body = body;
    for (const auto& [k, v] : headers) {
      std::string name = k;
      for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers[name] = v;
    }
    py::gil_scoped_release release;
    const qcsv::ApiResponse res = api_.handle(req);
    return {res.status, res.body};
  }

  int start(int port, const std::string& bind) {
    if (thread_.joinable()) throw std::runtime_error("server already running");
    stop_flag_ = false;
    auto ready = std::make_shared<std::promise<int>>();
    auto fut = ready->get_future();
    thread_ = std::thread([this, port, bind, ready] {
      try {
        qcsv::serve(api_, {bind, port, std::nullopt}, stop_flag_, [&](int p) { ready->set_value(p); });
      } catch (...) {
        try {
          ready->set_exception(std::current_exception());
        } catch (const std::future_error&) {
        }
      }
    });
    py::gil_scoped_release release;
    try {
      return fut.get();
    } catch (...) {
      thread_.join();
      throw;
    }
  }

  void stop() {
    if (!thread_.joinable()) return;
    stop_flag_ = true;
    py::gil_scoped_release release;
    thread_.join();
  }

 private:
  qcsv::ApiService api_;
  std::atomic<bool> stop_flag_{false};
  std::thread thread_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "qcsv core bindings";

  py::register_exception<qcsv::Error>(m, "CoreError");

  py::class_<Service>(m, "Service")
      .def(py::init<const std::filesystem::path&, bool>(), py::arg("data_dir"), py::arg("create") = false)
      .def("request", &Service::request, py::arg("method"), py::arg("path"),
           py::arg("query") = std::map<std::string, std::string>{}, py::arg("body") = "",
           py::arg("headers") = std::map<std::string, std::string>{},
           "Dispatch one /api/v1 request; returns (status, body).")
      .def("start", &Service::start, py::arg("port") = 0, py::arg("bind") = "127.0.0.1",
           "Serve HTTP in a background thread; returns the bound port.")
      .def("stop", &Service::stop);

  m.def(
      "canonical_calibration",
      [](const std::string& text) { return qcsv::serialize_canonical(qcsv::parse_calibration(std::string_view(text))); },
      py::arg("text"));
  m.def(
      "object_id", [](const std::string& tag, const std::string& payload) { return qcsv::ObjectId::of(tag, payload).str(); },
      py::arg("tag"), py::arg("payload"));
  m.def(
      "gate_group",
      [](const std::string& name) {
        try {
          return qcsv::classify_gate(name).label();
        } catch (const qcsv::Error&) {
          return "Other(" + name + ")";
        }
      },
      py::arg("name"));
  m.attr("API_BASE") = std::string(qcsv::kApiBase);
}
