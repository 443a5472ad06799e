// Copyright 2026 The dialect-audit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP front end: POST /api/predict, GET /api/examples, GET /api/health.
//
// Handlers are plain functions from request data to (status, body) so they
// can be exercised without sockets; PredictionServer binds them to
// cpp-httplib. No endpoint takes a threshold: verdicts are computed client
// side from the returned scores.

#include <atomic>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dialect_audit/corpus.hpp"
#include "dialect_audit/detail/text.hpp"
#include "dialect_audit/detail/utf8.hpp"
#include "dialect_audit/scorers.hpp"
#include "dialect_audit/version.hpp"

// The stock backlog of 5 drops connections under bursts of parallel clients.
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 128
#endif

// Last: httplib drags in <resolv.h>, whose _res macro breaks Eigen headers
// included after it.
#include <httplib.h>

namespace dialect_audit::service {

struct ServiceOptions {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::size_t max_text_chars = 5000;
  // Empty allows any origin.
  std::vector<std::string> cors_allowlist;
  // Directory with the built UI bundle, served under "/" when set.
  std::optional<std::string> static_dir;
};

struct HttpResult {
  int status = 200;
  std::string body;
};

inline HttpResult error_result(int status, std::string_view code,
                               std::string_view message) {
  const nlohmann::ordered_json j = {
      {"error", {{"code", code}, {"message", message}}}};
  return {status, j.dump()};
}

inline nlohmann::ordered_json scores_body(const LabelScores& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto l : kAllLabels) j[std::string(label_name(l))] = s[l];
  return j;
}

inline HttpResult handle_predict(const Scorer& scorer, std::string_view body,
                                 const ServiceOptions& opts) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return error_result(400, "malformed_json", "request body is not valid JSON");
  }
  if (!req.is_object()) {
    return error_result(400, "malformed_json", "request body must be a JSON object");
  }
  if (!req.contains("text") || !req.at("text").is_string()) {
    return error_result(400, "missing_text", "field 'text' (string) is required");
  }
  const std::string text = req.at("text").get<std::string>();
  const auto chars = detail::utf8_length(text);
  if (!chars) return error_result(400, "invalid_text", "text is not valid UTF-8");
  if (detail::trim(text).empty()) {
    return error_result(400, "empty_text", "text must not be empty");
  }
  if (*chars > opts.max_text_chars) {
    return error_result(413, "text_too_long",
                        "text exceeds " + std::to_string(opts.max_text_chars) +
                            " characters");
  }
  try {
    return {200, scores_body(scorer.score(text)).dump()};
  } catch (const std::exception& e) {
    return error_result(500, "scoring_failed", e.what());
  }
}

inline std::string examples_body() {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : builtin_minimal_pairs()) arr.push_back(to_json(p));
  return arr.dump();
}

inline HttpResult handle_health(const Scorer& scorer) {
  const nlohmann::ordered_json j = {{"status", "ok"},
                                    {"backend", scorer.backend()},
                                    {"model_digest", scorer.model_digest()},
                                    {"version", kToolVersion}};
  return {200, j.dump()};
}

/// Owns an httplib::Server bound to a shared, immutable scorer.
class PredictionServer {
 public:
  PredictionServer(const Scorer& scorer, ServiceOptions opts)
      : scorer_(scorer), opts_(std::move(opts)), examples_(examples_body()) {
    install_routes();
  }

  ~PredictionServer() { stop(); }

  /// Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind() {
    if (opts_.port == 0) {
      port_ = server_.bind_to_any_port(opts_.bind_address);
    } else {
      port_ = server_.bind_to_port(opts_.bind_address, opts_.port) ? opts_.port : -1;
    }
    return port_;
  }

  /// Blocks serving requests until stop().
  bool listen() { return server_.listen_after_bind(); }

  /// Binds and serves on a background thread; returns the port.
  int start_background() {
    if (bind() < 0) return -1;
    worker_ = std::thread([this] { listen(); });
    server_.wait_until_ready();
    return port_;
  }

  void stop() {
    server_.stop();
    if (worker_.joinable()) worker_.join();
  }

  int port() const { return port_; }

 private:
  void install_routes() {
    const auto json_reply = [](httplib::Response& res, const HttpResult& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server_.set_post_routing_handler(
        [this](const httplib::Request& req, httplib::Response& res) {
          add_cors(req, res);
        });
    server_.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server_.Post(R"(/api/predict/?)",
                 [this, json_reply](const httplib::Request& req, httplib::Response& res) {
                   json_reply(res, handle_predict(scorer_, req.body, opts_));
                 });
    server_.Get(R"(/api/examples/?)",
                [this](const httplib::Request&, httplib::Response& res) {
                  res.set_content(examples_, "application/json");
                });
    server_.Get(R"(/api/health/?)",
                [this, json_reply](const httplib::Request&, httplib::Response& res) {
                  json_reply(res, handle_health(scorer_));
                });
    if (opts_.static_dir) server_.set_mount_point("/", *opts_.static_dir);
  }

  void add_cors(const httplib::Request& req, httplib::Response& res) const {
    if (opts_.cors_allowlist.empty()) {
      res.set_header("Access-Control-Allow-Origin", "*");
      return;
    }
    const std::string origin = req.get_header_value("Origin");
    for (const auto& allowed : opts_.cors_allowlist) {
      if (allowed == origin) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
        return;
      }
    }
  }

  const Scorer& scorer_;
  ServiceOptions opts_;
  std::string examples_;
  httplib::Server server_;
  std::thread worker_;
  int port_ = -1;
};

}  // namespace dialect_audit::service
