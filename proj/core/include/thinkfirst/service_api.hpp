// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "thinkfirst/pipeline.hpp"

namespace thinkfirst {

struct ServiceOptions {
  std::size_t max_upload_bytes = 10u * 1024u * 1024u;
  // When set, every outcome is exported to <dir>/<session>/<n>-<outcome id>/.
  std::optional<std::filesystem::path> session_log_dir;
};

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

// Session bookkeeping behind the HTTP routes, usable without a socket.
//
//   POST /sessions                 multipart field "image" -> 201 {session_id, width, height}
//   POST /sessions/{id}/segment    {query, task_mode?, pipeline_mode?}
//   POST /sessions/{id}/refine     {annotation} | {scribble: [[x, y], ...]}
//   GET  /sessions/{id}/history
//   GET  /healthz
//
// Masks travel as {"width", "height", "runs": [[value, length], ...]}.
// Errors: 400 bad body or undecodable image, 404 unknown session, 413 too
// large, 422 pipeline/protocol error (with "stage"), 502 backend failure.
// Requests on one session run one at a time in arrival order.
class SessionService {
 public:
  SessionService(std::shared_ptr<Pipeline> pipeline, ServiceOptions options = {});
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  ServiceResponse create_session(std::string_view image_bytes);
  ServiceResponse segment(const std::string& session_id, std::string_view json_body);
  ServiceResponse refine(const std::string& session_id, std::string_view json_body);
  ServiceResponse history(const std::string& session_id);
  ServiceResponse healthz() const;

  const ServiceOptions& options() const noexcept { return options_; }
  std::size_t session_count() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  ServiceResponse record(Session& session, SegmentationOutcome outcome);

  std::shared_ptr<Pipeline> pipeline_;
  ServiceOptions options_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// HTTP front end for a SessionService.
class HttpServer {
 public:
  explicit HttpServer(SessionService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws
  // Error(configuration) if binding fails.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace thinkfirst
