// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/service_api.hpp"

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <mutex>
#include <random>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "json_codec.hpp"
#include "text_util.hpp"
#include "thinkfirst/error.hpp"
#include "thinkfirst/session_log.hpp"

namespace thinkfirst {

namespace {

using detail::Json;

std::string new_uuid() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  {
    std::lock_guard lock(mu);
    hi = rng();
    lo = rng();
  }
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // RFC 4122 variant
  return fmt::format("{:08x}-{:04x}-{:04x}-{:04x}-{:012x}", hi >> 32, (hi >> 16) & 0xffff, hi & 0xffff, lo >> 48,
                     lo & 0xffffffffffffULL);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ServiceResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

ServiceResponse error_response(int status, std::string_view kind, std::string_view message, std::string_view stage = {}) {
  Json body = {{"error", kind}, {"message", message}};
  if (!stage.empty()) body["stage"] = stage;
  return json_response(status, body);
}

int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::backend:
    case ErrorKind::fixture_missing: return 502;
    case ErrorKind::invalid_argument:
    case ErrorKind::transcript_format:
    case ErrorKind::control_protocol:
    case ErrorKind::waldo_protocol: return 422;
    case ErrorKind::configuration:
    case ErrorKind::load: return 500;
  }
  return 500;
}

ServiceResponse from_error(const Error& e) {
  if (status_for(e) >= 500) spdlog::error("{}", e.what());
  return error_response(status_for(e), to_string(e.kind()), e.message(), e.stage());
}

ControlAnnotation annotation_from(const Json& body) {
  ControlAnnotation ann;
  if (body.contains("annotation")) {
    ann = ControlAnnotation::parse(body.at("annotation").get<std::string>());
  } else if (body.contains("scribble")) {
    std::vector<PointF> points;
    for (const auto& p : body.at("scribble")) points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    ann = fit_scribble(points);
  } else {
    throw_invalid_argument("refine needs an \"annotation\" literal or a \"scribble\" point list");
  }
  if (body.contains("stroke_width")) ann.stroke_width = body.at("stroke_width").get<int>();
  if (body.contains("color")) {
    const auto c = body.at("color").get<std::vector<int>>();
    if (c.size() != 3) throw_invalid_argument("color needs [r, g, b]");
    ann.color = Rgb{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
  }
  return ann;
}

}  // namespace

struct SessionService::Session {
  std::string id;
  ImageRef image;
  std::string created_at;
  std::string updated_at;
  std::vector<SegmentationOutcome> history;

  // ticket lock: operations run one at a time in arrival order
  std::mutex mu;
  std::condition_variable cv;
  std::uint64_t next_ticket = 0;
  std::uint64_t serving = 0;

  explicit Session(ImageRef img) : image(std::move(img)) {}
};

namespace {

class Turn {
 public:
  template <class S>
  explicit Turn(S& s) : mu_(s.mu), cv_(s.cv), serving_(s.serving) {
    std::unique_lock lock(mu_);
    const std::uint64_t mine = s.next_ticket++;
    cv_.wait(lock, [&] { return serving_ == mine; });
  }
  ~Turn() {
    {
      std::lock_guard lock(mu_);
      ++serving_;
    }
    cv_.notify_all();
  }
  Turn(const Turn&) = delete;
  Turn& operator=(const Turn&) = delete;

 private:
  std::mutex& mu_;
  std::condition_variable& cv_;
  std::uint64_t& serving_;
};

}  // namespace

SessionService::SessionService(std::shared_ptr<Pipeline> pipeline, ServiceOptions options)
    : pipeline_(std::move(pipeline)), options_(std::move(options)) {
  if (!pipeline_) throw Error(ErrorKind::configuration, "service needs a pipeline");
}

SessionService::~SessionService() = default;

std::size_t SessionService::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

ServiceResponse SessionService::create_session(std::string_view image_bytes) {
  if (image_bytes.size() > options_.max_upload_bytes) {
    return error_response(413, "too-large",
                          fmt::format("image is {} bytes; limit is {}", image_bytes.size(), options_.max_upload_bytes));
  }
  std::optional<ImageRef> image;
  try {
    image = ImageRef::from_bytes(std::vector<std::uint8_t>(image_bytes.begin(), image_bytes.end()));
  } catch (const Error& e) {
    return error_response(400, "undecodable-image", e.message());
  }
  auto session = std::make_shared<Session>(*image);
  session->id = new_uuid();
  session->created_at = session->updated_at = utc_now();
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[session->id] = session;
  }
  return json_response(201, {{"session_id", session->id}, {"width", image->width()}, {"height", image->height()}});
}

ServiceResponse SessionService::record(Session& session, SegmentationOutcome outcome) {
  const std::size_t index = session.history.size() + 1;
  if (options_.session_log_dir) {
    try {
      write_session_log(*options_.session_log_dir / session.id / fmt::format("{}-{}", index, outcome.id), outcome);
    } catch (const Error& e) {
      spdlog::warn("session log export failed: {}", e.message());
    }
  }
  Json body;
  body["session_id"] = session.id;
  body["index"] = index;
  body["outcome_id"] = outcome.id;
  body["parent_id"] = outcome.parent_id ? Json(*outcome.parent_id) : Json(nullptr);
  body["flow"] = std::string(to_string(outcome.flow));
  body["mode"] = std::string(to_string(outcome.mode));
  body["composed_prompt"] = outcome.composed_prompt;
  body["mask"] = detail::rle_to_json(outcome.mask);
  if (outcome.cot) body["cot"] = detail::cot_to_json(*outcome.cot);
  session.history.push_back(std::move(outcome));
  session.updated_at = utc_now();
  return json_response(200, body);
}

ServiceResponse SessionService::segment(const std::string& session_id, std::string_view json_body) {
  const auto session = find(session_id);
  if (!session) return error_response(404, "not-found", "unknown session " + session_id);
  std::string query;
  TaskMode task = TaskMode::standard();
  PipelineMode mode = PipelineMode::full;
  try {
    const Json body = Json::parse(json_body);
    query = body.at("query").get<std::string>();
    if (body.contains("task_mode")) task = TaskMode::parse(body.at("task_mode").get<std::string>());
    if (body.contains("pipeline_mode")) mode = parse_pipeline_mode(body.at("pipeline_mode").get<std::string>());
  } catch (const Json::exception& e) {
    return error_response(400, "bad-request", e.what());
  } catch (const Error& e) {
    return error_response(400, "bad-request", e.message());
  }
  if (detail::trim(query).empty()) return error_response(400, "bad-request", "query is empty");

  Turn turn(*session);
  try {
    return record(*session, pipeline_->segment(session->image, query, task, mode));
  } catch (const Error& e) {
    return from_error(e);
  }
}

ServiceResponse SessionService::refine(const std::string& session_id, std::string_view json_body) {
  const auto session = find(session_id);
  if (!session) return error_response(404, "not-found", "unknown session " + session_id);
  Json body;
  try {
    body = Json::parse(json_body);
  } catch (const Json::exception& e) {
    return error_response(400, "bad-request", e.what());
  }

  Turn turn(*session);
  try {
    ControlAnnotation ann;
    try {
      ann = annotation_from(body);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::invalid_argument, e.what(), "annotate");
    } catch (const Error& e) {
      throw e.with_stage("annotate");
    }
    if (session->history.empty()) return record(*session, pipeline_->segment_with_control(session->image, ann));
    return record(*session, pipeline_->refine(session->history.back(), session->image, ann));
  } catch (const Error& e) {
    return from_error(e);
  }
}

ServiceResponse SessionService::history(const std::string& session_id) {
  const auto session = find(session_id);
  if (!session) return error_response(404, "not-found", "unknown session " + session_id);
  Turn turn(*session);
  Json items = Json::array();
  std::size_t index = 0;
  for (const auto& o : session->history) {
    items.push_back({{"index", ++index},
                     {"outcome_id", o.id},
                     {"parent_id", o.parent_id ? Json(*o.parent_id) : Json(nullptr)},
                     {"flow", std::string(to_string(o.flow))},
                     {"mode", std::string(to_string(o.mode))},
                     {"prompt_preview", detail::preview(o.composed_prompt, 80)},
                     {"foreground", o.mask.count()}});
  }
  return json_response(200, {{"session_id", session->id},
                             {"created_at", session->created_at},
                             {"updated_at", session->updated_at},
                             {"history", std::move(items)}});
}

ServiceResponse SessionService::healthz() const {
  Json backends = Json::array();
  bool ok = true;
  const auto describe = [&](const BackendDescriptor& d, bool reachable) {
    ok = ok && reachable;
    backends.push_back({{"name", d.name},
                        {"kind", d.kind == BackendKind::mllm ? "mllm" : "segmenter"},
                        {"concurrency_safe", d.concurrency_safe},
                        {"reachable", reachable}});
  };
  const Backends& b = pipeline_->backends();
  if (b.mllm) describe(b.mllm->descriptor(), b.mllm->probe());
  describe(b.segmenter->descriptor(), b.segmenter->probe());
  return json_response(200, {{"status", ok ? "ok" : "degraded"}, {"backends", std::move(backends)}});
}

struct HttpServer::Impl {
  SessionService& service;
  httplib::Server server;

  explicit Impl(SessionService& s) : service(s) {}
};

namespace {

void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  auto& svc = impl_->service;
  // multipart framing adds a little on top of the image itself
  srv.set_payload_max_length(svc.options().max_upload_bytes + 64 * 1024);

  srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("image")) {
      reply(res, {400, Json{{"error", "bad-request"}, {"message", "multipart field 'image' is required"}}.dump()});
      return;
    }
    reply(res, svc.create_session(req.get_file_value("image").content));
  });
  srv.Post(R"(/sessions/([^/]+)/segment)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.segment(req.matches[1], req.body));
  });
  srv.Post(R"(/sessions/([^/]+)/refine)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.refine(req.matches[1], req.body));
  });
  srv.Get(R"(/sessions/([^/]+)/history)", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.history(req.matches[1]));
  });
  srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.healthz()); });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string kind = res.status == 413 ? "too-large" : res.status == 404 ? "not-found" : "http-error";
    res.set_content(Json{{"error", kind}, {"message", httplib::status_message(res.status)}}.dump(),
                    "application/json");
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    spdlog::error("unhandled: {}", message);
    res.status = 500;
    res.set_content(Json{{"error", "internal"}, {"message", message}}.dump(), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw Error(ErrorKind::configuration, fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace thinkfirst
