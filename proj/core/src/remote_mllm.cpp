// SPDX-License-Identifier: Apache-2.0
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"
#include "thinkfirst/mllm_backend.hpp"

namespace thinkfirst {

using nlohmann::json;

RemoteMllmConfig RemoteMllmConfig::from_env() {
  RemoteMllmConfig config;
  const char* key = std::getenv("THINKFIRST_MLLM_KEY");
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorKind::configuration, "THINKFIRST_MLLM_KEY is not set");
  }
  config.api_key = key;
  return config;
}

RemoteMllm::RemoteMllm(RemoteMllmConfig config) : config_(std::move(config)) {}

BackendDescriptor RemoteMllm::descriptor() const {
  return {"remote:" + config_.model,
          BackendKind::mllm,
          true,
          {{"base_url", config_.base_url}, {"model", config_.model}}};
}

std::string RemoteMllm::build_body(const MllmRequest& request) const {
  json content = json::array();
  for (const auto& part : request.parts) {
    if (const auto* text = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", text->text}});
    } else {
      const auto& image = std::get<ImagePart>(part).image;
      const std::string mime = image.format() == ImageFormat::png ? "image/png" : "image/jpeg";
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + mime + ";base64," + base64_encode(image.bytes())}}}});
    }
  }
  json messages = json::array();
  if (!request.system_context.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_context}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  json body = {{"model", config_.model},
               {"temperature", request.temperature},
               {"max_tokens", request.max_output_tokens},
               {"messages", std::move(messages)}};
  return body.dump();
}

std::string RemoteMllm::extract_text(const std::string& response_body) {
  json parsed = json::parse(response_body, nullptr, false);
  if (parsed.is_discarded()) throw Error(ErrorKind::backend, "provider returned non-JSON body");
  try {
    const json& message = parsed.at("choices").at(0).at("message");
    const json& content = message.at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some providers return content as a list of typed parts.
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::backend, std::string("unexpected provider response shape: ") + e.what());
  }
}

std::string RemoteMllm::do_complete(const MllmRequest& request) {
  if (config_.api_key.empty()) throw Error(ErrorKind::backend, "no API key configured (THINKFIRST_MLLM_KEY)");
  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  client.set_bearer_token_auth(config_.api_key);

  auto res = client.Post(config_.path, build_body(request), "application/json");
  if (!res) {
    throw Error(ErrorKind::backend, "transport failure contacting " + config_.base_url + ": " +
                                        httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    std::string detail = res->body;
    json parsed = json::parse(res->body, nullptr, false);
    if (!parsed.is_discarded() && parsed.contains("error")) {
      const json& err = parsed["error"];
      detail = err.is_object() ? err.value("message", res->body) : err.dump();
    }
    throw Error(ErrorKind::backend, "provider returned HTTP " + std::to_string(res->status) + ": " + detail);
  }
  return extract_text(res->body);
}

}  // namespace thinkfirst
