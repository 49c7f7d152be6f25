// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "thinkfirst/error.hpp"
#include "thinkfirst/eval_harness.hpp"

namespace thinkfirst {

namespace {

using Json = nlohmann::ordered_json;

std::string label_of(const RunDescriptor& c) {
  std::string label = c.mode.empty() ? "run" : c.mode;
  if (!c.query_kind.empty()) label += "/" + c.query_kind;
  return label;
}

}  // namespace

std::string format_percent(double value) { return fmt::format("{:.1f}", value * 100.0); }

std::string render_table(std::span<const MetricsReport> reports) {
  std::size_t w_cfg = std::string_view("configuration").size();
  std::size_t w_data = std::string_view("dataset").size();
  for (const auto& r : reports) {
    w_cfg = std::max(w_cfg, label_of(r.config).size());
    w_data = std::max(w_data, r.config.dataset.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:>7}  {:>6}  {:>6}\n", "configuration", w_cfg, "dataset", w_data,
                                "samples", "gIoU", "cIoU");
  for (const auto& r : reports) {
    out += fmt::format("{:<{}}  {:<{}}  {:>7}  {:>6}  {:>6}\n", label_of(r.config), w_cfg, r.config.dataset, w_data,
                       r.per_sample.size(), format_percent(r.giou), format_percent(r.ciou));
  }
  return out;
}

std::string render_report(const MetricsReport& report, ReportStyle style) {
  if (style == ReportStyle::table) return render_table(std::span(&report, 1));

  Json samples = Json::array();
  for (const auto& s : report.per_sample) {
    Json j = {{"id", s.id}, {"iou", s.iou}, {"intersection", s.intersection}, {"union", s.union_}};
    j["error"] = s.error ? Json(*s.error) : Json(nullptr);
    samples.push_back(std::move(j));
  }
  const Json doc = {
      {"giou", report.giou},
      {"ciou", report.ciou},
      {"config",
       {{"mode", report.config.mode},
        {"query_kind", report.config.query_kind},
        {"mllm", report.config.mllm},
        {"segmenter", report.config.segmenter},
        {"dataset", report.config.dataset}}},
      {"per_sample", std::move(samples)},
  };
  return doc.dump(2) + "\n";
}

MetricsReport parse_report_json(std::string_view text) {
  try {
    const Json doc = Json::parse(text);
    MetricsReport r;
    r.giou = doc.at("giou").get<double>();
    r.ciou = doc.at("ciou").get<double>();
    const Json& c = doc.at("config");
    r.config = {c.at("mode").get<std::string>(), c.at("query_kind").get<std::string>(),
                c.at("mllm").get<std::string>(), c.at("segmenter").get<std::string>(),
                c.at("dataset").get<std::string>()};
    for (const auto& j : doc.at("per_sample")) {
      SampleScore s;
      s.id = j.at("id").get<std::string>();
      s.iou = j.at("iou").get<double>();
      s.intersection = j.at("intersection").get<std::uint64_t>();
      s.union_ = j.at("union").get<std::uint64_t>();
      if (!j.at("error").is_null()) s.error = j.at("error").get<std::string>();
      r.per_sample.push_back(std::move(s));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::load, std::string("malformed report json: ") + e.what());
  }
}

}  // namespace thinkfirst
