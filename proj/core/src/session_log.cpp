// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/session_log.hpp"

#include <string_view>

#include "json_codec.hpp"
#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

namespace detail {

Json cot_to_json(const CotResult& cot) {
  Json pairs = Json::array();
  for (const auto& p : cot.pairs) {
    pairs.push_back({{"index", p.index}, {"question", p.question}, {"answer", p.answer}});
  }
  Json j = {{"pairs", std::move(pairs)}, {"summary", cot.summary}};
  j["pseudo_prompt"] = cot.pseudo_prompt ? Json(*cot.pseudo_prompt) : Json(nullptr);
  return j;
}

Json rle_to_json(const BinaryMask& mask) {
  Json runs = Json::array();
  for (const auto& r : rle_encode(mask)) runs.push_back(Json::array({r.value ? 1 : 0, r.length}));
  return {{"width", mask.width()}, {"height", mask.height()}, {"runs", std::move(runs)}};
}

Json outcome_to_json(const SegmentationOutcome& o, bool include_timings) {
  Json j;
  j["id"] = o.id;
  j["parent_id"] = o.parent_id ? Json(*o.parent_id) : Json(nullptr);
  j["flow"] = std::string(to_string(o.flow));
  j["mode"] = std::string(to_string(o.mode));
  j["user_query"] = o.user_query;
  j["composed_prompt"] = o.composed_prompt;
  j["annotation"] = o.annotation ? Json(o.annotation->to_literal()) : Json(nullptr);
  j["request_hash"] = o.request_hash.empty() ? Json(nullptr) : Json(o.request_hash);
  j["mllm_calls"] = o.mllm_calls;
  j["cot_degraded"] = o.cot_degraded;
  j["cot"] = o.cot ? cot_to_json(*o.cot) : Json(nullptr);
  j["mask"] = {{"file", "mask.png"},
               {"width", o.mask.width()},
               {"height", o.mask.height()},
               {"foreground", o.mask.count()},
               {"sha256", sha256_hex(o.mask.cells())}};
  if (include_timings) {
    Json t = Json::object();
    for (const auto& s : o.timings) t[s.stage] = s.seconds;
    j["timings"] = std::move(t);
  }
  return j;
}

}  // namespace detail

std::string outcome_json(const SegmentationOutcome& outcome, bool include_timings) {
  return detail::outcome_to_json(outcome, include_timings).dump(2) + "\n";
}

void write_session_log(const std::filesystem::path& dir, const SegmentationOutcome& outcome, bool include_timings) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::load, "cannot create session log directory " + dir.string() + ": " + ec.message());
  const std::string doc = outcome_json(outcome, include_timings);
  write_file_bytes(dir / "outcome.json",
                   {reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size()});
  if (outcome.cot) {
    const std::string& raw = outcome.cot->raw_transcript;
    write_file_bytes(dir / "transcript.txt",
                     {reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()});
  }
  write_mask(dir / "mask.png", outcome.mask);
}

}  // namespace thinkfirst
