// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace thinkfirst {

struct QaPair {
  std::string question;
  std::string answer;
  int index = 0;  // 1-based

  friend bool operator==(const QaPair&, const QaPair&) = default;
};

// A parsed chain of thoughts: ordered Q/A pairs, the model's summary and,
// for control and Waldo prompts, the pseudo-prompt the model wrote.
struct CotResult {
  std::vector<QaPair> pairs;
  std::string summary;
  std::optional<std::string> pseudo_prompt;
  std::string raw_transcript;

  // pairs/summary/pseudo_prompt only; the raw text is not compared.
  bool same_content(const CotResult& other) const {
    return pairs == other.pairs && summary == other.summary && pseudo_prompt == other.pseudo_prompt;
  }
};

// Parses a transcript. Items are introduced by a line that starts with
// "- ", a bold label ("**Q1:**", "**A1:**", "**Summary:**", "**Prompt:**")
// or a plain label ("Q1:", "Summary:"). A dashed line that is not a label
// is a question/answer pair split at its first top-level ": ". Non-blank
// lines following an item are folded into it; a blank line closes the item
// and any unlabelled text after that is ignored. The first Summary item
// ends pair collection; a Prompt item after it becomes the pseudo-prompt.
//
// Throws Error(transcript_format) when there is no summary, no pairs, a
// Prompt before the Summary, or an unpaired question/answer label.
CotResult parse_transcript(std::string_view text);

// Canonical dashed rendering: "- <q>: <a>" per pair, "- Summary: <s>" and
// an optional "- Prompt: <p>", joined by newlines.
std::string render_transcript(const CotResult& result);

}  // namespace thinkfirst
