// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/transcript.hpp"

#include <cctype>
#include <charconv>

#include "text_util.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

namespace {

enum class ItemKind { pair, question, answer, summary, prompt };

struct Item {
  ItemKind kind = ItemKind::pair;
  int label_index = 0;
  std::string body;
  int line = 0;
};

struct Label {
  ItemKind kind;
  int index = 0;
};

[[noreturn]] void format_error(std::string message) {
  throw Error(ErrorKind::transcript_format, std::move(message));
}

std::optional<int> parse_index(std::string_view digits) {
  digits = detail::trim(digits);
  if (digits.empty() || digits.size() > 6) return std::nullopt;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value < 1) return std::nullopt;
  return value;
}

// Recognizes "Summary", "Prompt", "Q<k>", "A<k>", "Question <k>", "Answer <k>".
std::optional<Label> match_label(std::string_view candidate) {
  const std::string lowered = detail::lower_ascii(detail::trim(candidate));
  const std::string_view s = lowered;
  if (s == "summary") return Label{ItemKind::summary};
  if (s == "prompt") return Label{ItemKind::prompt};
  for (const auto& [prefix, kind] : {std::pair{std::string_view("question"), ItemKind::question},
                                     std::pair{std::string_view("answer"), ItemKind::answer},
                                     std::pair{std::string_view("q"), ItemKind::question},
                                     std::pair{std::string_view("a"), ItemKind::answer}}) {
    if (s.starts_with(prefix)) {
      if (auto k = parse_index(s.substr(prefix.size()))) return Label{kind, *k};
    }
  }
  return std::nullopt;
}

struct Classified {
  ItemKind kind;
  int index = 0;
  std::string_view body;
};

// Returns the item a line opens, if any.
std::optional<Classified> classify(std::string_view line) {
  std::string_view s = line;
  while (!s.empty() && detail::is_space(s.front())) s.remove_prefix(1);
  bool dashed = false;
  if (s.starts_with("- ")) {
    dashed = true;
    s.remove_prefix(2);
    while (!s.empty() && detail::is_space(s.front())) s.remove_prefix(1);
  }

  if (s.starts_with("**")) {
    const auto close = s.find("**", 2);
    if (close != std::string_view::npos) {
      std::string_view inner = s.substr(2, close - 2);
      std::string_view rest = s.substr(close + 2);
      bool has_colon = false;
      if (!inner.empty() && inner.back() == ':') {
        inner.remove_suffix(1);
        has_colon = true;
      } else if (rest.starts_with(":")) {
        rest.remove_prefix(1);
        has_colon = true;
      }
      if (has_colon) {
        if (auto label = match_label(inner)) return Classified{label->kind, label->index, rest};
      }
    }
  }

  if (const auto colon = s.find(':'); colon != std::string_view::npos && colon <= 16) {
    if (auto label = match_label(s.substr(0, colon))) {
      return Classified{label->kind, label->index, s.substr(colon + 1)};
    }
  }

  if (dashed) return Classified{ItemKind::pair, 0, s};
  return std::nullopt;
}

// Position of the first ": " outside brackets and double quotes, falling
// back to the first ": " anywhere when the brackets never balance.
std::size_t split_point(std::string_view text) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if (c == '"') {
      quoted = !quoted;
    } else if (!quoted) {
      if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if ((c == ')' || c == ']' || c == '}') && depth > 0) {
        --depth;
      } else if (c == ':' && text[i + 1] == ' ' && depth == 0) {
        return i;
      }
    }
  }
  return text.find(": ");
}

std::vector<Item> collect_items(std::string_view text) {
  std::vector<Item> items;
  bool open = false;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      open = false;
      continue;
    }
    if (auto c = classify(line)) {
      items.push_back(Item{c->kind, c->index, std::string(detail::trim(c->body)), line_no});
      open = true;
      continue;
    }
    if (open) {
      std::string& body = items.back().body;
      if (!body.empty()) body.push_back(' ');
      body.append(detail::trim(line));
    }
  }
  return items;
}

std::string label_for(const Item& item) {
  return "line " + std::to_string(item.line);
}

}  // namespace

CotResult parse_transcript(std::string_view text) {
  CotResult result;
  result.raw_transcript = std::string(text);

  std::optional<Item> pending_question;
  bool have_summary = false;

  for (Item& item : collect_items(text)) {
    if (have_summary) {
      if (item.kind == ItemKind::prompt && !result.pseudo_prompt) {
        if (item.body.empty()) format_error(label_for(item) + ": empty Prompt item");
        result.pseudo_prompt = std::move(item.body);
      }
      continue;
    }
    switch (item.kind) {
      case ItemKind::pair: {
        if (pending_question) {
          format_error(label_for(*pending_question) + ": question has no answer");
        }
        const auto at = split_point(item.body);
        if (at == std::string::npos) continue;  // a bullet that is not a Q/A pair
        std::string question(detail::trim(std::string_view(item.body).substr(0, at)));
        std::string answer(detail::trim(std::string_view(item.body).substr(at + 2)));
        if (question.empty() || answer.empty()) {
          format_error(label_for(item) + ": empty question or answer");
        }
        result.pairs.push_back({std::move(question), std::move(answer), 0});
        break;
      }
      case ItemKind::question:
        if (pending_question) {
          format_error(label_for(*pending_question) + ": question has no answer");
        }
        if (item.body.empty()) format_error(label_for(item) + ": empty question");
        pending_question = std::move(item);
        break;
      case ItemKind::answer:
        if (!pending_question) format_error(label_for(item) + ": answer without a preceding question");
        if (pending_question->label_index != item.label_index) {
          format_error(label_for(item) + ": answer A" + std::to_string(item.label_index) +
                       " does not match question Q" + std::to_string(pending_question->label_index));
        }
        if (item.body.empty()) format_error(label_for(item) + ": empty answer");
        result.pairs.push_back({std::move(pending_question->body), std::move(item.body), 0});
        pending_question.reset();
        break;
      case ItemKind::summary:
        if (pending_question) {
          format_error(label_for(*pending_question) + ": question has no answer");
        }
        if (item.body.empty()) format_error(label_for(item) + ": empty Summary item");
        result.summary = std::move(item.body);
        have_summary = true;
        break;
      case ItemKind::prompt:
        format_error(label_for(item) + ": Prompt item appears before the Summary");
    }
  }

  if (!have_summary) format_error("transcript has no Summary item");
  if (result.pairs.empty()) format_error("transcript has no question/answer pairs");
  for (std::size_t i = 0; i < result.pairs.size(); ++i) result.pairs[i].index = static_cast<int>(i) + 1;
  return result;
}

namespace {

bool dashed_pair_survives(const std::string& question, const std::string& answer) {
  const std::string line = "- " + question + ": " + answer;
  const auto c = classify(line);
  if (!c || c->kind != ItemKind::pair) return false;
  const std::string_view body = detail::trim(c->body);
  const auto at = split_point(body);
  if (at == std::string::npos) return false;
  return detail::trim(body.substr(0, at)) == question && detail::trim(body.substr(at + 2)) == answer;
}

}  // namespace

std::string render_transcript(const CotResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.pairs.size(); ++i) {
    const QaPair& p = result.pairs[i];
    if (dashed_pair_survives(p.question, p.answer)) {
      out += "- " + p.question + ": " + p.answer + "\n";
    } else {
      const std::string k = std::to_string(i + 1);
      out += "- Q" + k + ": " + p.question + "\n";
      out += "- A" + k + ": " + p.answer + "\n";
    }
  }
  out += "- Summary: " + result.summary;
  if (result.pseudo_prompt) out += "\n- Prompt: " + *result.pseudo_prompt;
  return out;
}

}  // namespace thinkfirst
