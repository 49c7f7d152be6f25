// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/prompt_engine.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "text_util.hpp"
#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

namespace {

constexpr std::array<std::string_view, 8> kRequiredTemplates = {
    "system_context.txt", "env_standard.txt",        "env_waldo.txt",    "task_standard.txt",
    "task_camouflage.txt", "task_explicit_object.txt", "task_control.txt", "task_waldo.txt",
};

constexpr std::string_view kObjectPlaceholder = "{object}";

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::configuration, "prompt template missing: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TaskMode TaskMode::explicit_object(std::string object_class) {
  if (detail::trim(object_class).empty()) {
    throw_invalid_argument("explicit_object task mode requires a non-empty object class");
  }
  return TaskMode(TaskKind::explicit_object, std::move(object_class));
}

TaskMode TaskMode::parse(std::string_view text) {
  if (text == "standard") return standard();
  if (text == "camouflage") return camouflage();
  if (text == "control") return control();
  if (text == "waldo") return waldo();
  for (std::string_view prefix : {std::string_view("explicit_object:"), std::string_view("explicit:")}) {
    if (text.starts_with(prefix)) return explicit_object(std::string(text.substr(prefix.size())));
  }
  throw_invalid_argument("unknown task mode '" + std::string(text) +
                         "' (expected standard|camouflage|explicit_object:<class>|control|waldo)");
}

std::string TaskMode::to_string() const {
  switch (kind_) {
    case TaskKind::standard: return "standard";
    case TaskKind::camouflage: return "camouflage";
    case TaskKind::explicit_object: return "explicit_object:" + object_class_;
    case TaskKind::control: return "control";
    case TaskKind::waldo: return "waldo";
  }
  return "standard";
}

void PromptBundle::validate() const {
  if (environment_prompt.empty()) throw_invalid_argument("environment prompt is empty");
  if (task_prompt.empty()) throw_invalid_argument("task prompt is empty");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw_invalid_argument("temperature must lie in [0, 2]");
  if (max_output_tokens < 1) throw_invalid_argument("max_output_tokens must be positive");
}

std::string_view to_string(QueryKind kind) noexcept {
  return kind == QueryKind::implicit ? "implicit" : "explicit";
}

QueryKind parse_query_kind(std::string_view text) {
  if (text == "implicit") return QueryKind::implicit;
  if (text == "explicit" || text == "explicit_object") return QueryKind::explicit_object;
  throw_invalid_argument("unknown query kind '" + std::string(text) + "' (expected implicit|explicit)");
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  const auto checksum_path = dir / "checksums.txt";
  const std::string listing = read_text(checksum_path);

  std::map<std::string, std::string> expected;
  std::istringstream lines(listing);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string digest;
    std::string name;
    if (!(fields >> digest >> name) || digest.size() != 64) {
      throw Error(ErrorKind::configuration,
                  "checksums.txt line " + std::to_string(line_no) + " is malformed");
    }
    expected[name] = digest;
  }

  PromptLibrary lib;
  lib.dir_ = dir;
  for (std::string_view required : kRequiredTemplates) {
    if (!expected.contains(std::string(required))) {
      throw Error(ErrorKind::configuration,
                  "prompt template " + std::string(required) + " has no recorded checksum");
    }
  }
  for (const auto& [name, digest] : expected) {
    std::string content = read_text(dir / name);
    const std::string actual = sha256_hex(content);
    if (actual != digest) {
      throw Error(ErrorKind::configuration, "checksum mismatch for prompt template " + name +
                                                " (recorded " + digest + ", actual " + actual + ")");
    }
    lib.templates_.emplace(name, std::move(content));
  }
  const std::string& explicit_tpl = lib.text("task_explicit_object.txt");
  const auto first = explicit_tpl.find(kObjectPlaceholder);
  if (first == std::string::npos ||
      explicit_tpl.find(kObjectPlaceholder, first + 1) != std::string::npos) {
    throw Error(ErrorKind::configuration,
                "task_explicit_object.txt must contain exactly one {object} placeholder");
  }
  return lib;
}

std::filesystem::path PromptLibrary::default_dir() {
  if (const char* env = std::getenv("THINKFIRST_PROMPT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  std::error_code ec;
  if (std::filesystem::exists(std::filesystem::path(THINKFIRST_DEFAULT_PROMPT_DIR) / "checksums.txt", ec)) {
    return THINKFIRST_DEFAULT_PROMPT_DIR;
  }
  return THINKFIRST_INSTALLED_PROMPT_DIR;
}

const std::string& PromptLibrary::text(const std::string& file) const {
  const auto it = templates_.find(file);
  if (it == templates_.end()) throw Error(ErrorKind::configuration, "prompt template not loaded: " + file);
  return it->second;
}

std::string PromptLibrary::build_environment_prompt(const TaskMode& mode) const {
  return mode.kind() == TaskKind::waldo ? text("env_waldo.txt") : text("env_standard.txt");
}

std::string PromptLibrary::build_task_prompt(const TaskMode& mode) const {
  switch (mode.kind()) {
    case TaskKind::standard: return text("task_standard.txt");
    case TaskKind::camouflage: return text("task_camouflage.txt");
    case TaskKind::explicit_object: {
      if (mode.object_class().empty()) throw_invalid_argument("explicit_object requires an object class");
      std::string out = text("task_explicit_object.txt");
      out.replace(out.find(kObjectPlaceholder), kObjectPlaceholder.size(), mode.object_class());
      return out;
    }
    case TaskKind::control: return text("task_control.txt");
    case TaskKind::waldo: return text("task_waldo.txt");
  }
  throw_invalid_argument("unknown task mode");
}

PromptBundle PromptLibrary::bundle(const TaskMode& mode, SamplingParams sampling) const {
  PromptBundle b{system_context(), build_environment_prompt(mode), build_task_prompt(mode),
                 sampling.temperature, sampling.max_output_tokens};
  b.validate();
  return b;
}

std::string compose_query(std::string_view summary, std::string_view user_query) {
  if (detail::trim(summary).empty()) throw_invalid_argument("cannot compose: summary is empty");
  if (detail::trim(user_query).empty()) throw_invalid_argument("cannot compose: user query is empty");
  std::string out;
  out.reserve(summary.size() + 1 + user_query.size());
  out.append(summary);
  out.push_back(' ');
  out.append(user_query);
  return out;
}

std::string build_user_query(QueryKind kind, std::string_view object_class) {
  if (kind == QueryKind::implicit) {
    return "What is the camouflaged object in the image that can move like an animal? Please segment it.";
  }
  if (detail::trim(object_class).empty()) throw_invalid_argument("explicit query requires an object class");
  return "Please segment the " + std::string(object_class) + " in the image.";
}

}  // namespace thinkfirst
