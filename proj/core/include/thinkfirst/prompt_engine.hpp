// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace thinkfirst {

enum class TaskKind { standard, camouflage, explicit_object, control, waldo };

// Selects the task-specific prompt (and, for Waldo, the environment prompt).
class TaskMode {
 public:
  static TaskMode standard() { return TaskMode(TaskKind::standard, {}); }
  static TaskMode camouflage() { return TaskMode(TaskKind::camouflage, {}); }
  // Throws Error(invalid_argument) for an empty class.
  static TaskMode explicit_object(std::string object_class);
  static TaskMode control() { return TaskMode(TaskKind::control, {}); }
  static TaskMode waldo() { return TaskMode(TaskKind::waldo, {}); }

  // Accepts "standard", "camouflage", "control", "waldo" and
  // "explicit_object:<class>" (also "explicit:<class>").
  static TaskMode parse(std::string_view text);

  TaskKind kind() const noexcept { return kind_; }
  const std::string& object_class() const noexcept { return object_class_; }
  std::string to_string() const;

  friend bool operator==(const TaskMode&, const TaskMode&) = default;

 private:
  TaskMode(TaskKind kind, std::string object_class)
      : kind_(kind), object_class_(std::move(object_class)) {}

  TaskKind kind_;
  std::string object_class_;
};

struct SamplingParams {
  double temperature = 0.5;
  int max_output_tokens = 2000;
};

struct PromptBundle {
  std::string system_context;
  std::string environment_prompt;
  std::string task_prompt;
  double temperature = 0.5;
  int max_output_tokens = 2000;

  // Throws Error(invalid_argument) on empty prompts, temperature outside
  // [0, 2] or a non-positive token budget.
  void validate() const;
};

enum class QueryKind { implicit, explicit_object };

std::string_view to_string(QueryKind kind) noexcept;
QueryKind parse_query_kind(std::string_view text);

// The prompt templates, loaded from a directory and verified against
// `checksums.txt` (`<sha256> <filename>` per line).
//
// Layout:
//   system_context.txt, env_standard.txt, env_waldo.txt,
//   task_standard.txt, task_camouflage.txt, task_explicit_object.txt,
//   task_control.txt, task_waldo.txt, checksums.txt
//
// task_explicit_object.txt contains a single `{object}` placeholder.
class PromptLibrary {
 public:
  // Throws Error(configuration) for a missing file, a file absent from the
  // checksum list, or a checksum mismatch.
  static PromptLibrary load(const std::filesystem::path& dir);

  // $THINKFIRST_PROMPT_DIR, then the source tree, then the install prefix.
  static std::filesystem::path default_dir();
  static PromptLibrary load_default() { return load(default_dir()); }

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::string& system_context() const { return text("system_context.txt"); }

  std::string build_environment_prompt(const TaskMode& mode) const;
  std::string build_task_prompt(const TaskMode& mode) const;

  PromptBundle bundle(const TaskMode& mode, SamplingParams sampling = {}) const;

  // Raw template content keyed by file name.
  const std::map<std::string, std::string>& templates() const noexcept { return templates_; }
  const std::string& text(const std::string& file) const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> templates_;
};

// Summary, one space, user query.
std::string compose_query(std::string_view summary, std::string_view user_query);

// implicit -> the camouflage-benchmark implicit query; explicit_object ->
// "Please segment the <class> in the image."
std::string build_user_query(QueryKind kind, std::string_view object_class = {});

}  // namespace thinkfirst
