// SPDX-License-Identifier: Apache-2.0
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thinkfirst/digest.hpp"
#include "thinkfirst/error.hpp"
#include "thinkfirst/segmenter_backend.hpp"

namespace thinkfirst {

namespace {

std::filesystem::path make_temp_dir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto dir = base / fmt::format("thinkfirst-seg-{:08x}", rd());
    std::error_code ec;
    if (std::filesystem::create_directory(dir, ec)) return dir;
  }
  throw Error(ErrorKind::backend, "cannot create a temporary directory for segmenter requests");
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

SubprocessSegmenter::SubprocessSegmenter(Options options) : options_(std::move(options)) {
  if (options_.command.empty()) throw Error(ErrorKind::configuration, "segmenter command is empty");
  if (options_.work_dir.empty()) {
    options_.work_dir = make_temp_dir();
    owns_work_dir_ = true;
  } else {
    std::filesystem::create_directories(options_.work_dir);
  }
}

SubprocessSegmenter::~SubprocessSegmenter() {
  shutdown();
  if (owns_work_dir_) {
    std::error_code ec;
    std::filesystem::remove_all(options_.work_dir, ec);
  }
}

BackendDescriptor SubprocessSegmenter::descriptor() const {
  std::string cmd;
  for (const auto& arg : options_.command) {
    if (!cmd.empty()) cmd += ' ';
    cmd += arg;
  }
  return {options_.name, BackendKind::segmenter, false, {{"command", cmd}}};
}

bool SubprocessSegmenter::probe() const {
  if (pid_ > 0) return true;
  const std::string& exe = options_.command.front();
  if (exe.find('/') != std::string::npos) return ::access(exe.c_str(), X_OK) == 0;
  return true;  // resolved through PATH at launch
}

void SubprocessSegmenter::ensure_running() {
  if (pid_ > 0) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == 0) return;
    spdlog::warn("segmenter process {} exited; restarting", pid_);
    pid_ = -1;
    shutdown();
  }

  static const bool sigpipe_ignored = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::backend, "pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorKind::backend, "pipe() failed");
  }

  std::vector<char*> argv;
  for (auto& arg : options_.command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw Error(ErrorKind::backend, "fork() failed");
  }
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  read_buffer_.clear();
}

void SubprocessSegmenter::shutdown() noexcept {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the child to exit; give it a moment before SIGKILL.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string SubprocessSegmenter::read_line() {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::seconds(options_.response_timeout_seconds);
  for (;;) {
    if (const auto nl = read_buffer_.find('\n'); nl != std::string::npos) {
      std::string line = read_buffer_.substr(0, nl);
      read_buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) throw Error(ErrorKind::backend, "segmenter response timed out");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    char buf[4096];
    const ssize_t n = ::read(from_child_, buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorKind::backend, "segmenter process closed its output");
    read_buffer_.append(buf, static_cast<std::size_t>(n));
  }
}

BinaryMask SubprocessSegmenter::do_segment(const ImageRef& image, std::string_view prompt) {
  std::lock_guard lock(mu_);
  ensure_running();

  const auto image_path =
      options_.work_dir / fmt::format("request-{}{}", requests_, file_extension(image.format()));
  const std::string image_str = image_path.string();
  if (image_str.find_first_of(" \t\n") != std::string::npos) {
    throw Error(ErrorKind::configuration, "segmenter work directory must not contain whitespace");
  }
  write_file_bytes(image_path, image.bytes());
  ++requests_;

  const std::string request = "SEGMENT " + image_str + " " + base64_encode(prompt) + "\n";
  std::string line;
  try {
    if (!write_all(to_child_, request)) {
      throw Error(ErrorKind::backend, "segmenter process is not accepting requests");
    }
    line = read_line();
  } catch (const Error&) {
    std::error_code ec;
    std::filesystem::remove(image_path, ec);
    shutdown();
    throw;
  }
  std::error_code ec;
  std::filesystem::remove(image_path, ec);

  if (line.starts_with("MASK ")) {
    const std::filesystem::path mask_path = line.substr(5);
    try {
      return read_mask(mask_path);
    } catch (const Error& e) {
      throw Error(ErrorKind::backend, "segmenter mask unreadable: " + e.message());
    }
  }
  if (line.starts_with("ERROR")) {
    const std::string message = line.size() > 6 ? line.substr(6) : "unspecified error";
    throw Error(ErrorKind::backend, "segmenter reported: " + message);
  }
  shutdown();
  throw Error(ErrorKind::backend, "segmenter protocol violation: '" + line + "'");
}

}  // namespace thinkfirst
