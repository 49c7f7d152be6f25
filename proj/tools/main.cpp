// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thinkfirst/config.hpp"
#include "thinkfirst/cot_orchestrator.hpp"
#include "thinkfirst/error.hpp"
#include "thinkfirst/eval_harness.hpp"
#include "thinkfirst/pipeline.hpp"
#include "thinkfirst/service_api.hpp"
#include "thinkfirst/session_log.hpp"

namespace fs = std::filesystem;
using namespace thinkfirst;

namespace {

enum Exit { ok = 0, usage = 2, pipeline_failure = 3, backend_failure = 4 };

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::invalid_argument:
    case ErrorKind::configuration:
    case ErrorKind::load: return usage;
    case ErrorKind::transcript_format:
    case ErrorKind::control_protocol:
    case ErrorKind::waldo_protocol: return pipeline_failure;
    case ErrorKind::backend:
    case ErrorKind::fixture_missing: return backend_failure;
  }
  return pipeline_failure;
}

struct GlobalFlags {
  std::string config;
  std::string mllm;
  std::string segmenter;
  std::string fixture_dir;
  std::string cache_dir;
  std::string prompt_dir;
  std::string transcript_dir;
  std::vector<std::string> lisa_command;
  bool verbose = false;
};

ToolkitConfig resolve_config(const GlobalFlags& g) {
  ToolkitConfig c = g.config.empty() ? ToolkitConfig{} : ToolkitConfig::load(g.config);
  if (!g.mllm.empty()) c.mllm = parse_mllm_choice(g.mllm);
  if (!g.segmenter.empty()) c.segmenter = parse_segmenter_choice(g.segmenter);
  if (!g.fixture_dir.empty()) c.fixture_dir = fs::absolute(g.fixture_dir);
  if (!g.cache_dir.empty()) c.cache_dir = fs::absolute(g.cache_dir);
  if (!g.prompt_dir.empty()) c.prompt_dir = fs::absolute(g.prompt_dir);
  if (!g.transcript_dir.empty()) c.transcript_dir = fs::absolute(g.transcript_dir);
  if (!g.lisa_command.empty()) c.lisa_command = g.lisa_command;
  return c;
}

Pipeline make_pipeline(const ToolkitConfig& c) { return Pipeline(build_backends(c), load_prompts(c), pipeline_options(c)); }

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

void emit(const SegmentationOutcome& o, const std::string& out, const std::string& cot_out,
          const std::string& log_dir, bool timings) {
  if (!out.empty()) write_mask(out, o.mask);
  if (!cot_out.empty()) {
    if (!o.cot) throw Error(ErrorKind::invalid_argument, "--cot-out given but this mode makes no MLLM call");
    write_text(cot_out, o.cot->raw_transcript);
  }
  if (!log_dir.empty()) write_session_log(log_dir, o, timings);
  std::cout << "outcome   " << o.id << "\n";
  std::cout << "mode      " << to_string(o.mode) << "\n";
  std::cout << "prompt    " << o.composed_prompt << "\n";
  std::cout << "mask      " << o.mask.width() << "x" << o.mask.height() << ", " << o.mask.count()
            << " foreground px\n";
  if (o.cot) {
    for (const auto& p : o.cot->pairs) std::cout << fmt::format("Q{}        {}\nA{}        {}\n", p.index, p.question, p.index, p.answer);
    std::cout << "Summary:  " << o.cot->summary << "\n";
  }
}

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void handle_stop(int) {
  if (HttpServer* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thinkfirst: describe-then-segment orchestration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "thinkfirst 0.1.0");

  GlobalFlags g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--mllm", g.mllm, "MLLM backend: remote | replay | record");
  app.add_option("--segmenter", g.segmenter, "segmenter: lisa | keyword-mock");
  app.add_option("--fixture-dir", g.fixture_dir, "replay/record fixture directory");
  app.add_option("--cache-dir", g.cache_dir, "MLLM response cache directory");
  app.add_option("--prompt-dir", g.prompt_dir, "prompt template directory");
  app.add_option("--transcript-dir", g.transcript_dir, "raw transcript log directory");
  app.add_option("--lisa-cmd", g.lisa_command, "segmenter process command line")->expected(1, -1);
  app.add_flag("-v,--verbose", g.verbose, "debug logging");

  bool with_timings = false;
  app.add_flag("--timings", with_timings, "include stage timings in session logs");

  std::string image, query, task_mode = "standard", mode = "full", out, cot_out, log_dir, annotation;

  auto* seg = app.add_subcommand("segment", "segment an image from a text query");
  seg->add_option("--image", image, "input image")->required()->check(CLI::ExistingFile);
  seg->add_option("--query", query, "user query")->required();
  seg->add_option("--task-mode", task_mode, "standard | camouflage | explicit_object:<class> | control | waldo");
  seg->add_option("--mode", mode, "full | baseline | describe");
  seg->add_option("--out", out, "mask PNG");
  seg->add_option("--cot-out", cot_out, "raw transcript file");
  seg->add_option("--log-dir", log_dir, "session log directory");

  auto* ref = app.add_subcommand("refine", "segment the part marked by a control annotation");
  ref->add_option("--image", image, "input image")->required()->check(CLI::ExistingFile);
  ref->add_option("--annotation", annotation, "circle:cx,cy,rx,ry | star:cx,cy,r | box:x0,y0,x1,y1")->required();
  ref->add_option("--out", out, "mask PNG");
  ref->add_option("--cot-out", cot_out, "raw transcript file");
  ref->add_option("--log-dir", log_dir, "session log directory");
  std::string annotated_out;
  ref->add_option("--annotated-out", annotated_out, "write the annotated image");

  auto* waldo = app.add_subcommand("waldo", "find Waldo");
  waldo->add_option("--image", image, "input image")->required()->check(CLI::ExistingFile);
  waldo->add_option("--out", out, "mask PNG");
  waldo->add_option("--cot-out", cot_out, "raw transcript file");
  waldo->add_option("--log-dir", log_dir, "session log directory");

  std::string manifest, query_kind = "implicit", report_path, split, eval_task_mode;
  int parallelism = 1;
  auto* ev = app.add_subcommand("eval", "score a manifest with gIoU / cIoU");
  ev->add_option("--manifest", manifest, "dataset manifest")->required()->check(CLI::ExistingFile);
  ev->add_option("--query-kind", query_kind, "implicit | explicit");
  ev->add_option("--mode", mode, "full | baseline | describe");
  ev->add_option("--report", report_path, "write the JSON report here");
  ev->add_option("--parallelism", parallelism, "concurrent samples")->check(CLI::PositiveNumber);
  ev->add_option("--split", split, "only train or test rows");
  ev->add_option("--task-mode", eval_task_mode, "override the task prompt");

  auto* ab = app.add_subcommand("ablate", "run full, describe and baseline side by side");
  ab->add_option("--image", image, "input image")->required()->check(CLI::ExistingFile);
  ab->add_option("--query", query, "user query")->required();
  ab->add_option("--task-mode", task_mode, "task mode for the full configuration");
  std::string gt_path;
  ab->add_option("--gt", gt_path, "ground-truth mask for IoU")->check(CLI::ExistingFile);

  std::string host;
  int port = -1;
  std::string session_log_dir;
  auto* serve = app.add_subcommand("serve", "run the HTTP session service");
  serve->add_option("--port", port, "listen port (0 = any)");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--session-log-dir", session_log_dir, "export every outcome here");

  std::string flow = "segment";
  auto* key = app.add_subcommand("fixture-key", "print the request hash a replay fixture must be named after");
  key->add_option("--image", image, "input image")->required()->check(CLI::ExistingFile);
  key->add_option("--flow", flow, "segment | describe | control | waldo");
  key->add_option("--task-mode", task_mode, "task mode for the segment flow");
  key->add_option("--annotation", annotation, "annotation for the control flow");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "thinkfirst: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (const CLI::App* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return usage;
  }
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    const ToolkitConfig config = resolve_config(g);

    if (*seg) {
      Pipeline p = make_pipeline(config);
      emit(p.segment(ImageRef::from_file(image), query, TaskMode::parse(task_mode), parse_pipeline_mode(mode)), out,
           cot_out, log_dir, with_timings);
    } else if (*ref) {
      const ImageRef img = ImageRef::from_file(image);
      const ControlAnnotation ann = ControlAnnotation::parse(annotation);
      if (!annotated_out.empty()) {
        const AnnotatedImage a = render_annotation(img, ann);
        write_file_bytes(annotated_out, a.image.bytes());
      }
      Pipeline p = make_pipeline(config);
      emit(p.segment_with_control(img, ann), out, cot_out, log_dir, with_timings);
    } else if (*waldo) {
      Pipeline p = make_pipeline(config);
      emit(p.find_waldo(ImageRef::from_file(image)), out, cot_out, log_dir, with_timings);
    } else if (*ev) {
      DatasetManifest m = load_manifest(manifest);
      if (split == "train" || split == "test") {
        m = m.filtered(split == "train" ? Split::train : Split::test);
      } else if (!split.empty()) {
        throw Error(ErrorKind::invalid_argument, "--split must be train or test");
      }
      EvalOptions opts;
      opts.query_kind = parse_query_kind(query_kind);
      opts.mode = parse_pipeline_mode(mode);
      opts.parallelism = parallelism;
      if (!eval_task_mode.empty()) opts.task_mode = TaskMode::parse(eval_task_mode);
      Pipeline p = make_pipeline(config);
      const MetricsReport r = run_eval(m, p, opts);
      std::cout << render_report(r, ReportStyle::table);
      std::size_t failed = 0;
      for (const auto& s : r.per_sample) {
        if (s.error) {
          ++failed;
          std::cerr << "sample " << s.id << " failed: " << *s.error << "\n";
        }
      }
      if (failed) std::cerr << failed << " of " << r.per_sample.size() << " samples failed and scored 0\n";
      std::cout << "giou " << format_percent(r.giou) << "\nciou " << format_percent(r.ciou) << "\n";
      if (!report_path.empty()) write_text(report_path, render_report(r, ReportStyle::json));
    } else if (*ab) {
      Pipeline p = make_pipeline(config);
      const ImageRef img = ImageRef::from_file(image);
      std::optional<BinaryMask> gt;
      if (!gt_path.empty()) gt = read_mask(gt_path);
      struct Row {
        std::string label;
        PipelineMode mode;
      };
      const Row rows[] = {{"ThinkFirst (full)", PipelineMode::full},
                          {"w/ MLLM, w/o CoT", PipelineMode::describe_no_cot},
                          {"w/o MLLM (baseline)", PipelineMode::baseline_no_mllm}};
      std::cout << fmt::format("{:<22} {:>5} {:>10} {:>7}  {}\n", "configuration", "calls", "foreground", "IoU",
                               "segmenter prompt");
      for (const auto& row : rows) {
        try {
          const SegmentationOutcome o = p.segment(img, query, TaskMode::parse(task_mode), row.mode);
          const std::string score = gt ? format_percent(thinkfirst::iou(o.mask, *gt)) : "-";
          std::cout << fmt::format("{:<22} {:>5} {:>10} {:>7}  {}\n", row.label, o.mllm_calls, o.mask.count(), score,
                                   o.composed_prompt);
        } catch (const Error& e) {
          std::cout << fmt::format("{:<22} {:>5} {:>10} {:>7}  error: {}\n", row.label, "-", "-", "-", e.what());
        }
      }
    } else if (*serve) {
      ToolkitConfig c = config;
      if (port >= 0) c.port = port;
      if (!host.empty()) c.host = host;
      auto pipeline = std::make_shared<Pipeline>(build_backends(c), load_prompts(c), pipeline_options(c));
      ServiceOptions so;
      so.max_upload_bytes = c.max_upload_bytes;
      if (!session_log_dir.empty()) so.session_log_dir = fs::absolute(session_log_dir);
      SessionService service(pipeline, so);
      HttpServer server(service);
      const int bound = server.bind(c.host, c.port);
      std::cout << "listening on http://" << c.host << ":" << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, handle_stop);
      std::signal(SIGTERM, handle_stop);
      server.run();
      g_server = nullptr;
    } else if (*key) {
      const ImageRef img = ImageRef::from_file(image);
      const PromptLibrary prompts = load_prompts(config);
      MllmRequest request;
      if (flow == "segment") {
        request = build_cot_request(img, prompts.bundle(TaskMode::parse(task_mode), config.sampling));
      } else if (flow == "waldo") {
        request = build_cot_request(img, prompts.bundle(TaskMode::waldo(), config.sampling));
      } else if (flow == "control") {
        if (annotation.empty()) throw Error(ErrorKind::invalid_argument, "--flow control needs --annotation");
        const AnnotatedImage a = render_annotation(img, ControlAnnotation::parse(annotation));
        request = build_cot_request(a.image, prompts.bundle(TaskMode::control(), config.sampling));
      } else if (flow == "describe") {
        request.system_context = prompts.system_context();
        request.parts.emplace_back(TextPart{prompts.build_task_prompt(TaskMode::standard())});
        request.parts.emplace_back(ImagePart{img});
        request.temperature = config.sampling.temperature;
        request.max_output_tokens = config.sampling.max_output_tokens;
      } else {
        throw Error(ErrorKind::invalid_argument, "unknown --flow '" + flow + "'");
      }
      std::cout << request_hash(request) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "thinkfirst: " << e.what() << "\n";
    if (!e.detail().empty() && g.verbose) std::cerr << "--- last transcript ---\n" << e.detail() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "thinkfirst: " << e.what() << "\n";
    return pipeline_failure;
  }
  return ok;
}
