// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "thinkfirst/control_annotations.hpp"
#include "thinkfirst/cot_orchestrator.hpp"
#include "thinkfirst/metrics.hpp"
#include "thinkfirst/mllm_backend.hpp"
#include "thinkfirst/prompt_engine.hpp"
#include "thinkfirst/rle.hpp"
#include "thinkfirst/transcript.hpp"

using namespace thinkfirst;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (on(rng)) m.set(x, y);
    }
  }
  return m;
}

BinaryMask blob_mask(int w, int h) {
  BinaryMask m(w, h);
  for (int y = h / 4; y < 3 * h / 4; ++y) {
    for (int x = w / 4; x < 3 * w / 4; ++x) m.set(x, y);
  }
  return m;
}

std::string slurp(const char* path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ImageRef gradient_image(int w, int h) {
  Raster r(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      r.set(x, y, {static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 128});
    }
  }
  return ImageRef::from_raster(r);
}

}  // namespace

static void BM_Iou(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  const BinaryMask a = random_mask(rng, side, side, 0.5), b = random_mask(rng, side, side, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(iou(a, b));
  state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Iou)->Arg(64)->Arg(512)->Arg(1024);

static void BM_Aggregate(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::vector<std::pair<BinaryMask, BinaryMask>> pairs;
  for (int i = 0; i < state.range(0); ++i) pairs.emplace_back(random_mask(rng, 64, 64, 0.4), random_mask(rng, 64, 64, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(pairs));
}
BENCHMARK(BM_Aggregate)->Arg(100)->Arg(1000);

static void BM_ParseTranscript(benchmark::State& state) {
  const std::string text = slurp(THINKFIRST_BENCH_TRANSCRIPT);
  for (auto _ : state) benchmark::DoNotOptimize(parse_transcript(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseTranscript);

static void BM_RenderTranscript(benchmark::State& state) {
  const CotResult r = parse_transcript(slurp(THINKFIRST_BENCH_TRANSCRIPT));
  for (auto _ : state) benchmark::DoNotOptimize(render_transcript(r));
}
BENCHMARK(BM_RenderTranscript);

static void BM_RleEncode(benchmark::State& state) {
  const BinaryMask m = blob_mask(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rle_encode(m));
}
BENCHMARK(BM_RleEncode)->Arg(256)->Arg(1024);

static void BM_RleDecode(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto runs = rle_encode(blob_mask(side, side));
  for (auto _ : state) benchmark::DoNotOptimize(rle_decode(runs, side, side));
}
BENCHMARK(BM_RleDecode)->Arg(256)->Arg(1024);

static void BM_RequestHash(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const PromptLibrary lib = PromptLibrary::load(THINKFIRST_BENCH_PROMPTS);
  const MllmRequest req = build_cot_request(gradient_image(side, side), lib.bundle(TaskMode::camouflage()));
  for (auto _ : state) benchmark::DoNotOptimize(request_hash(req));
}
BENCHMARK(BM_RequestHash)->Arg(64)->Arg(512);

static void BM_RenderAnnotation(benchmark::State& state) {
  const ImageRef img = gradient_image(256, 256);
  const ControlAnnotation ann = ControlAnnotation::parse(state.range(0) == 0   ? "box:40,40,200,180"
                                                         : state.range(0) == 1 ? "circle:128,128,60,40"
                                                                               : "star:128,128,50");
  for (auto _ : state) benchmark::DoNotOptimize(render_annotation(img, ann));
}
BENCHMARK(BM_RenderAnnotation)->Arg(0)->Arg(1)->Arg(2);
BENCHMARK_MAIN();
