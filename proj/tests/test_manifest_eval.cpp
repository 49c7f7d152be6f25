// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "support.hpp"
#include "thinkfirst/config.hpp"
#include "thinkfirst/error.hpp"
#include "thinkfirst/eval_harness.hpp"
#include "thinkfirst/manifest.hpp"

using namespace thinkfirst;
using namespace tf_test;

namespace {

std::unique_ptr<Pipeline> offline_pipeline() {
  const ToolkitConfig c = ToolkitConfig::load(fixtures() / "offline.json");
  return std::make_unique<Pipeline>(build_backends(c), load_prompts(c), pipeline_options(c));
}

std::string load_error(const fs::path& manifest) {
  try {
    load_manifest(manifest);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::load);
    return e.message();
  }
  ADD_FAILURE() << "manifest loaded";
  return {};
}

std::string row(const std::string& id, const fs::path& img, const fs::path& mask, const std::string& cls = "-",
                const std::string& split = "test") {
  return id + "\t" + img.string() + "\t" + mask.string() + "\t" + cls + "\t" + split + "\n";
}

}  // namespace

TEST(Manifest, LoadsSyntheticRows) {
  const DatasetManifest m = load_manifest(fixtures() / "synthetic.manifest");
  EXPECT_EQ(m.name, "synthetic");
  ASSERT_EQ(m.samples.size(), 3u);
  EXPECT_EQ(m.samples[0].id, "hit");
  EXPECT_TRUE(m.samples[0].image_path.is_absolute());
  EXPECT_EQ(m.samples[1].width, 4);
  EXPECT_FALSE(m.samples[2].object_class);
  EXPECT_EQ(m.samples[2].gt_mask().count(), 8u);
  EXPECT_EQ(m.samples[0].image().width(), 4);
}

TEST(Manifest, TwoRowsWithClassesAndSplits) {
  TempDir dir;
  const fs::path img = fixtures() / "images" / "synthetic_hit.png";
  const fs::path mask = fixtures() / "masks" / "synthetic_hit.png";
  write_text(dir / "two.manifest", std::string(kManifestHeader) + "\n\n# comment\n" + row("a", img, mask, "crab", "train") +
                                       row("b", img, mask, "-", "test"));
  const DatasetManifest m = load_manifest(dir / "two.manifest");
  ASSERT_EQ(m.samples.size(), 2u);
  EXPECT_EQ(m.samples[0].object_class.value_or(""), "crab");
  EXPECT_EQ(m.samples[0].split, Split::train);
  EXPECT_EQ(m.filtered(Split::test).samples.size(), 1u);
  EXPECT_EQ(m.filtered(Split::test).samples[0].id, "b");
}

TEST(Manifest, Errors) {
  TempDir dir;
  const fs::path img = fixtures() / "images" / "synthetic_hit.png";
  const fs::path mask = fixtures() / "masks" / "synthetic_hit.png";
  const std::string header = std::string(kManifestHeader) + "\n";

  write_text(dir / "missing.manifest", header + row("a", img, mask) + row("b", img, dir / "nope.png"));
  const std::string missing = load_error(dir / "missing.manifest");
  EXPECT_TRUE(missing.starts_with("row 2: mask not found")) << missing;

  write_text(dir / "dims.manifest", header + row("a", fixtures() / "images" / "flatfish.png", mask));
  EXPECT_TRUE(load_error(dir / "dims.manifest").starts_with("row 1:"));

  write_text(dir / "noheader.manifest", row("a", img, mask));
  EXPECT_FALSE(load_error(dir / "noheader.manifest").empty());

  write_text(dir / "cols.manifest", header + "a\tb\tc\n");
  EXPECT_TRUE(load_error(dir / "cols.manifest").starts_with("row 1:"));

  write_text(dir / "split.manifest", header + row("a", img, mask, "-", "val"));
  EXPECT_TRUE(load_error(dir / "split.manifest").starts_with("row 1:"));

  write_text(dir / "dup.manifest", header + row("a", img, mask) + row("a", img, mask));
  EXPECT_TRUE(load_error(dir / "dup.manifest").starts_with("row 2:"));

  EXPECT_FALSE(load_error(dir / "absent.manifest").empty());
}

TEST(Manifest, PolygonJsonMask) {
  TempDir dir;
  write_file_bytes(dir / "img.png", encode_png(Raster(8, 8)));
  write_text(dir / "mask.json", R"({"shapes": [
      {"label": "target", "points": [[0, 0], [4, 0], [4, 4], [0, 4]]},
      {"label": "ignore", "points": [[4, 4], [8, 4], [8, 8], [4, 8]]}]})");
  write_text(dir / "poly.manifest", std::string(kManifestHeader) + "\np\timg.png\tmask.json\t-\ttest\n");
  const DatasetManifest m = load_manifest(dir / "poly.manifest");
  const BinaryMask gt = m.samples.at(0).gt_mask();
  EXPECT_EQ(gt.count(), 16u);
  EXPECT_TRUE(gt.at(0, 0));
  EXPECT_FALSE(gt.at(6, 6));
  EXPECT_EQ(load_polygon_mask(dir / "mask.json", 8, 8), gt);
}

TEST(Eval, SyntheticFullMode) {
  const auto pipeline = offline_pipeline();
  const MetricsReport r = run_eval(load_manifest(fixtures() / "synthetic.manifest"), *pipeline, {});
  ASSERT_EQ(r.per_sample.size(), 3u);
  EXPECT_DOUBLE_EQ(r.per_sample[0].iou, 1.0);
  EXPECT_DOUBLE_EQ(r.per_sample[1].iou, 4.0 / 12.0);
  EXPECT_EQ(r.per_sample[1].intersection, 4u);
  EXPECT_EQ(r.per_sample[1].union_, 12u);
  EXPECT_DOUBLE_EQ(r.per_sample[2].iou, 0.0);
  EXPECT_NEAR(r.giou, 4.0 / 9.0, 1e-12);
  EXPECT_NEAR(r.ciou, 12.0 / 28.0, 1e-12);
  EXPECT_EQ(format_percent(r.giou), "44.4");
  EXPECT_EQ(r.config.mode, "full");
  EXPECT_EQ(r.config.query_kind, "implicit");
  EXPECT_EQ(r.config.dataset, "synthetic");
}

TEST(Eval, FullBeatsBaseline) {
  const auto pipeline = offline_pipeline();
  const DatasetManifest m = load_manifest(fixtures() / "synthetic.manifest");
  const MetricsReport full = run_eval(m, *pipeline, {});
  EvalOptions base;
  base.mode = PipelineMode::baseline_no_mllm;
  const MetricsReport baseline = run_eval(m, *pipeline, base);
  EXPECT_GT(full.giou, baseline.giou);
  EXPECT_GT(full.ciou, baseline.ciou);
  EXPECT_EQ(baseline.config.mode, "baseline_no_mllm");
}

TEST(Eval, ParallelismDoesNotChangeResults) {
  const auto pipeline = offline_pipeline();
  const DatasetManifest m = load_manifest(fixtures() / "synthetic.manifest");
  const MetricsReport serial = run_eval(m, *pipeline, {});
  EvalOptions par;
  par.parallelism = 3;
  const MetricsReport parallel = run_eval(m, *pipeline, par);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(render_report(serial, ReportStyle::json), render_report(parallel, ReportStyle::json));
}

TEST(Eval, FailedSampleScoresZeroWithNote) {
  TempDir dir;
  write_file_bytes(dir / "odd.png", encode_png(Raster(4, 4, Rgb{1, 2, 3})));
  write_text(dir / "f.manifest", std::string(kManifestHeader) + "\n" +
                                     row("hit", fixtures() / "images" / "synthetic_hit.png",
                                         fixtures() / "masks" / "synthetic_hit.png") +
                                     row("odd", dir / "odd.png", fixtures() / "masks" / "synthetic_hit.png"));
  const auto pipeline = offline_pipeline();
  const MetricsReport r = run_eval(load_manifest(dir / "f.manifest"), *pipeline, {});
  ASSERT_EQ(r.per_sample.size(), 2u);
  EXPECT_FALSE(r.per_sample[0].error);
  ASSERT_TRUE(r.per_sample[1].error);
  EXPECT_NE(r.per_sample[1].error->find("fixture"), std::string::npos);
  EXPECT_EQ(r.per_sample[1].iou, 0.0);
  EXPECT_EQ(r.per_sample[1].intersection, 0u);
  EXPECT_EQ(r.per_sample[1].union_, 8u);
  EXPECT_DOUBLE_EQ(r.giou, 0.5);
}

TEST(Eval, TaskModeSelection) {
  EvalSample s;
  s.object_class = "crab";
  EXPECT_EQ(eval_task_mode(s, {}), TaskMode::camouflage());
  EvalOptions explicit_q;
  explicit_q.query_kind = QueryKind::explicit_object;
  EXPECT_EQ(eval_task_mode(s, explicit_q), TaskMode::explicit_object("crab"));
  explicit_q.task_mode = TaskMode::standard();
  EXPECT_EQ(eval_task_mode(s, explicit_q), TaskMode::standard());
}

TEST(Eval, ExplicitQueriesNeedClasses) {
  const auto pipeline = offline_pipeline();
  EvalOptions opts;
  opts.query_kind = QueryKind::explicit_object;
  try {
    run_eval(load_manifest(fixtures() / "synthetic.manifest"), *pipeline, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
}
