// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>

#include "support.hpp"
#include "thinkfirst/mask.hpp"
#include "thinkfirst/segmenter_backend.hpp"

using namespace thinkfirst;
using namespace tf_test;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

CliRun cli(const std::string& args) {
  const std::string cmd = quote(THINKFIRST_CLI) + " --config " + quote((fixtures() / "offline.json").string()) + " " +
                          args + " 2>&1";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string img(const std::string& name) { return quote((fixtures() / "images" / name).string()); }

const std::string kImplicitArg =
    "'What is the camouflaged object in the image that can move like an animal? Please segment it.'";

}  // namespace

TEST(Cli, SegmentWritesMaskAndTranscript) {
  TempDir dir;
  const CliRun r = cli("segment --image " + img("flatfish.png") + " --query " + kImplicitArg +
                    " --task-mode camouflage --out " + quote((dir / "mask.png").string()) + " --cot-out " +
                    quote((dir / "cot.txt").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read_mask(dir / "mask.png"), rasterize_box({0, 0, 3, 1}, 48, 32));
  const std::string cot = read_text(dir / "cot.txt");
  EXPECT_NE(cot.find("Summary:"), std::string::npos);
  EXPECT_NE(cot.find("camouflaged flatfish"), std::string::npos);
}

TEST(Cli, SegmentLogDirIsDeterministic) {
  TempDir a, b;
  for (const auto* d : {&a, &b}) {
    const CliRun r = cli("segment --image " + img("flatfish.png") + " --query " + kImplicitArg +
                      " --task-mode camouflage --log-dir " + quote(d->path().string()));
    ASSERT_EQ(r.code, 0) << r.out;
  }
  for (const char* f : {"outcome.json", "transcript.txt", "mask.png"}) {
    EXPECT_EQ(read_text(a / f), read_text(b / f)) << f;
  }
}

TEST(Cli, EvalPrintsScores) {
  TempDir dir;
  const CliRun r = cli("eval --manifest " + quote((fixtures() / "synthetic.manifest").string()) + " --report " +
                    quote((dir / "report.json").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("giou 44.4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("ciou 42.9"), std::string::npos) << r.out;
  const auto report = nlohmann::json::parse(read_text(dir / "report.json"));
  EXPECT_EQ(report["per_sample"].size(), 3u);

  const CliRun base = cli("eval --manifest " + quote((fixtures() / "synthetic.manifest").string()) + " --mode baseline");
  ASSERT_EQ(base.code, 0) << base.out;
  EXPECT_NE(base.out.find("giou 0.0"), std::string::npos) << base.out;
}

TEST(Cli, WaldoAndControl) {
  TempDir dir;
  const CliRun good = cli("waldo --image " + img("waldo.png") + " --out " + quote((dir / "w.png").string()));
  ASSERT_EQ(good.code, 0) << good.out;
  EXPECT_EQ(read_mask(dir / "w.png").count(), 64u);

  const CliRun bad = cli("waldo --image " + img("waldo_bad.png"));
  EXPECT_EQ(bad.code, 3) << bad.out;
  EXPECT_NE(bad.out.find("waldo"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli("segment --image " + img("flatfish.png") + " --bogus-flag").code, 2);
  const CliRun usage = cli("segment --image " + img("flatfish.png") + " --bogus-flag");
  EXPECT_NE(usage.out.find("--query"), std::string::npos) << usage.out;
  EXPECT_EQ(cli("segment --image /nonexistent.png --query q").code, 2);
  EXPECT_EQ(cli("refine --image " + img("chair.png") + " --annotation box:9,9,1,1").code, 2);

  const CliRun missing = cli("segment --image " + img("chair.png") + " --query q");
  EXPECT_EQ(missing.code, 4) << missing.out;
  EXPECT_NE(missing.out.find("fixture"), std::string::npos);
}

TEST(Cli, AblatePrintsThreeRows) {
  const CliRun r = cli("ablate --image " + img("synthetic_half.png") + " --query " + kImplicitArg +
                    " --task-mode camouflage --gt " + quote((fixtures() / "masks" / "synthetic_half.png").string()));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ThinkFirst (full)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("w/ MLLM, w/o CoT"), std::string::npos);
  EXPECT_NE(r.out.find("w/o MLLM (baseline)"), std::string::npos);
}

TEST(Cli, FixtureKeyMatchesOracle) {
  const auto oracle = nlohmann::json::parse(read_text(fixtures() / "request_hashes.json"));
  const CliRun r = cli("fixture-key --image " + img("flatfish.png") + " --task-mode camouflage");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find(oracle["flatfish_camouflage"].get<std::string>()), std::string::npos) << r.out;
  const CliRun d = cli("fixture-key --image " + img("flatfish.png") + " --flow describe");
  EXPECT_NE(d.out.find(oracle["flatfish_describe"].get<std::string>()), std::string::npos) << d.out;
}
