// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thinkfirst/image.hpp"
#include "thinkfirst/mask.hpp"

namespace thinkfirst {

enum class Split { train, test };

std::string_view to_string(Split split) noexcept;

// One manifest row. Paths are absolute (relative entries are resolved
// against the manifest's directory). Image and mask are validated at load
// time and decoded again on demand, so large datasets are not held in memory.
struct EvalSample {
  std::string id;
  std::filesystem::path image_path;
  std::filesystem::path mask_path;
  std::optional<std::string> object_class;
  Split split = Split::test;
  int width = 0;
  int height = 0;

  ImageRef image() const;
  // PNG/JPEG masks: nonzero = foreground. `.json` masks are labelme-style
  // polygon files (ReasonSeg); every shape except label "ignore" is filled
  // with the even-odd rule.
  BinaryMask gt_mask() const;
};

struct DatasetManifest {
  std::string name;  // manifest file stem
  std::filesystem::path path;
  std::vector<EvalSample> samples;

  DatasetManifest filtered(Split split) const;
};

inline constexpr std::string_view kManifestHeader = "#thinkfirst-manifest v1";

// Format: the header line, then one tab-separated row per sample:
//   <id> <image_path> <mask_path> <object_class|-> <train|test>
// Blank lines and further '#' lines are ignored. Any problem is
// Error(load) "row N: ..." where N counts data rows from 1.
DatasetManifest load_manifest(const std::filesystem::path& path);

BinaryMask load_polygon_mask(const std::filesystem::path& json_path, int width, int height);

}  // namespace thinkfirst
