// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/manifest.hpp"

#include <set>

#include <json.hpp>

#include "text_util.hpp"
#include "thinkfirst/error.hpp"

namespace thinkfirst {

std::string_view to_string(Split split) noexcept { return split == Split::train ? "train" : "test"; }

namespace {

bool is_polygon_file(const std::filesystem::path& p) { return detail::lower_ascii(p.extension().string()) == ".json"; }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

ImageRef EvalSample::image() const { return ImageRef::from_file(image_path); }

BinaryMask EvalSample::gt_mask() const {
  if (is_polygon_file(mask_path)) return load_polygon_mask(mask_path, width, height);
  return read_mask(mask_path);
}

DatasetManifest DatasetManifest::filtered(Split split) const {
  DatasetManifest out{name, path, {}};
  for (const auto& s : samples) {
    if (s.split == split) out.samples.push_back(s);
  }
  return out;
}

BinaryMask load_polygon_mask(const std::filesystem::path& json_path, int width, int height) {
  const auto bytes = read_file_bytes(json_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::load, json_path.string() + ": " + e.what());
  }
  std::vector<std::vector<PointF>> polygons;
  try {
    for (const auto& shape : doc.at("shapes")) {
      if (shape.value("label", std::string{}) == "ignore") continue;
      std::vector<PointF> poly;
      for (const auto& pt : shape.at("points")) poly.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
      if (poly.size() >= 3) polygons.push_back(std::move(poly));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::load, json_path.string() + ": malformed polygon annotation: " + e.what());
  }
  return rasterize_polygons(polygons, width, height);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::load, "cannot read manifest " + path.string() + ": " + e.message());
  }
  const std::string text(bytes.begin(), bytes.end());
  const auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines.front()) != kManifestHeader) {
    throw Error(ErrorKind::load, path.string() + ": first line must be '" + std::string(kManifestHeader) + "'");
  }

  DatasetManifest manifest;
  manifest.name = path.stem().string();
  manifest.path = std::filesystem::absolute(path);
  const auto base = manifest.path.parent_path();
  const auto resolve = [&](std::string_view p) {
    std::filesystem::path fp{std::string(p)};
    return fp.is_absolute() ? fp : base / fp;
  };

  std::set<std::string> ids;
  int row = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (detail::trim(line).empty() || line.front() == '#') continue;
    ++row;
    const auto fail = [&](const std::string& what) -> Error {
      return Error(ErrorKind::load, "row " + std::to_string(row) + ": " + what);
    };
    const auto fields = split_tabs(line);
    if (fields.size() != 5) throw fail("expected 5 tab-separated fields, found " + std::to_string(fields.size()));
    for (const auto& f : fields) {
      if (f.empty()) throw fail("empty field");
    }

    EvalSample s;
    s.id = std::string(fields[0]);
    if (!ids.insert(s.id).second) throw fail("duplicate id '" + s.id + "'");
    s.image_path = resolve(fields[1]);
    s.mask_path = resolve(fields[2]);
    if (fields[3] != "-") s.object_class = std::string(fields[3]);
    if (fields[4] == "train") {
      s.split = Split::train;
    } else if (fields[4] == "test") {
      s.split = Split::test;
    } else {
      throw fail("split must be train or test, got '" + std::string(fields[4]) + "'");
    }

    if (!std::filesystem::is_regular_file(s.image_path)) throw fail("image not found: " + s.image_path.string());
    if (!std::filesystem::is_regular_file(s.mask_path)) throw fail("mask not found: " + s.mask_path.string());
    try {
      const ImageRef image = s.image();
      s.width = image.width();
      s.height = image.height();
    } catch (const Error& e) {
      throw fail("image not decodable: " + e.message());
    }
    BinaryMask mask;
    try {
      mask = s.gt_mask();
    } catch (const Error& e) {
      throw fail("mask not decodable: " + e.message());
    }
    if (mask.width() != s.width || mask.height() != s.height) {
      throw fail("mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) + " but image is " +
                 std::to_string(s.width) + "x" + std::to_string(s.height));
    }
    manifest.samples.push_back(std::move(s));
  }
  if (manifest.samples.empty()) throw Error(ErrorKind::load, path.string() + ": manifest has no samples");
  return manifest;
}

}  // namespace thinkfirst
