// SPDX-License-Identifier: Apache-2.0
#include "thinkfirst/control_annotations.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "thinkfirst/error.hpp"

namespace thinkfirst {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<int> parse_ints(std::string_view text, std::size_t expected, std::string_view literal) {
  std::vector<int> values;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view field = text.substr(0, comma);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw_invalid_argument("malformed annotation literal '" + std::string(literal) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (values.size() != expected) {
    throw_invalid_argument("annotation literal '" + std::string(literal) + "' needs " +
                           std::to_string(expected) + " integers");
  }
  return values;
}

int stroke_for(const ControlAnnotation& ann, int width, int height) {
  return ann.stroke_width.value_or(default_stroke_width(width, height));
}

std::array<PointF, 10> star_vertices(const StarGeometry& s) {
  std::array<PointF, 10> v{};
  for (int k = 0; k < 10; ++k) {
    const double angle = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
    const double r = (k % 2 == 0) ? s.radius : 0.45 * s.radius;
    v[k] = {s.cx + r * std::cos(angle), s.cy + r * std::sin(angle)};
  }
  return v;
}

bool inside_polygon(std::span<const PointF> poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const PointF& a = poly[i];
    const PointF& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y)) inside = !inside;
  }
  return inside;
}

}  // namespace

AnnotationKind ControlAnnotation::kind() const noexcept {
  switch (geometry.index()) {
    case 0: return AnnotationKind::circle;
    case 1: return AnnotationKind::star_point;
    default: return AnnotationKind::bounding_box;
  }
}

ControlAnnotation ControlAnnotation::parse(std::string_view literal) {
  const auto colon = literal.find(':');
  if (colon == std::string_view::npos) {
    throw_invalid_argument("annotation literal '" + std::string(literal) +
                           "' must look like circle:cx,cy,rx,ry | star:cx,cy,r | box:x0,y0,x1,y1");
  }
  const std::string_view tag = literal.substr(0, colon);
  const std::string_view rest = literal.substr(colon + 1);
  ControlAnnotation ann;
  if (tag == "circle") {
    const auto v = parse_ints(rest, 4, literal);
    ann.geometry = CircleGeometry{v[0], v[1], v[2], v[3]};
  } else if (tag == "star") {
    const auto v = parse_ints(rest, 3, literal);
    ann.geometry = StarGeometry{v[0], v[1], v[2]};
  } else if (tag == "box") {
    const auto v = parse_ints(rest, 4, literal);
    ann.geometry = BoxGeometry{v[0], v[1], v[2], v[3]};
  } else {
    throw_invalid_argument("unknown annotation kind '" + std::string(tag) + "' (expected circle, star or box)");
  }
  return ann;
}

std::string ControlAnnotation::to_literal() const {
  return std::visit(
      overloaded{
          [](const CircleGeometry& c) { return fmt::format("circle:{},{},{},{}", c.cx, c.cy, c.rx, c.ry); },
          [](const StarGeometry& s) { return fmt::format("star:{},{},{}", s.cx, s.cy, s.radius); },
          [](const BoxGeometry& b) { return fmt::format("box:{},{},{},{}", b.x0, b.y0, b.x1, b.y1); },
      },
      geometry);
}

int default_stroke_width(int width, int height) noexcept {
  return std::max(2, static_cast<int>(std::lround(std::min(width, height) / 150.0)));
}

std::optional<std::string> validate_annotation(const ControlAnnotation& ann, int width, int height) {
  if (width < 1 || height < 1) return "image dimensions must be positive";
  if (ann.stroke_width && *ann.stroke_width < 1) return "stroke width >= 1 violated";
  const auto in_x = [&](long v) { return v >= 0 && v <= width - 1; };
  const auto in_y = [&](long v) { return v >= 0 && v <= height - 1; };
  return std::visit(
      overloaded{
          [&](const CircleGeometry& c) -> std::optional<std::string> {
            if (c.rx < 2 || c.ry < 2) return "radius >= 2 violated";
            if (!in_x(long{c.cx} - c.rx) || !in_x(long{c.cx} + c.rx) || !in_y(long{c.cy} - c.ry) ||
                !in_y(long{c.cy} + c.ry)) {
              return "out of bounds";
            }
            return std::nullopt;
          },
          [&](const StarGeometry& s) -> std::optional<std::string> {
            if (s.radius < 2) return "radius >= 2 violated";
            if (!in_x(long{s.cx} - s.radius) || !in_x(long{s.cx} + s.radius) ||
                !in_y(long{s.cy} - s.radius) || !in_y(long{s.cy} + s.radius)) {
              return "out of bounds";
            }
            return std::nullopt;
          },
          [&](const BoxGeometry& b) -> std::optional<std::string> {
            if (!(b.x0 < b.x1)) return "x0<x1 violated";
            if (!(b.y0 < b.y1)) return "y0<y1 violated";
            if (!in_x(b.x0) || !in_x(b.x1) || !in_y(b.y0) || !in_y(b.y1)) return "out of bounds";
            return std::nullopt;
          },
      },
      ann.geometry);
}

PixelRegion affected_region(const ControlAnnotation& ann, int width, int height) {
  const int s = stroke_for(ann, width, height);
  PixelRegion r = std::visit(
      overloaded{
          [&](const CircleGeometry& c) { return PixelRegion{c.cx - c.rx, c.cy - c.ry, c.cx + c.rx, c.cy + c.ry}; },
          [&](const StarGeometry& st) {
            return PixelRegion{st.cx - st.radius, st.cy - st.radius, st.cx + st.radius, st.cy + st.radius};
          },
          [&](const BoxGeometry& b) { return PixelRegion{b.x0, b.y0, b.x1, b.y1}; },
      },
      ann.geometry);
  r.x0 = std::max(r.x0 - s, 0);
  r.y0 = std::max(r.y0 - s, 0);
  r.x1 = std::min(r.x1 + s, width - 1);
  r.y1 = std::min(r.y1 + s, height - 1);
  return r;
}

Raster draw_annotation(Raster raster, const ControlAnnotation& ann) {
  const int width = raster.width();
  const int height = raster.height();
  if (auto violation = validate_annotation(ann, width, height)) {
    throw_invalid_argument("invalid annotation " + ann.to_literal() + ": " + *violation);
  }
  const int stroke = stroke_for(ann, width, height);
  const PixelRegion region = affected_region(ann, width, height);
  const Rgb color = ann.color;

  std::visit(
      overloaded{
          [&](const CircleGeometry& c) {
            const double half = stroke / 2.0;
            const double ox = c.rx + half;
            const double oy = c.ry + half;
            const double ix = c.rx - half;
            const double iy = c.ry - half;
            for (int y = region.y0; y <= region.y1; ++y) {
              for (int x = region.x0; x <= region.x1; ++x) {
                const double dx = x - c.cx;
                const double dy = y - c.cy;
                const double outer = (dx * dx) / (ox * ox) + (dy * dy) / (oy * oy);
                if (outer > 1.0) continue;
                const bool outside_inner =
                    ix <= 0.0 || iy <= 0.0 || (dx * dx) / (ix * ix) + (dy * dy) / (iy * iy) >= 1.0;
                if (outside_inner) raster.set(x, y, color);
              }
            }
          },
          [&](const StarGeometry& s) {
            const auto verts = star_vertices(s);
            for (int y = region.y0; y <= region.y1; ++y) {
              for (int x = region.x0; x <= region.x1; ++x) {
                if (inside_polygon(verts, x, y)) raster.set(x, y, color);
              }
            }
          },
          [&](const BoxGeometry& b) {
            const int lo = (stroke - 1) / 2;
            const int hi = stroke / 2;
            const auto on_band = [&](int v, int edge) { return v >= edge - lo && v <= edge + hi; };
            for (int y = region.y0; y <= region.y1; ++y) {
              for (int x = region.x0; x <= region.x1; ++x) {
                const bool vertical = (on_band(x, b.x0) || on_band(x, b.x1)) && y >= b.y0 - lo && y <= b.y1 + hi;
                const bool horizontal =
                    (on_band(y, b.y0) || on_band(y, b.y1)) && x >= b.x0 - lo && x <= b.x1 + hi;
                if (vertical || horizontal) raster.set(x, y, color);
              }
            }
          },
      },
      ann.geometry);
  return raster;
}

AnnotatedImage render_annotation(const ImageRef& source, const ControlAnnotation& ann) {
  if (auto violation = validate_annotation(ann, source.width(), source.height())) {
    throw_invalid_argument("invalid annotation " + ann.to_literal() + ": " + *violation);
  }
  return AnnotatedImage{ImageRef::from_raster(draw_annotation(source.decode(), ann)), source, ann};
}

ControlAnnotation fit_scribble(std::span<const PointF> points) {
  if (points.empty()) throw_invalid_argument("scribble has no points");
  double min_x = points[0].x, max_x = points[0].x, min_y = points[0].y, max_y = points[0].y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  ControlAnnotation ann;
  ann.geometry = CircleGeometry{
      static_cast<int>(std::lround((min_x + max_x) / 2)),
      static_cast<int>(std::lround((min_y + max_y) / 2)),
      std::max(2, static_cast<int>(std::lround((max_x - min_x) / 2))),
      std::max(2, static_cast<int>(std::lround((max_y - min_y) / 2))),
  };
  return ann;
}

}  // namespace thinkfirst
