// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "thinkfirst/image.hpp"
#include "thinkfirst/mask.hpp"

namespace thinkfirst {

enum class AnnotationKind { circle, star_point, bounding_box };

struct CircleGeometry {
  int cx = 0, cy = 0, rx = 0, ry = 0;
};
struct StarGeometry {
  int cx = 0, cy = 0, radius = 0;
};
struct BoxGeometry {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

// A casual user control drawn onto the query image.
struct ControlAnnotation {
  std::variant<CircleGeometry, StarGeometry, BoxGeometry> geometry;
  // Unset: max(2, round(min(width, height) / 150)) of the target image.
  std::optional<int> stroke_width;
  Rgb color{255, 0, 0};

  AnnotationKind kind() const noexcept;

  // `circle:cx,cy,rx,ry`, `star:cx,cy,r` or `box:x0,y0,x1,y1`, integer pixels.
  // Throws Error(invalid_argument) on malformed text (geometry is not checked).
  static ControlAnnotation parse(std::string_view literal);
  std::string to_literal() const;
};

int default_stroke_width(int width, int height) noexcept;

// Returns the first violated rule ("x0<x1 violated", "y0<y1 violated",
// "radius >= 2 violated", "stroke width >= 1 violated", "out of bounds"),
// or nullopt when the annotation fits a width x height image.
std::optional<std::string> validate_annotation(const ControlAnnotation& ann, int width, int height);

struct PixelRegion {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  bool contains(int x, int y) const noexcept { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// Bounding region of the shape dilated by the stroke width; rendering
// never touches pixels outside it.
PixelRegion affected_region(const ControlAnnotation& ann, int width, int height);

struct AnnotatedImage {
  ImageRef image;   // PNG with the control drawn on it
  ImageRef source;  // untouched input
  ControlAnnotation annotation;
};

// circle: unfilled ellipse outline; star_point: filled 5-point star with
// inner radius 0.45 x outer, first tip pointing up; bounding_box: unfilled
// rectangle outline. Throws Error(invalid_argument) for invalid geometry.
AnnotatedImage render_annotation(const ImageRef& source, const ControlAnnotation& ann);
Raster draw_annotation(Raster raster, const ControlAnnotation& ann);

// Fits a free-hand scribble to its bounding ellipse as a circle control.
ControlAnnotation fit_scribble(std::span<const PointF> points);

}  // namespace thinkfirst
