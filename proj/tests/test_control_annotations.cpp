// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thinkfirst/control_annotations.hpp"
#include "thinkfirst/error.hpp"

using namespace thinkfirst;
using namespace tf_test;

namespace {

ControlAnnotation make(std::variant<CircleGeometry, StarGeometry, BoxGeometry> g) {
  ControlAnnotation a;
  a.geometry = g;
  return a;
}
ControlAnnotation circle(int cx, int cy, int rx, int ry) { return make(CircleGeometry{cx, cy, rx, ry}); }
ControlAnnotation star(int cx, int cy, int r) { return make(StarGeometry{cx, cy, r}); }
ControlAnnotation box(int x0, int y0, int x1, int y1) { return make(BoxGeometry{x0, y0, x1, y1}); }

const Rgb kRed{255, 0, 0};
const Rgb kGrey{128, 128, 128};

}  // namespace

TEST(ControlAnnotation, LiteralRoundTrip) {
  for (const char* lit : {"circle:10,12,5,4", "star:3,4,7", "box:0,0,9,9"}) {
    EXPECT_EQ(ControlAnnotation::parse(lit).to_literal(), lit);
  }
  EXPECT_EQ(ControlAnnotation::parse("circle:1,2,3,4").kind(), AnnotationKind::circle);
  EXPECT_EQ(ControlAnnotation::parse("star:1,2,3").kind(), AnnotationKind::star_point);
  EXPECT_EQ(ControlAnnotation::parse("box:1,2,3,4").kind(), AnnotationKind::bounding_box);
  for (const char* bad : {"", "circle", "circle:1,2,3", "star:1,2", "box:1,2,3,4,5", "box:a,b,c,d", "oval:1,2,3,4",
                          "box:1.5,2,3,4"}) {
    EXPECT_THROW(ControlAnnotation::parse(bad), Error) << bad;
  }
}

TEST(ControlAnnotation, Validation) {
  EXPECT_EQ(validate_annotation(box(5, 0, 5, 9), 20, 20).value_or(""), "x0<x1 violated");
  EXPECT_EQ(validate_annotation(box(0, 5, 9, 4), 20, 20).value_or(""), "y0<y1 violated");
  EXPECT_EQ(validate_annotation(star(5, 5, 1), 20, 20).value_or(""), "radius >= 2 violated");
  EXPECT_EQ(validate_annotation(circle(5, 5, 1, 3), 20, 20).value_or(""), "radius >= 2 violated");
  EXPECT_EQ(validate_annotation(box(0, 0, 20, 10), 20, 20).value_or(""), "out of bounds");
  EXPECT_EQ(validate_annotation(circle(25, 5, 3, 3), 20, 20).value_or(""), "out of bounds");
  ControlAnnotation thin = box(0, 0, 5, 5);
  thin.stroke_width = 0;
  EXPECT_EQ(validate_annotation(thin, 20, 20).value_or(""), "stroke width >= 1 violated");
  EXPECT_FALSE(validate_annotation(box(0, 0, 19, 19), 20, 20));
  EXPECT_EQ(validate_annotation(circle(10, 10, 11, 5), 20, 20).value_or(""), "out of bounds");
  EXPECT_FALSE(validate_annotation(circle(10, 10, 9, 9), 20, 20));
  EXPECT_EQ(validate_annotation(star(99, 99, 20), 100, 100).value_or(""), "out of bounds");
  EXPECT_TRUE(validate_annotation(box(0, 0, 1, 1), 0, 20));
}

TEST(ControlAnnotation, DefaultStrokeWidth) {
  EXPECT_EQ(default_stroke_width(64, 64), 2);
  EXPECT_EQ(default_stroke_width(1920, 1080), 7);
  EXPECT_EQ(default_stroke_width(300, 600), 2);
  EXPECT_EQ(default_stroke_width(600, 600), 4);
}

TEST(ControlAnnotation, RenderKeepsSourceAndRejectsInvalid) {
  const ImageRef src = solid_image(32, 32, kGrey);
  const AnnotatedImage out = render_annotation(src, box(4, 4, 20, 20));
  EXPECT_EQ(out.source, src);
  EXPECT_NE(out.image, src);
  EXPECT_EQ(out.image.format(), ImageFormat::png);
  EXPECT_EQ(out.image.width(), 32);
  try {
    render_annotation(src, box(20, 4, 4, 20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    EXPECT_NE(e.message().find("x0<x1 violated"), std::string::npos);
  }
}

TEST(ControlAnnotation, BoxOutline) {
  const Raster r = draw_annotation(Raster(32, 32, kGrey), box(4, 6, 20, 24));
  EXPECT_EQ(r.at(4, 6), kRed);
  EXPECT_EQ(r.at(20, 24), kRed);
  EXPECT_EQ(r.at(12, 6), kRed);
  EXPECT_EQ(r.at(4, 15), kRed);
  EXPECT_EQ(r.at(12, 15), kGrey);
  EXPECT_EQ(r.at(2, 15), kGrey);
}

TEST(ControlAnnotation, CircleOutline) {
  const Raster r = draw_annotation(Raster(64, 64, kGrey), circle(32, 32, 12, 8));
  EXPECT_EQ(r.at(44, 32), kRed);
  EXPECT_EQ(r.at(20, 32), kRed);
  EXPECT_EQ(r.at(32, 24), kRed);
  EXPECT_EQ(r.at(32, 40), kRed);
  EXPECT_EQ(r.at(32, 32), kGrey);
  EXPECT_EQ(r.at(50, 32), kGrey);
}

TEST(ControlAnnotation, FilledStarFirstTipUp) {
  const Raster r = draw_annotation(Raster(64, 64, kGrey), star(32, 32, 20));
  EXPECT_EQ(r.at(32, 32), kRed);
  EXPECT_EQ(r.at(32, 14), kRed);  // upper tip
  EXPECT_EQ(r.at(32, 46), kGrey);  // between the two lower tips
  EXPECT_EQ(r.at(32, 10), kGrey);
}

TEST(ControlAnnotation, CustomColourAndStroke) {
  ControlAnnotation a = box(4, 4, 20, 20);
  a.color = {0, 255, 0};
  a.stroke_width = 5;
  const Raster r = draw_annotation(Raster(32, 32, kGrey), a);
  EXPECT_EQ(r.at(4, 12), (Rgb{0, 255, 0}));
  EXPECT_EQ(r.at(6, 12), (Rgb{0, 255, 0}));
  EXPECT_EQ(r.at(9, 12), kGrey);
}

TEST(ControlAnnotationProperty, PixelsOutsideRegionUnchanged) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(8, 80);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> stroke(0, 6);
  int checked = 0;
  for (int iter = 0; iter < 400; ++iter) {
    const int w = dim(rng), h = dim(rng);
    auto coord = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    ControlAnnotation a;
    const int cx = 2 + coord(w - 4), cy = 2 + coord(h - 4);
    const int room_x = std::min(cx, w - 1 - cx), room_y = std::min(cy, h - 1 - cy);
    switch (kind(rng)) {
      case 0:
        a = circle(cx, cy, 2 + coord(room_x - 1), 2 + coord(room_y - 1));
        break;
      case 1:
        a = star(cx, cy, 2 + coord(std::min(room_x, room_y) - 1));
        break;
      default: {
        const int x0 = coord(w - 1), y0 = coord(h - 1);
        a = box(x0, y0, x0 + 1 + coord(w - 1 - x0), y0 + 1 + coord(h - 1 - y0));
      }
    }
    if (const int s = stroke(rng); s > 0) a.stroke_width = s;
    ASSERT_FALSE(validate_annotation(a, w, h)) << a.to_literal();
    Raster base(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) base.set(x, y, Rgb{static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 7});
    const Raster drawn = draw_annotation(base, a);
    const PixelRegion region = affected_region(a, w, h);
    bool changed = false;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!(drawn.at(x, y) == base.at(x, y))) {
          changed = true;
          ASSERT_TRUE(region.contains(x, y)) << a.to_literal() << " at " << x << "," << y;
          ASSERT_EQ(drawn.at(x, y), a.color);
        }
      }
    }
    EXPECT_TRUE(changed) << a.to_literal();
    ++checked;
  }
  EXPECT_EQ(checked, 400);
}

TEST(Scribble, FitsBoundingEllipse) {
  std::vector<PointF> pts;
  for (int i = 0; i < 36; ++i) {
    const double t = i * 2 * M_PI / 36;
    pts.push_back({20 + 10 * std::cos(t), 30 + 6 * std::sin(t)});
  }
  const ControlAnnotation a = fit_scribble(pts);
  ASSERT_EQ(a.kind(), AnnotationKind::circle);
  EXPECT_EQ(a.to_literal(), "circle:20,30,10,6");
  const std::vector<PointF> dot = {{5, 5}};
  EXPECT_EQ(fit_scribble(dot).to_literal(), "circle:5,5,2,2");
  EXPECT_THROW(fit_scribble(std::vector<PointF>{}), Error);
}
