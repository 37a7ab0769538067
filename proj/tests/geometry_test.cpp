/* Copyright 2026 The Flockeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "flockeval/geometry.hpp"

#include <cmath>

#include "doctest.h"
#include "flockeval/errors.hpp"
#include "support/oracles.hpp"

using namespace flockeval;

namespace {

Polygon8 axis_rect(double x0, double y0, double x1, double y1) {
  const double xm = (x0 + x1) / 2.0, ym = (y0 + y1) / 2.0;
  Polygon8 p;
  p.points = {{{x0, y0},
               {xm, y0},
               {x1, y0},
               {x1, ym},
               {x1, y1},
               {xm, y1},
               {x0, y1},
               {x0, ym}}};
  return p;
}

Polygon8 regular_octagon(double cx, double cy, double r) {
  Polygon8 p;
  for (int k = 0; k < 8; ++k) {
    const double a = 2.0 * M_PI * k / 8.0;
    p.points[static_cast<std::size_t>(k)] = {cx + r * std::cos(a),
                                             cy + r * std::sin(a)};
  }
  return p;
}

}  // namespace

TEST_CASE("shoelace area of known shapes") {
  const Polygon8 rect = axis_rect(10, 20, 40, 50);
  CHECK(polygon_area(rect) == doctest::Approx(30.0 * 30.0).epsilon(1e-12));

  const Polygon8 oct = regular_octagon(100, 100, 10);
  // Regular octagon with circumradius r has area 2*sqrt(2)*r^2.
  CHECK(polygon_area(oct) ==
        doctest::Approx(2.0 * std::sqrt(2.0) * 100.0).epsilon(1e-9));
}

TEST_CASE("bbox_iou worked examples") {
  // Two unit-aligned boxes of width 17 shifted by 3 along x:
  // intersection 14*h, union 20*h, IoU = 0.7 exactly.
  const BBox a{0, 0, 17, 10};
  const BBox b{3, 0, 20, 10};
  CHECK(bbox_iou(a, b) == doctest::Approx(0.7).epsilon(1e-12));

  CHECK(bbox_iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bbox_iou(a, BBox{30, 30, 40, 40}) == 0.0);
  // Shared edge only: zero-area intersection.
  CHECK(bbox_iou(a, BBox{17, 0, 30, 10}) == 0.0);
}

TEST_CASE("bbox_iou equals longhand arithmetic on random boxes") {
  oracles::TestRng rng(411);
  for (int i = 0; i < 500; ++i) {
    const double ax = rng.uniform(0, 500), ay = rng.uniform(0, 300);
    const BBox a{ax, ay, ax + rng.uniform(5, 200), ay + rng.uniform(5, 200)};
    const double bx = rng.uniform(0, 500), by = rng.uniform(0, 300);
    const BBox b{bx, by, bx + rng.uniform(5, 200), by + rng.uniform(5, 200)};
    CHECK(bbox_iou(a, b) ==
          doctest::Approx(oracles::exact_bbox_iou(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("polygon_to_bbox hull and failure modes") {
  const Polygon8 rect = axis_rect(10, 20, 40, 50);
  const BBox box = polygon_to_bbox(rect);
  CHECK(box.x_min == 10);
  CHECK(box.y_min == 20);
  CHECK(box.x_max == 40);
  CHECK(box.y_max == 50);

  Polygon8 flat = rect;
  for (Point& p : flat.points) p.y = 20;
  CHECK_THROWS_AS(polygon_to_bbox(flat), InvalidGeometry);

  Polygon8 nan_poly = rect;
  nan_poly.points[3].x = std::nan("");
  CHECK_THROWS_AS(polygon_to_bbox(nan_poly), InvalidGeometry);
}

TEST_CASE("rasterized polygon IoU on axis rectangles is near exact") {
  // Rectangles rasterize cleanly, so the supersampled IoU should sit very
  // close to the arithmetic value 14*10 / (20*10).
  const Polygon8 a = axis_rect(0, 0, 17, 10);
  const Polygon8 b = axis_rect(3, 0, 20, 10);
  CHECK(rasterized_polygon_iou(a, b) == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(polygon_iou(a, a) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("convex fast path agrees with rasterization") {
  oracles::TestRng rng(902);
  int convex_pairs = 0;
  for (int i = 0; i < 120; ++i) {
    const Polygon8 a = regular_octagon(rng.uniform(80, 160),
                                       rng.uniform(80, 160),
                                       rng.uniform(30, 60));
    const Polygon8 b = regular_octagon(rng.uniform(80, 160),
                                       rng.uniform(80, 160),
                                       rng.uniform(30, 60));
    REQUIRE(is_convex(a));
    REQUIRE(is_convex(b));
    const std::optional<double> fast = convex_polygon_iou(a, b);
    REQUIRE(fast.has_value());
    ++convex_pairs;
    CHECK(std::abs(*fast - rasterized_polygon_iou(a, b)) < 5e-3);
  }
  CHECK(convex_pairs == 120);
}

TEST_CASE("polygon IoU of disjoint and degenerate shapes") {
  const Polygon8 a = axis_rect(0, 0, 10, 10);
  const Polygon8 far = axis_rect(100, 100, 120, 130);
  CHECK(polygon_iou(a, far) == 0.0);

  Polygon8 flat = a;
  for (Point& p : flat.points) p.y = 5;
  CHECK(polygon_iou(a, flat) == 0.0);
  CHECK_THROWS_AS(polygon_iou(flat, flat), InvalidGeometry);
}

TEST_CASE("point_in_polygon even-odd membership") {
  const Polygon8 oct = regular_octagon(50, 50, 20);
  CHECK(point_in_polygon(oct.points, Point{50, 50}));
  CHECK(point_in_polygon(oct.points, Point{60, 55}));
  CHECK_FALSE(point_in_polygon(oct.points, Point{75, 75}));
  CHECK_FALSE(point_in_polygon(oct.points, Point{0, 0}));
}

TEST_CASE("validate_polygon reports each anomaly") {
  const double w = 1280, h = 720;
  const Polygon8 good = axis_rect(100, 100, 200, 180);
  CHECK(validate_polygon(good.points, w, h).empty());

  SUBCASE("wrong point count") {
    std::vector<Point> seven(good.points.begin(), good.points.end() - 1);
    const auto anomalies = validate_polygon(seven, w, h);
    REQUIRE(anomalies.size() == 1);
    CHECK(anomalies[0] == PolygonAnomaly::WrongPointCount);
    CHECK(excludes_from_matching(anomalies[0]));
  }
  SUBCASE("out of frame") {
    Polygon8 shifted = axis_rect(-5, 100, 90, 180);
    const auto anomalies = validate_polygon(shifted.points, w, h);
    REQUIRE(anomalies.size() == 1);
    CHECK(anomalies[0] == PolygonAnomaly::OutOfFrame);
    CHECK_FALSE(excludes_from_matching(anomalies[0]));
  }
  SUBCASE("counter-clockwise winding") {
    Polygon8 reversed = good;
    std::reverse(reversed.points.begin(), reversed.points.end());
    const auto anomalies = validate_polygon(reversed.points, w, h);
    REQUIRE(anomalies.size() == 1);
    CHECK(anomalies[0] == PolygonAnomaly::CounterClockwise);
    CHECK_FALSE(excludes_from_matching(anomalies[0]));
  }
  SUBCASE("zero area") {
    Polygon8 flat = good;
    for (Point& p : flat.points) p.y = 100;
    const auto anomalies = validate_polygon(flat.points, w, h);
    CHECK(std::find(anomalies.begin(), anomalies.end(),
                    PolygonAnomaly::ZeroArea) != anomalies.end());
    CHECK(excludes_from_matching(PolygonAnomaly::ZeroArea));
  }
  SUBCASE("non-finite coordinate") {
    Polygon8 broken = good;
    broken.points[2].y = std::numeric_limits<double>::infinity();
    const auto anomalies = validate_polygon(broken.points, w, h);
    REQUIRE(!anomalies.empty());
    CHECK(anomalies[0] == PolygonAnomaly::NonFinite);
    CHECK(excludes_from_matching(anomalies[0]));
  }
}

TEST_CASE("rasterized IoU tracks Monte Carlo on star polygons") {
  oracles::TestRng rng(5150);
  for (int i = 0; i < 25; ++i) {
    const Polygon8 a =
        oracles::star_polygon(rng, 200, 200, 45, 60);
    const Polygon8 b = oracles::star_polygon(
        rng, 200 + rng.uniform(-70, 70), 200 + rng.uniform(-70, 70), 45, 60);
    const double got = polygon_iou(a, b);
    const double want = oracles::mc_iou(a, b, 100000, 77000 + i);
    CHECK(std::abs(got - want) < 0.01);
  }
}
