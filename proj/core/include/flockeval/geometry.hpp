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
#ifndef FLOCKEVAL_GEOMETRY_HPP_
#define FLOCKEVAL_GEOMETRY_HPP_

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace flockeval {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Eight-point bird outline. Vertices run clockwise in image coordinates
// (y grows downward); vertex 0 is the head, vertex 4 the tail.
struct Polygon8 {
  static constexpr int kHeadIndex = 0;
  static constexpr int kTailIndex = 4;
  static constexpr int kVertexCount = 8;

  std::array<Point, 8> points{};

  friend bool operator==(const Polygon8&, const Polygon8&) = default;
};

struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class PolygonAnomaly {
  WrongPointCount,
  OutOfFrame,
  CounterClockwise,
  ZeroArea,
  NonFinite,
};

std::string_view to_string(PolygonAnomaly a);

// Default supersampling factor for rasterized polygon IoU: 4x4 sample
// points per unit pixel.
inline constexpr int kDefaultIouResolution = 4;

// Sum of x_i*y_{i+1} - x_{i+1}*y_i over the closed vertex loop. Positive for
// a clockwise polygon in image coordinates (y-down); twice the signed area.
double signed_shoelace_sum(std::span<const Point> points);

// Unsigned enclosed area; 0 for degenerate polygons. Throws InvalidGeometry
// on non-finite coordinates.
double polygon_area(const Polygon8& p);
double polygon_area(std::span<const Point> points);

// Tightest axis-aligned box containing all vertices. Throws InvalidGeometry
// when the extent is zero in either dimension or a coordinate is non-finite.
BBox polygon_to_bbox(const Polygon8& p);

// Intersection area over union area; 0 when disjoint.
double bbox_iou(const BBox& a, const BBox& b);

// True when consecutive edge cross products never change sign.
bool is_convex(const Polygon8& p);

// Exact IoU via Sutherland-Hodgman clipping. Empty when either polygon is
// not convex. Throws InvalidGeometry when both polygons are degenerate.
std::optional<double> convex_polygon_iou(const Polygon8& a, const Polygon8& b);

// IoU of the even-odd filled regions, estimated by scanline sampling over
// the joint bounding box with `resolution` samples per unit pixel along each
// axis. Throws InvalidGeometry when both polygons are degenerate or
// resolution < 1.
double rasterized_polygon_iou(const Polygon8& a, const Polygon8& b,
                              int resolution = kDefaultIouResolution);

// Dispatches to the exact convex path when possible, otherwise rasterizes.
double polygon_iou(const Polygon8& a, const Polygon8& b,
                   int resolution = kDefaultIouResolution);

// Even-odd point-in-polygon test used by the rasterizer.
bool point_in_polygon(std::span<const Point> polygon, const Point& p);

// Checks a raw annotation point list against the frame. Returns the empty
// list when the points form a valid clockwise 8-point outline; anomalies are
// data, not failures.
std::vector<PolygonAnomaly> validate_polygon(std::span<const Point> points,
                                             double frame_width,
                                             double frame_height);

// Anomalies that make a polygon unusable for matching (as opposed to merely
// suspicious): wrong vertex count, zero area, or non-finite coordinates.
bool excludes_from_matching(PolygonAnomaly a);

}  // namespace flockeval

#endif  // FLOCKEVAL_GEOMETRY_HPP_
