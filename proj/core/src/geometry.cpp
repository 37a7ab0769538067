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

#include <algorithm>
#include <cmath>
#include <limits>

#include "flockeval/errors.hpp"

namespace flockeval {

namespace {

bool all_finite(std::span<const Point> points) {
  for (const Point& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  }
  return true;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Scanline crossings of the polygon boundary with the horizontal line at y,
// using the half-open rule so vertices are counted exactly once.
void scanline_crossings(std::span<const Point> poly, double y,
                        std::vector<double>* xs) {
  xs->clear();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    if ((p.y <= y && y < q.y) || (q.y <= y && y < p.y)) {
      xs->push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
  }
  std::sort(xs->begin(), xs->end());
}

// Number of sample centers x0 + (i + 0.5) * step, 0 <= i < nx, inside [a, b).
long samples_in_interval(double a, double b, double x0, double step, long nx) {
  const double lo = (a - x0) / step - 0.5;
  const double hi = (b - x0) / step - 0.5;
  long i_lo = static_cast<long>(std::ceil(lo));
  long i_hi = static_cast<long>(std::ceil(hi)) - 1;
  i_lo = std::max(i_lo, 0L);
  i_hi = std::min(i_hi, nx - 1);
  return i_hi >= i_lo ? i_hi - i_lo + 1 : 0;
}

struct RowCounts {
  long in_a = 0;
  long in_b = 0;
  long in_both = 0;
};

RowCounts count_row(const std::vector<double>& xa, const std::vector<double>& xb,
                    double x0, double step, long nx) {
  RowCounts counts;
  for (std::size_t k = 0; k + 1 < xa.size(); k += 2) {
    counts.in_a += samples_in_interval(xa[k], xa[k + 1], x0, step, nx);
  }
  for (std::size_t k = 0; k + 1 < xb.size(); k += 2) {
    counts.in_b += samples_in_interval(xb[k], xb[k + 1], x0, step, nx);
  }
  // Pairwise interval intersections; both lists are tiny (<= 4 intervals).
  for (std::size_t k = 0; k + 1 < xa.size(); k += 2) {
    for (std::size_t m = 0; m + 1 < xb.size(); m += 2) {
      const double lo = std::max(xa[k], xb[m]);
      const double hi = std::min(xa[k + 1], xb[m + 1]);
      if (lo < hi) counts.in_both += samples_in_interval(lo, hi, x0, step, nx);
    }
  }
  return counts;
}

BBox hull_box(std::span<const Point> points) {
  BBox box{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  for (const Point& p : points) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

// Sutherland-Hodgman: clip `subject` against one directed edge (a -> b) of a
// convex polygon whose interior lies on the `side` sign of the edge.
std::vector<Point> clip_edge(const std::vector<Point>& subject, const Point& a,
                             const Point& b, double side) {
  std::vector<Point> out;
  out.reserve(subject.size() + 2);
  const std::size_t n = subject.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& cur = subject[i];
    const Point& nxt = subject[(i + 1) % n];
    const double dc = side * cross(a, b, cur);
    const double dn = side * cross(a, b, nxt);
    const bool cur_in = dc >= 0.0;
    const bool nxt_in = dn >= 0.0;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = dc / (dc - dn);
      out.push_back(Point{cur.x + t * (nxt.x - cur.x),
                          cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(PolygonAnomaly a) {
  switch (a) {
    case PolygonAnomaly::WrongPointCount:
      return "WrongPointCount";
    case PolygonAnomaly::OutOfFrame:
      return "OutOfFrame";
    case PolygonAnomaly::CounterClockwise:
      return "CounterClockwise";
    case PolygonAnomaly::ZeroArea:
      return "ZeroArea";
    case PolygonAnomaly::NonFinite:
      return "NonFinite";
  }
  return "Unknown";
}

double signed_shoelace_sum(std::span<const Point> points) {
  const std::size_t n = points.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = points[i];
    const Point& q = points[(i + 1) % n];
    sum += p.x * q.y - q.x * p.y;
  }
  return sum;
}

double polygon_area(std::span<const Point> points) {
  if (!all_finite(points)) {
    throw InvalidGeometry("polygon has non-finite coordinates");
  }
  return std::abs(signed_shoelace_sum(points)) / 2.0;
}

double polygon_area(const Polygon8& p) {
  return polygon_area(std::span<const Point>(p.points));
}

BBox polygon_to_bbox(const Polygon8& p) {
  if (!all_finite(p.points)) {
    throw InvalidGeometry("polygon has non-finite coordinates");
  }
  const BBox box = hull_box(p.points);
  if (!box.valid()) {
    throw InvalidGeometry("polygon extent is zero in at least one dimension");
  }
  return box;
}

double bbox_iou(const BBox& a, const BBox& b) {
  const double iw =
      std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih =
      std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool is_convex(const Polygon8& p) {
  if (!all_finite(p.points)) return false;
  int sign = 0;
  const auto& pts = p.points;
  for (int i = 0; i < Polygon8::kVertexCount; ++i) {
    const double c = cross(pts[i], pts[(i + 1) % 8], pts[(i + 2) % 8]);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return sign != 0;
}

std::optional<double> convex_polygon_iou(const Polygon8& a, const Polygon8& b) {
  const double area_a = polygon_area(a);
  const double area_b = polygon_area(b);
  if (area_a == 0.0 && area_b == 0.0) {
    throw InvalidGeometry("both polygons are degenerate");
  }
  if (!is_convex(a) || !is_convex(b)) return std::nullopt;
  if (area_a == 0.0 || area_b == 0.0) return 0.0;

  std::vector<Point> subject(a.points.begin(), a.points.end());
  const double side = signed_shoelace_sum(b.points) >= 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < Polygon8::kVertexCount && !subject.empty(); ++i) {
    const Point& e0 = b.points[i];
    const Point& e1 = b.points[(i + 1) % 8];
    if (e0 == e1) continue;
    subject = clip_edge(subject, e0, e1, side);
  }
  double inter = 0.0;
  if (subject.size() >= 3) {
    inter = std::abs(signed_shoelace_sum(subject)) / 2.0;
  }
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double rasterized_polygon_iou(const Polygon8& a, const Polygon8& b,
                              int resolution) {
  if (resolution < 1) {
    throw InvalidGeometry("supersampling resolution must be >= 1");
  }
  const double area_a = polygon_area(a);
  const double area_b = polygon_area(b);
  if (area_a == 0.0 && area_b == 0.0) {
    throw InvalidGeometry("both polygons are degenerate");
  }
  if (area_a == 0.0 || area_b == 0.0) return 0.0;

  const BBox box_a = hull_box(a.points);
  const BBox box_b = hull_box(b.points);
  if (box_a.x_max <= box_b.x_min || box_b.x_max <= box_a.x_min ||
      box_a.y_max <= box_b.y_min || box_b.y_max <= box_a.y_min) {
    return 0.0;  // disjoint hulls, no need to sample
  }

  const double x0 = std::min(box_a.x_min, box_b.x_min);
  const double y0 = std::min(box_a.y_min, box_b.y_min);
  const double x1 = std::max(box_a.x_max, box_b.x_max);
  const double y1 = std::max(box_a.y_max, box_b.y_max);
  const double step = 1.0 / resolution;
  const long nx = std::max(1L, static_cast<long>(std::ceil((x1 - x0) / step)));
  const long ny = std::max(1L, static_cast<long>(std::ceil((y1 - y0) / step)));

  long in_a = 0, in_b = 0, in_both = 0;
  std::vector<double> xa, xb;
  for (long j = 0; j < ny; ++j) {
    const double y = y0 + (j + 0.5) * step;
    scanline_crossings(a.points, y, &xa);
    scanline_crossings(b.points, y, &xb);
    if (xa.empty() && xb.empty()) continue;
    const RowCounts counts = count_row(xa, xb, x0, step, nx);
    in_a += counts.in_a;
    in_b += counts.in_b;
    in_both += counts.in_both;
  }
  const long uni = in_a + in_b - in_both;
  if (uni <= 0) return 0.0;
  return static_cast<double>(in_both) / static_cast<double>(uni);
}

double polygon_iou(const Polygon8& a, const Polygon8& b, int resolution) {
  if (const auto exact = convex_polygon_iou(a, b)) return *exact;
  return rasterized_polygon_iou(a, b, resolution);
}

bool point_in_polygon(std::span<const Point> polygon, const Point& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    if ((a.y <= p.y && p.y < b.y) || (b.y <= p.y && p.y < a.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

std::vector<PolygonAnomaly> validate_polygon(std::span<const Point> points,
                                             double frame_width,
                                             double frame_height) {
  std::vector<PolygonAnomaly> anomalies;
  if (points.size() != Polygon8::kVertexCount) {
    anomalies.push_back(PolygonAnomaly::WrongPointCount);
  }
  const bool finite = all_finite(points);
  bool out_of_frame = false;
  if (finite) {
    for (const Point& p : points) {
      if (p.x < 0.0 || p.x > frame_width || p.y < 0.0 || p.y > frame_height) {
        out_of_frame = true;
        break;
      }
    }
  }
  if (out_of_frame) anomalies.push_back(PolygonAnomaly::OutOfFrame);
  if (finite && points.size() >= 3) {
    const double sum = signed_shoelace_sum(points);
    if (sum < 0.0) anomalies.push_back(PolygonAnomaly::CounterClockwise);
    if (sum == 0.0) anomalies.push_back(PolygonAnomaly::ZeroArea);
  }
  if (!finite) anomalies.push_back(PolygonAnomaly::NonFinite);
  return anomalies;
}

bool excludes_from_matching(PolygonAnomaly a) {
  return a == PolygonAnomaly::WrongPointCount ||
         a == PolygonAnomaly::ZeroArea || a == PolygonAnomaly::NonFinite;
}

}  // namespace flockeval
