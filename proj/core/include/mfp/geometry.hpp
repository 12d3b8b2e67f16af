#pragma once

#include <cmath>
#include <stdexcept>

namespace mfp {

/// Planar pose in centimeters and radians. Yaw is kept in (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  bool operator==(const Pose2&) const = default;
};

/// Axis-aligned rectangle, min/max corners in cm.
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  bool operator==(const Rect&) const = default;

  bool contains(double x, double y) const {
    return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
  }
  double cx() const { return 0.5 * (xmin + xmax); }
  double cy() const { return 0.5 * (ymin + ymax); }
  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Rect shrunk(double margin) const {
    return Rect{xmin + margin, ymin + margin, xmax - margin, ymax - margin};
  }
  Rect translated(double dx, double dy) const {
    return Rect{xmin + dx, ymin + dy, xmax + dx, ymax + dy};
  }
  bool empty() const { return xmin >= xmax || ymin >= ymax; }
};

/// Wraps an angle into (-pi, pi]. Throws on non-finite input.
double normalize_yaw(double yaw);

double distance(double x1, double y1, double x2, double y2);
double distance(const Pose2& a, const Pose2& b);

/// True if segments (a1,a2) and (b1,b2) intersect (inclusive of endpoints).
bool segments_intersect(double ax1, double ay1, double ax2, double ay2,
                        double bx1, double by1, double bx2, double by2);

/// True if the segment crosses any of the four edges of the rectangle.
bool segment_crosses_rect_boundary(double x1, double y1, double x2, double y2,
                                   const Rect& r);

}  // namespace mfp
