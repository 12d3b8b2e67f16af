#include "mfp/geometry.hpp"

namespace mfp {

double normalize_yaw(double yaw) {
  if (!std::isfinite(yaw)) {
    throw std::invalid_argument("normalize_yaw: non-finite input");
  }
  const double two_pi = 2.0 * M_PI;
  double r = std::fmod(yaw, two_pi);
  if (r <= -M_PI) r += two_pi;
  if (r > M_PI) r -= two_pi;
  // fmod can land exactly on -pi; the convention is (-pi, pi].
  if (r == -M_PI) r = M_PI;
  return r;
}

double distance(double x1, double y1, double x2, double y2) {
  return std::hypot(x2 - x1, y2 - y1);
}

double distance(const Pose2& a, const Pose2& b) {
  return distance(a.x, a.y, b.x, b.y);
}

namespace {
int orientation(double ax, double ay, double bx, double by, double cx,
                double cy) {
  const double v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment(double ax, double ay, double bx, double by, double px,
                double py) {
  return px >= std::min(ax, bx) - 1e-12 && px <= std::max(ax, bx) + 1e-12 &&
         py >= std::min(ay, by) - 1e-12 && py <= std::max(ay, by) + 1e-12;
}
}  // namespace

bool segments_intersect(double ax1, double ay1, double ax2, double ay2,
                        double bx1, double by1, double bx2, double by2) {
  const int o1 = orientation(ax1, ay1, ax2, ay2, bx1, by1);
  const int o2 = orientation(ax1, ay1, ax2, ay2, bx2, by2);
  const int o3 = orientation(bx1, by1, bx2, by2, ax1, ay1);
  const int o4 = orientation(bx1, by1, bx2, by2, ax2, ay2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(ax1, ay1, ax2, ay2, bx1, by1)) return true;
  if (o2 == 0 && on_segment(ax1, ay1, ax2, ay2, bx2, by2)) return true;
  if (o3 == 0 && on_segment(bx1, by1, bx2, by2, ax1, ay1)) return true;
  if (o4 == 0 && on_segment(bx1, by1, bx2, by2, ax2, ay2)) return true;
  return false;
}

bool segment_crosses_rect_boundary(double x1, double y1, double x2, double y2,
                                   const Rect& r) {
  return segments_intersect(x1, y1, x2, y2, r.xmin, r.ymin, r.xmax, r.ymin) ||
         segments_intersect(x1, y1, x2, y2, r.xmax, r.ymin, r.xmax, r.ymax) ||
         segments_intersect(x1, y1, x2, y2, r.xmax, r.ymax, r.xmin, r.ymax) ||
         segments_intersect(x1, y1, x2, y2, r.xmin, r.ymax, r.xmin, r.ymin);
}

}  // namespace mfp
