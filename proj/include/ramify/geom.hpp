#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace ramify {

struct Vec2 {
  double x = 0, y = 0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

using Segment = std::array<Vec2, 2>;

inline double point_segment_dist(Vec2 p, const Segment& s) {
  Vec2 d = s[1] - s[0];
  double len2 = d.norm2();
  if (len2 == 0) return dist(p, s[0]);
  double t = std::clamp((p - s[0]).dot(d) / len2, 0.0, 1.0);
  return dist(p, s[0] + d * t);
}

inline bool segments_intersect(const Segment& a, const Segment& b) {
  auto cross = [](Vec2 u, Vec2 v) { return u.x * v.y - u.y * v.x; };
  Vec2 r = a[1] - a[0], s = b[1] - b[0];
  double rxs = cross(r, s);
  Vec2 qp = b[0] - a[0];
  if (rxs == 0) {
    if (cross(qp, r) != 0) return false;  // parallel, non-collinear
    double t0 = qp.dot(r) / r.norm2();
    double t1 = t0 + s.dot(r) / r.norm2();
    if (t0 > t1) std::swap(t0, t1);
    return t0 <= 1 && t1 >= 0;
  }
  double t = cross(qp, s) / rxs;
  double u = cross(qp, r) / rxs;
  return t >= 0 && t <= 1 && u >= 0 && u <= 1;
}

inline double segment_segment_dist(const Segment& a, const Segment& b) {
  if (segments_intersect(a, b)) return 0.0;
  return std::min(std::min(point_segment_dist(a[0], b), point_segment_dist(a[1], b)),
                  std::min(point_segment_dist(b[0], a), point_segment_dist(b[1], a)));
}

// Max pairwise distance of a point set (exact; sets here are small or hulled).
inline double max_pairwise_dist(const std::vector<Vec2>& pts) {
  double best = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, dist(pts[i], pts[j]));
  return best;
}

// Andrew monotone chain; returns hull vertices (no duplicates).
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

// Diameter of a possibly large point cloud via hull + pairwise over hull points.
double cloud_diameter(const std::vector<Vec2>& pts);

struct LinFit {
  double slope = 0, intercept = 0, rms = 0;  // residual root-mean-square
};

// Least squares y ~ slope*x + intercept.
LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace ramify
