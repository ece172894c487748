#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace crowdflow {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Point2 = Vector2<Scalar>;

using Vec2 = Vector2<double>;

/// Intersections smaller than this (scaled units) are treated as empty.
inline constexpr double kDegenerateArea = 1e-14;
/// Relative band around the sector boundary treated as outside.
inline constexpr double kSectorTieTolerance = 1e-9;

template <typename Scalar>
inline Scalar cross(const Vector2<Scalar>& a, const Vector2<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Twice the signed area of the closed vertex chain (positive when counterclockwise).
template <typename Scalar>
Scalar signed_area2(std::span<const Point2<Scalar>> v) {
  Scalar acc = 0;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) acc += cross(v[j], v[i]);
  return acc;
}

/// Axis-aligned bounding box.
template <typename Scalar>
struct Box2 {
  Point2<Scalar> min;
  Point2<Scalar> max;

  bool overlaps(const Box2& o) const {
    return min.x() <= o.max.x() && o.min.x() <= max.x() && min.y() <= o.max.y() &&
           o.min.y() <= max.y();
  }
  Box2 inflated(Scalar r) const {
    return {min.array() - r, max.array() + r};
  }
};

/// Convex planar polygon stored counterclockwise.
///
/// Clockwise input is reversed on construction. Non-convex input is rejected;
/// collinear (zero area) input is accepted and reported by `is_degenerate`.
template <typename Scalar = double>
class Polygon2 {
 public:
  using Point = Point2<Scalar>;

  Polygon2() = default;

  Polygon2(std::initializer_list<Point> pts) : Polygon2(std::vector<Point>(pts)) {}

  explicit Polygon2(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw std::invalid_argument("Polygon2: fewer than 3 vertices");
    for (const auto& p : vertices_)
      if (!p.allFinite()) throw std::invalid_argument("Polygon2: non-finite vertex");
    if (signed_area2<Scalar>(vertices_) < 0) std::reverse(vertices_.begin(), vertices_.end());
    if (!convex_ccw(vertices_)) throw std::invalid_argument("Polygon2: polygon is not convex");
  }

  /// Wraps vertices already known to be convex and counterclockwise (clip output).
  static Polygon2 from_ccw_unchecked(std::vector<Point> vertices) {
    Polygon2 p;
    p.vertices_ = std::move(vertices);
    return p;
  }

  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const Point& operator[](std::size_t i) const { return vertices_[i]; }
  std::span<const Point> vertices() const { return vertices_; }

  Box2<Scalar> bounds() const {
    Box2<Scalar> b{vertices_.front(), vertices_.front()};
    for (const auto& p : vertices_) {
      b.min = b.min.cwiseMin(p);
      b.max = b.max.cwiseMax(p);
    }
    return b;
  }

  Point centroid() const {
    const std::size_t n = vertices_.size();
    Scalar a2 = 0;
    Point c = Point::Zero();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Scalar w = cross(vertices_[j], vertices_[i]);
      a2 += w;
      c += w * (vertices_[j] + vertices_[i]);
    }
    if (a2 == Scalar(0)) {
      Point m = Point::Zero();
      for (const auto& p : vertices_) m += p;
      return m / Scalar(n);
    }
    return c / (Scalar(3) * a2);
  }

 private:
  static bool convex_ccw(const std::vector<Point>& v) {
    const std::size_t n = v.size();
    Scalar scale = 0;
    for (const auto& p : v) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const Scalar tol = Scalar(64) * std::numeric_limits<Scalar>::epsilon() * (scale * scale + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = v[i];
      const Point& b = v[(i + 1) % n];
      const Point& c = v[(i + 2) % n];
      if (cross<Scalar>(b - a, c - b) < -tol) return false;
    }
    return true;
  }

  std::vector<Point> vertices_;
};

template <typename Scalar>
Scalar area(const Polygon2<Scalar>& p) {
  if (p.empty()) return Scalar(0);
  return std::abs(signed_area2<Scalar>(p.vertices())) / Scalar(2);
}

/// True when the polygon encloses no area (collinear vertices or empty).
template <typename Scalar>
bool is_degenerate(const Polygon2<Scalar>& p, Scalar tol = Scalar(kDegenerateArea)) {
  return area(p) <= tol;
}

template <typename Scalar>
Polygon2<Scalar> translate(const Polygon2<Scalar>& p, const Vector2<Scalar>& v) {
  std::vector<Point2<Scalar>> out(p.vertices().begin(), p.vertices().end());
  for (auto& q : out) q += v;
  return Polygon2<Scalar>::from_ccw_unchecked(std::move(out));
}

namespace detail {

/// Clips the convex CCW chain `in` against the half-plane left of edge a->b.
/// Output is appended to `out` (cleared first).
template <typename Scalar, typename Buffer>
void clip_half_plane(const Buffer& in, std::size_t n_in, const Point2<Scalar>& a,
                     const Point2<Scalar>& b, Buffer& out, std::size_t& n_out) {
  n_out = 0;
  if (n_in == 0) return;
  const Vector2<Scalar> e = b - a;
  Point2<Scalar> prev = in[n_in - 1];
  Scalar d_prev = cross<Scalar>(e, prev - a);
  for (std::size_t i = 0; i < n_in; ++i) {
    const Point2<Scalar>& cur = in[i];
    const Scalar d_cur = cross<Scalar>(e, cur - a);
    if (d_cur >= 0) {
      if (d_prev < 0) out[n_out++] = prev + (cur - prev) * (d_prev / (d_prev - d_cur));
      out[n_out++] = cur;
    } else if (d_prev >= 0) {
      out[n_out++] = prev + (cur - prev) * (d_prev / (d_prev - d_cur));
    }
    prev = cur;
    d_prev = d_cur;
  }
}

/// Successive half-plane clipping of `subject` by the edges of `clip`, both convex CCW.
/// Returns the vertex count written into `result`; cost is O(|subject| * |clip|),
/// linear in total vertex count for bounded-degree inputs such as mesh triangles.
template <typename Scalar, typename Buffer>
std::size_t clip_convex(std::span<const Point2<Scalar>> subject, std::span<const Point2<Scalar>> clip,
                        Buffer& a, Buffer& b) {
  std::size_t na = subject.size();
  for (std::size_t i = 0; i < na; ++i) a[i] = subject[i];
  std::size_t nb = 0;
  const std::size_t m = clip.size();
  for (std::size_t i = 0, j = m - 1; i < m && na > 0; j = i++) {
    clip_half_plane<Scalar>(a, na, clip[j], clip[i], b, nb);
    std::swap(a, b);
    std::swap(na, nb);
  }
  return na;
}

template <typename Scalar, typename Buffer>
Scalar chain_area(const Buffer& v, std::size_t n) {
  if (n < 3) return Scalar(0);
  Scalar acc = 0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) acc += cross<Scalar>(v[j], v[i]);
  return acc / Scalar(2);
}

}  // namespace detail

/// Intersection of two convex polygons; empty when the overlap area is below kDegenerateArea.
template <typename Scalar>
Polygon2<Scalar> convex_intersection(const Polygon2<Scalar>& p, const Polygon2<Scalar>& q) {
  if (p.empty() || q.empty()) return {};
  if (!p.bounds().overlaps(q.bounds())) return {};
  const std::size_t cap = 2 * (p.size() + q.size()) + 4;
  std::vector<Point2<Scalar>> a(cap), b(cap);
  // Clip the polygon with more vertices by the one with fewer edges.
  const bool p_small = p.size() <= q.size();
  const auto& subject = p_small ? q : p;
  const auto& clipper = p_small ? p : q;
  const std::size_t n = detail::clip_convex<Scalar>(subject.vertices(), clipper.vertices(), a, b);
  if (detail::chain_area<Scalar>(a, n) < Scalar(kDegenerateArea)) return {};
  a.resize(n);
  return Polygon2<Scalar>::from_ccw_unchecked(std::move(a));
}

/// Area of the intersection of two triangles. Allocation free; used on the transport hot path.
template <typename Scalar>
Scalar triangle_overlap_area(std::span<const Point2<Scalar>, 3> p, std::span<const Point2<Scalar>, 3> q) {
  std::array<Point2<Scalar>, 9> a, b;
  const std::size_t n = detail::clip_convex<Scalar>(std::span<const Point2<Scalar>>(p),
                                                    std::span<const Point2<Scalar>>(q), a, b);
  const Scalar s = detail::chain_area<Scalar>(a, n);
  return s < Scalar(kDegenerateArea) ? Scalar(0) : s;
}

/// Area of the part of a triangle with x >= x0.
template <typename Scalar>
Scalar area_right_of(std::span<const Point2<Scalar>, 3> tri, Scalar x0) {
  std::array<Point2<Scalar>, 9> out;
  std::array<Point2<Scalar>, 9> in{tri[0], tri[1], tri[2]};
  std::size_t n = 0;
  // Half-plane x >= x0 lies left of the upward edge (x0, 0) -> (x0, 1) only when pointing down.
  detail::clip_half_plane<Scalar>(in, 3, Point2<Scalar>(x0, Scalar(1)), Point2<Scalar>(x0, Scalar(0)),
                                  out, n);
  const Scalar s = detail::chain_area<Scalar>(out, n);
  return s < Scalar(kDegenerateArea) ? Scalar(0) : s;
}

/// Frontal circular sector: points at distance < radius whose direction from the
/// center makes an angle < half_angle with `heading`.
template <typename Scalar = double>
struct Sector {
  Point2<Scalar> center;
  Vector2<Scalar> heading;  // unit
  Scalar radius;
  Scalar half_angle;

  Sector(Point2<Scalar> c, Vector2<Scalar> h, Scalar r, Scalar alpha)
      : center(std::move(c)), heading(std::move(h)), radius(r), half_angle(alpha) {
    if (!(r > 0)) throw std::invalid_argument("Sector: radius must be positive");
    if (!(alpha > 0 && alpha < Scalar(EIGEN_PI) / 2))
      throw std::invalid_argument("Sector: half angle must lie in (0, pi/2)");
    const Scalar n = heading.norm();
    if (!(n > 0)) throw std::invalid_argument("Sector: heading must be nonzero");
    heading /= n;
  }

  bool contains(const Point2<Scalar>& p) const {
    const Vector2<Scalar> d = p - center;
    const Scalar r = d.norm();
    // Points on the sector boundary (up to a relative tolerance) are outside, so
    // that lattice-aligned ties do not depend on rounding.
    const Scalar tol = Scalar(kSectorTieTolerance);
    if (r == Scalar(0) || !(r < radius * (1 - tol))) return false;
    return heading.dot(d) > r * (std::cos(half_angle) + tol);
  }
};

}  // namespace crowdflow
