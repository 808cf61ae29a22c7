#ifndef PW_GEOMETRY_HPP
#define PW_GEOMETRY_HPP

#include <algorithm>
#include <cmath>

namespace pw {

struct Vec2 {
    float x = 0.f;
    float y = 0.f;

    Vec2() = default;
    Vec2(float x_, float y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(float s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    float norm() const { return std::hypot(x, y); }
};

inline float dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

// Angle between two vectors in [0, pi]. Zero vectors give 0.
inline float angle_between(const Vec2& a, const Vec2& b) {
    const float na = a.norm();
    const float nb = b.norm();
    if (na <= 0.f || nb <= 0.f) return 0.f;
    float c = dot(a, b) / (na * nb);
    c = std::clamp(c, -1.f, 1.f);
    return std::acos(c);
}

// Distance from point p to segment [a, b].
inline float point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const float len2 = dot(ab, ab);
    if (len2 <= 0.f) return (p - a).norm();
    float t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.f, 1.f);
    return (p - (a + ab * t)).norm();
}

// Axis-aligned rectangle, (x, y) top-left, in pixel units.
struct RectF {
    float x = 0.f;
    float y = 0.f;
    float w = 0.f;
    float h = 0.f;

    float area() const { return w > 0.f && h > 0.f ? w * h : 0.f; }
    float x2() const { return x + w; }
    float y2() const { return y + h; }

    bool contains(const Vec2& p) const {
        return p.x >= x && p.x <= x2() && p.y >= y && p.y <= y2();
    }
};

inline RectF intersect(const RectF& a, const RectF& b) {
    const float x1 = std::max(a.x, b.x);
    const float y1 = std::max(a.y, b.y);
    const float x2 = std::min(a.x2(), b.x2());
    const float y2 = std::min(a.y2(), b.y2());
    if (x2 <= x1 || y2 <= y1) return {};
    return {x1, y1, x2 - x1, y2 - y1};
}

inline float iou(const RectF& a, const RectF& b) {
    const float inter = intersect(a, b).area();
    const float uni = a.area() + b.area() - inter;
    return uni > 0.f ? inter / uni : 0.f;
}

}  // namespace pw

#endif
