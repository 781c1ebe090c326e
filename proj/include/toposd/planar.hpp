#pragma once

#include "toposd/types.hpp"

#include <algorithm>
#include <cmath>

namespace toposd {

inline double point_segment_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Signed area orientation test: positive when c lies left of a->b.
inline double orient(const Vec2 &a, const Vec2 &b, const Vec2 &c) { return cross2(b - a, c - a); }

inline bool point_in_triangle(const Vec2 &p, const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
    const double d1 = orient(a, b, p), d2 = orient(b, c, p), d3 = orient(c, a, p);
    const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

/// Euclidean distance from p to the closed triangle abc (zero inside).
inline double point_triangle_distance(const Vec2 &p, const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
    if (point_in_triangle(p, a, b, c))
        return 0.0;
    return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                     point_segment_distance(p, c, a)});
}

} // namespace toposd
