#pragma once

#include <Eigen/Core>

namespace toposd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

/// Value and gradient of a scalar function at one point.
struct PointEval {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
};

inline double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace toposd
