#pragma once

#include "toposd/geometry.hpp"
#include "toposd/mesh.hpp"
#include "toposd/quadrature.hpp"

#include <array>
#include <functional>
#include <vector>

namespace toposd {

/// Sub-triangle of a cut element, corners in barycentric coordinates of the parent.
struct Leaf {
    std::array<Vec3, 3> corners;
    bool inside = false;
};

using TriangleClassifier = std::function<Cover(const Vec2 &, const Vec2 &, const Vec2 &)>;
using PointIndicator = std::function<bool(const Vec2 &)>;

/// Per-triangle description of a set on a mesh: uncut triangles are wholly
/// in or out, cut triangles carry a list of classified leaves obtained by
/// `depth` levels of adaptive quadrisection.
class CutCells {
public:
    CutCells(const Mesh &mesh, const TriangleClassifier &classify, const PointIndicator &indicator, int depth);

    static CutCells from_region(const Mesh &mesh, const Region &region, int depth);
    /// Uses vertex, edge and centroid samples to detect cut triangles.
    static CutCells from_indicator(const Mesh &mesh, const PointIndicator &indicator, int depth);
    static CutCells from_shape(const Mesh &mesh, const Shape &shape, int depth);
    /// Every triangle uncut and inside.
    static CutCells all_inside(const Mesh &mesh);

    int depth() const { return depth_; }
    Cover state(int t) const { return state_[t]; }
    const std::vector<Leaf> &leaves(int t) const;
    double inside_fraction(int t) const { return fraction_[t]; }
    /// Membership of a point given in barycentric coordinates of triangle t.
    bool inside_at(int t, const Vec3 &bary) const;
    std::size_t num_cut() const { return leaves_.size(); }

private:
    int depth_ = 0;
    std::vector<Cover> state_;
    std::vector<double> fraction_;
    std::vector<int> cut_index_;
    std::vector<std::vector<Leaf>> leaves_;
};

/// Visits quadrature points covering triangle t. Weights are physical (scaled by
/// the element area). On cut triangles the rule is mapped onto every leaf.
template <class F>
void for_each_point(const Mesh &mesh, const CutCells *cells, int t, const QuadratureRule &rule, F &&f)
{
    const double scale = 2.0 * mesh.area(t);
    if (cells == nullptr || cells->state(t) != Cover::cut) {
        const bool inside = cells != nullptr && cells->state(t) == Cover::in;
        for (std::size_t q = 0; q < rule.size(); ++q)
            f(rule.points[q], rule.weights[q] * scale, inside);
        return;
    }
    for (const auto &leaf : cells->leaves(t)) {
        const auto &c = leaf.corners;
        // leaf area relative to parent
        const Vec3 e1 = c[1] - c[0], e2 = c[2] - c[0];
        const double rel = std::abs(e1[1] * e2[2] - e1[2] * e2[1]);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Vec3 &p = rule.points[q];
            const Vec3 b = p[0] * c[0] + p[1] * c[1] + p[2] * c[2];
            f(b, rule.weights[q] * scale * rel, leaf.inside);
        }
    }
}

/// Measure of the set described by the cells.
double inside_area(const Mesh &mesh, const CutCells &cells);

} // namespace toposd
