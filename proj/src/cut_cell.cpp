#include "toposd/cut_cell.hpp"

#include "toposd/error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace toposd {
namespace {

    const std::vector<Leaf> no_leaves;

    // area of a barycentric sub-triangle relative to its parent
    double relative_area(const std::array<Vec3, 3> &c)
    {
        const Vec3 e1 = c[1] - c[0], e2 = c[2] - c[0];
        return std::abs(e1[1] * e2[2] - e1[2] * e2[1]);
    }

    struct Splitter {
        const Mesh &mesh;
        int t;
        const TriangleClassifier &classify;
        const PointIndicator &indicator;
        std::vector<Leaf> &out;

        Vec2 phys(const Vec3 &b) const { return mesh.point(t, b); }

        void run(const std::array<Vec3, 3> &c, int level)
        {
            if (level == 0) {
                out.push_back({c, indicator(phys((c[0] + c[1] + c[2]) / 3.0))});
                return;
            }
            const Vec3 m01 = 0.5 * (c[0] + c[1]), m12 = 0.5 * (c[1] + c[2]), m20 = 0.5 * (c[2] + c[0]);
            const std::array<std::array<Vec3, 3>, 4> kids = {{
                {c[0], m01, m20},
                {m01, c[1], m12},
                {m20, m12, c[2]},
                {m01, m12, m20},
            }};
            for (const auto &k : kids) {
                const Cover s = classify(phys(k[0]), phys(k[1]), phys(k[2]));
                if (s == Cover::cut)
                    run(k, level - 1);
                else
                    out.push_back({k, s == Cover::in});
            }
        }
    };

} // namespace

CutCells::CutCells(const Mesh &mesh, const TriangleClassifier &classify, const PointIndicator &indicator, int depth)
    : depth_(depth)
{
    if (depth < 0 || depth > 6)
        throw Error(ErrorKind::Validation, "cut-cell depth must lie in [0, 6]");
    const int nt = static_cast<int>(mesh.num_triangles());
    state_.resize(nt);
    fraction_.resize(nt);
    cut_index_.assign(nt, -1);
    for (int t = 0; t < nt; ++t) {
        const auto &tri = mesh.triangle(t);
        const Cover s = classify(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
        state_[t] = s;
        if (s != Cover::cut) {
            fraction_[t] = s == Cover::in ? 1.0 : 0.0;
            continue;
        }
        std::vector<Leaf> leaves;
        const std::array<Vec3, 3> root = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
        Splitter{mesh, t, classify, indicator, leaves}.run(root, depth);
        double frac = 0.0;
        for (const auto &l : leaves)
            if (l.inside)
                frac += relative_area(l.corners);
        fraction_[t] = frac;
        cut_index_[t] = static_cast<int>(leaves_.size());
        leaves_.push_back(std::move(leaves));
    }
}

CutCells CutCells::from_region(const Mesh &mesh, const Region &region, int depth)
{
    return CutCells(
        mesh, [&](const Vec2 &a, const Vec2 &b, const Vec2 &c) { return region.classify(a, b, c); },
        [&](const Vec2 &x) { return region.contains(x); }, depth);
}

CutCells CutCells::from_shape(const Mesh &mesh, const Shape &shape, int depth)
{
    return CutCells(
        mesh, [&](const Vec2 &a, const Vec2 &b, const Vec2 &c) { return classify(shape, a, b, c); },
        [&](const Vec2 &x) { return contains(shape, x); }, depth);
}

CutCells CutCells::from_indicator(const Mesh &mesh, const PointIndicator &indicator, int depth)
{
    auto sampled = [&](const Vec2 &a, const Vec2 &b, const Vec2 &c) {
        const Vec2 pts[] = {a, b, c, (a + b + c) / 3.0, 0.25 * (3 * a + b), 0.5 * (a + b), 0.25 * (a + 3 * b),
                            0.25 * (3 * b + c), 0.5 * (b + c), 0.25 * (b + 3 * c), 0.25 * (3 * c + a),
                            0.5 * (c + a), 0.25 * (c + 3 * a)};
        const bool first = indicator(pts[0]);
        for (const auto &p : pts)
            if (indicator(p) != first)
                return Cover::cut;
        return first ? Cover::in : Cover::out;
    };
    return CutCells(mesh, sampled, indicator, depth);
}

CutCells CutCells::all_inside(const Mesh &mesh)
{
    return CutCells(
        mesh, [](const Vec2 &, const Vec2 &, const Vec2 &) { return Cover::in; }, [](const Vec2 &) { return true; },
        0);
}

const std::vector<Leaf> &CutCells::leaves(int t) const
{
    return cut_index_[t] < 0 ? no_leaves : leaves_[cut_index_[t]];
}

bool CutCells::inside_at(int t, const Vec3 &bary) const
{
    if (state_[t] != Cover::cut)
        return state_[t] == Cover::in;
    for (const auto &leaf : leaves(t)) {
        // barycentric coordinates of bary relative to the leaf, using the last two components
        const auto &c = leaf.corners;
        Eigen::Matrix2d m;
        m << c[1][1] - c[0][1], c[2][1] - c[0][1], c[1][2] - c[0][2], c[2][2] - c[0][2];
        const Eigen::Vector2d rhs(bary[1] - c[0][1], bary[2] - c[0][2]);
        const Eigen::Vector2d st = m.partialPivLu().solve(rhs);
        if (st.minCoeff() >= -1e-12 && st.sum() <= 1.0 + 1e-12)
            return leaf.inside;
    }
    return false;
}

double inside_area(const Mesh &mesh, const CutCells &cells)
{
    double a = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
        a += cells.inside_fraction(t) * mesh.area(t);
    return a;
}

} // namespace toposd
