#include "toposd/cut_cell.hpp"
#include "toposd/error.hpp"
#include "toposd/mesh.hpp"
#include "toposd/planar.hpp"
#include "toposd/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace toposd;

namespace {

void expect_valid(const Mesh &m)
{
    const auto &nbr = m.neighbors();
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
        EXPECT_GT(m.area(t), 0.0);
        for (int k = 0; k < 3; ++k) {
            const int o = nbr[t][k];
            if (o < 0)
                continue;
            bool back = false;
            for (int j = 0; j < 3; ++j)
                back = back || nbr[o][j] == t;
            EXPECT_TRUE(back) << "asymmetric neighbor " << t << " " << o;
        }
    }
}

} // namespace

TEST(Quadrature, WeightsSumToHalfAndPositive)
{
    for (int d = 1; d <= 5; ++d) {
        const auto &r = triangle_rule(d);
        double s = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            s += w;
        }
        EXPECT_NEAR(s, 0.5, 1e-14);
        EXPECT_GE(r.degree, d);
    }
    EXPECT_THROW(triangle_rule(6), Error);
}

TEST(Quadrature, ExactOnMonomials)
{
    // ∫_T x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    for (int d = 1; d <= 5; ++d) {
        const auto &r = triangle_rule(d);
        for (int a = 0; a <= r.degree; ++a)
            for (int b = 0; a + b <= r.degree; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < r.size(); ++q)
                    s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b);
                EXPECT_NEAR(s, fact(a) * fact(b) / fact(a + b + 2), 1e-13) << d << " " << a << " " << b;
            }
    }
}

TEST(Quadrature, GaussLegendreIntegratesPolynomials)
{
    const auto &gl = gauss_legendre(8);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        s += gl.weights[i] * std::pow(gl.nodes[i], 14);
    EXPECT_NEAR(s, 2.0 / 15.0, 1e-14);
}

TEST(Mesh, DiskTwoRings)
{
    const Mesh m = build_unit_disk_mesh(2);
    EXPECT_EQ(m.num_vertices(), 1u + 6u + 12u);
    EXPECT_EQ(m.num_triangles(), 24u);
    expect_valid(m);
    EXPECT_THROW(build_unit_disk_mesh(1), Error);
}

TEST(Mesh, DiskDiameterAndArea)
{
    for (int n : {2, 4, 8, 16}) {
        const Mesh m = build_unit_disk_mesh(n);
        const double h = m.max_diameter();
        EXPECT_LE(h, 2.0 / n + 1e-12);
        EXPECT_NEAR(m.total_area(), std::numbers::pi, 0.5 * h * h * std::numbers::pi);
        for (std::size_t v = 0; v < m.num_vertices(); ++v)
            if (m.is_boundary(static_cast<int>(v)))
                EXPECT_NEAR(m.vertex(static_cast<int>(v)).norm(), 1.0, 1e-12);
        expect_valid(m);
    }
}

TEST(Mesh, SquareCounts)
{
    const Mesh m1 = build_unit_square_mesh(1);
    EXPECT_EQ(m1.num_triangles(), 4u);
    EXPECT_NEAR(m1.total_area(), 1.0, 1e-15);
    const Mesh m4 = build_unit_square_mesh(4);
    EXPECT_EQ(m4.num_triangles(), 64u);
    EXPECT_EQ(m4.num_vertices(), 41u);
    expect_valid(m4);
    for (std::size_t v = 0; v < m4.num_vertices(); ++v) {
        const Vec2 &x = m4.vertex(static_cast<int>(v));
        const bool on = x.x() == 0.0 || x.y() == 0.0 || x.x() == 1.0 || x.y() == 1.0;
        EXPECT_EQ(on, m4.is_boundary(static_cast<int>(v)));
    }
}

TEST(Mesh, SquareAnglesAtMostRight)
{
    const Mesh m = build_unit_square_mesh(3);
    for (const auto &t : m.triangles())
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = m.vertex(t[(k + 1) % 3]) - m.vertex(t[k]);
            const Vec2 b = m.vertex(t[(k + 2) % 3]) - m.vertex(t[k]);
            EXPECT_GE(a.dot(b), -1e-15);
        }
}

TEST(Mesh, RefineSquare)
{
    const Mesh m = build_unit_square_mesh(1);
    const Mesh r = refine_uniform(m);
    EXPECT_EQ(r.num_triangles(), 16u);
    EXPECT_NEAR(r.total_area(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(r.max_diameter(), 0.5 * m.max_diameter());
    expect_valid(r);
}

TEST(Mesh, RefineDiskProjects)
{
    const Mesh r = refine_uniform(build_unit_disk_mesh(3));
    int boundary = 0;
    for (std::size_t v = 0; v < r.num_vertices(); ++v)
        if (r.is_boundary(static_cast<int>(v))) {
            EXPECT_NEAR(r.vertex(static_cast<int>(v)).norm(), 1.0, 1e-12);
            ++boundary;
        }
    EXPECT_EQ(boundary, 36);
    expect_valid(r);
}

TEST(Mesh, LocateCentroidAndTieBreak)
{
    const Mesh m = build_unit_square_mesh(4);
    const auto loc = m.locate(m.centroid(17));
    EXPECT_EQ(loc.triangle, 17);
    EXPECT_NEAR(loc.bary[0], 1.0 / 3.0, 1e-12);
    // the edge between triangles 0 and 1 (cell 0) runs from (0.25,0) to the cell center
    const Vec2 mid = 0.5 * (Vec2(0.25, 0.0) + Vec2(0.125, 0.125));
    EXPECT_EQ(m.locate(mid).triangle, 0);
    EXPECT_THROW(m.locate(Vec2(1.5, 0.5)), Error);
    try {
        m.locate(Vec2(-0.1, 0.5));
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::PointOutsideMesh);
    }
}

TEST(Mesh, InterpolationReproducesAffine)
{
    const Mesh m = build_unit_disk_mesh(6);
    auto f = [](const Vec2 &x) { return 0.3 - 1.2 * x.x() + 2.5 * x.y(); };
    for (const Vec2 &x : {Vec2(0.1, 0.2), Vec2(-0.5, 0.33), Vec2(0.0, -0.9)}) {
        const auto loc = m.locate(x);
        const auto &t = m.triangle(loc.triangle);
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
            v += loc.bary[k] * f(m.vertex(t[k]));
        EXPECT_NEAR(v, f(x), 1e-13);
    }
}

TEST(Mesh, RoundTrip)
{
    const Mesh m = build_unit_disk_mesh(3);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    EXPECT_EQ(r.num_vertices(), m.num_vertices());
    EXPECT_EQ(r.num_triangles(), m.num_triangles());
    EXPECT_EQ(r.holdall(), HoldAll::disk);
    EXPECT_NEAR(r.total_area(), m.total_area(), 1e-14);
}

TEST(Mesh, RejectsBadInput)
{
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}};
    EXPECT_THROW(Mesh(v, {{0, 2, 1}}, {1, 1, 1}, HoldAll::other), Error);
    EXPECT_THROW(Mesh(v, {{0, 1, 2}}, {1, 0, 1}, HoldAll::other), Error);
    EXPECT_NO_THROW(Mesh(v, {{0, 1, 2}}, {1, 1, 1}, HoldAll::other));
}

TEST(Mesh, TrianglesNear)
{
    const Mesh m = build_unit_square_mesh(8);
    const auto near = m.triangles_near(Vec2(0.5, 0.5), 0.01);
    EXPECT_EQ(near.size(), 8u);
}

TEST(CutCell, AllInsideMatchesStandardRule)
{
    const Mesh m = build_unit_square_mesh(4);
    const CutCells c = CutCells::from_indicator(m, [](const Vec2 &) { return true; }, 4);
    EXPECT_EQ(c.num_cut(), 0u);
    const auto &rule = triangle_rule(2);
    int n = 0;
    for_each_point(m, &c, 5, rule, [&](const Vec3 &b, double w, bool inside) {
        EXPECT_TRUE(inside);
        EXPECT_EQ(b, rule.points[n]);
        EXPECT_DOUBLE_EQ(w, rule.weights[n] * 2.0 * m.area(5));
        ++n;
    });
    EXPECT_EQ(n, 3);
}

TEST(CutCell, DiskAreaByIndicator)
{
    const Mesh m = build_unit_square_mesh(16);
    const Vec2 c(0.5, 0.5);
    const double r = 0.25;
    auto ind = [&](const Vec2 &x) { return (x - c).norm() < r; };
    const double exact = std::numbers::pi * r * r;
    std::vector<double> err;
    for (int depth = 0; depth <= 4; ++depth) {
        const CutCells cc = CutCells::from_indicator(m, ind, depth);
        err.push_back(std::abs(inside_area(m, cc) - exact));
    }
    EXPECT_LT(err[4] / exact, 0.01);
    EXPECT_GT(err[0], err[4]);
}

TEST(CutCell, ExactClassifierConverges)
{
    const Mesh m = build_unit_square_mesh(16);
    const Shape s = Disk{Vec2(0.43, 0.51), 0.27};
    const double exact = shape_area(s);
    std::vector<double> err;
    for (int depth = 0; depth <= 6; ++depth)
        err.push_back(std::abs(inside_area(m, CutCells::from_shape(m, s, depth)) - exact) / exact);
    EXPECT_LT(err[4], 2e-3);
    // first-order decay in the leaf size: roughly halves per level
    for (int d = 0; d + 1 < 5; ++d)
        EXPECT_LT(err[d + 1], 0.6 * err[d]) << d;
    const double order = std::log2(err[0] / err[4]) / 4.0;
    EXPECT_GE(order, 0.95);
}

TEST(CutCell, InsideAtFollowsLeaves)
{
    const Mesh m = build_unit_square_mesh(4);
    const Shape s = Disk{Vec2(0.5, 0.5), 0.3};
    const CutCells cc = CutCells::from_shape(m, s, 5);
    for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t)
        for (const Vec3 &b : {Vec3(0.2, 0.3, 0.5), Vec3(0.6, 0.2, 0.2)}) {
            const Vec2 x = m.point(t, b);
            if (std::abs((x - Vec2(0.5, 0.5)).norm() - 0.3) > 0.02)
                EXPECT_EQ(cc.inside_at(t, b), contains(s, x));
        }
}
