#include "toposd/assembly.hpp"

#include "toposd/error.hpp"
#include "toposd/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace toposd {
namespace {

    constexpr double snap_tolerance = 1e-9;

    SparseMatrix from_triplets(const Mesh &mesh, const std::vector<Eigen::Triplet<double>> &trip)
    {
        const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
        SparseMatrix m(n, n);
        m.setFromTriplets(trip.begin(), trip.end());
        m.makeCompressed();
        return m;
    }

} // namespace

Eigen::Matrix3d element_stiffness(const Mesh &mesh, int t, double coefficient)
{
    const auto &g = mesh.shape_gradients(t);
    return coefficient * mesh.area(t) * (g * g.transpose());
}

SparseMatrix assemble_stiffness(const Mesh &mesh, const std::vector<double> &coefficient)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const Eigen::Matrix3d k = element_stiffness(mesh, t, coefficient[t]);
        const auto &tri = mesh.triangle(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], k(i, j));
    }
    return from_triplets(mesh, trip);
}

std::vector<double> effective_coefficient(const Mesh &mesh, const CutCells *cells, double inside, double outside)
{
    std::vector<double> c(mesh.num_triangles(), outside);
    if (cells != nullptr)
        for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
            c[t] = outside + (inside - outside) * cells->inside_fraction(t);
    return c;
}

SparseMatrix assemble_diffusion(const Mesh &mesh, const CutCells *cells, double inside, double outside)
{
    return assemble_stiffness(mesh, effective_coefficient(mesh, cells, inside, outside));
}

SparseMatrix assemble_reaction(const Mesh &mesh, const CutCells *cells, const PointFunction &weight)
{
    const QuadratureRule &rule = triangle_rule(4);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        for_each_point(mesh, cells, t, rule, [&](const Vec3 &b, double w, bool inside) {
            const double wt = weight(t, b, mesh.point(t, b), inside);
            if (wt < -1e-12) {
                std::ostringstream os;
                os << "reaction weight " << wt << " in triangle " << t;
                throw Error(ErrorKind::NegativeWeight, os.str());
            }
            m += (w * wt) * (b * b.transpose());
        });
        const auto &tri = mesh.triangle(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (m(i, j) != 0.0)
                    trip.emplace_back(tri[i], tri[j], m(i, j));
    }
    return from_triplets(mesh, trip);
}

SparseMatrix assemble_mass(const Mesh &mesh)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.num_triangles());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto &tri = mesh.triangle(t);
        const double a = mesh.area(t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], a * (i == j ? 2.0 : 1.0) / 12.0);
    }
    return from_triplets(mesh, trip);
}

Eigen::VectorXd lumped_mass(const Mesh &mesh)
{
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t)
        for (int v : mesh.triangle(t))
            m[v] += mesh.area(t) / 3.0;
    return m;
}

Eigen::VectorXd assemble_load(const Mesh &mesh, const CutCells *cells, double f_in, double f_out)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    const QuadratureRule &rule = triangle_rule(2);
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto &tri = mesh.triangle(t);
        if (cells == nullptr || cells->state(t) != Cover::cut) {
            const double f = cells != nullptr && cells->state(t) == Cover::in ? f_in : f_out;
            for (int v : tri)
                b[v] += f * mesh.area(t) / 3.0;
            continue;
        }
        for_each_point(mesh, cells, t, rule, [&](const Vec3 &bary, double w, bool inside) {
            const double f = inside ? f_in : f_out;
            for (int k = 0; k < 3; ++k)
                b[tri[k]] += w * f * bary[k];
        });
    }
    return b;
}

Eigen::VectorXd assemble_function_load(const Mesh &mesh, const CutCells *cells, const PointFunction &f,
                                       const SingularRefinement *singular)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    integrate(
        mesh, cells, 4,
        [&](int t, const Vec3 &bary, const Vec2 &x, double w, bool inside) {
            const double v = w * f(t, bary, x, inside);
            const auto &tri = mesh.triangle(t);
            for (int k = 0; k < 3; ++k)
                b[tri[k]] += v * bary[k];
        },
        singular);
    return b;
}

Eigen::VectorXd assemble_measure_load(const Mesh &mesh, const MeasureRHS &mu,
                                      const std::function<double(const Vec2 &)> &strength)
{
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (std::size_t a = 0; a < mu.nodes.size(); ++a) {
        const Vec2 &x = mu.nodes[a];
        const Location loc = mesh.locate(x);
        const auto &tri = mesh.triangle(loc.triangle);
        const double s = mu.weights[a] * strength(x);
        int snapped = -1;
        for (int k = 0; k < 3; ++k)
            if ((mesh.vertex(tri[k]) - x).norm() <= snap_tolerance)
                snapped = tri[k];
        if (snapped >= 0) {
            b[snapped] += s;
            continue;
        }
        for (int k = 0; k < 3; ++k)
            b[tri[k]] += s * loc.bary[k];
    }
    return b;
}

} // namespace toposd
