#include "toposd/field.hpp"

#include "toposd/error.hpp"
#include "toposd/planar.hpp"
#include "toposd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace toposd {

Field::Field(MeshPtr mesh, Eigen::VectorXd values) : mesh_(std::move(mesh)), values_(std::move(values))
{
    if (!mesh_)
        throw Error(ErrorKind::Validation, "field without a mesh");
    if (static_cast<std::size_t>(values_.size()) != mesh_->num_vertices())
        throw Error(ErrorKind::Validation, "field length " + std::to_string(values_.size()) +
                                               " does not match vertex count " +
                                               std::to_string(mesh_->num_vertices()));
}

Field Field::zeros(MeshPtr mesh)
{
    const auto n = static_cast<Eigen::Index>(mesh->num_vertices());
    return Field(std::move(mesh), Eigen::VectorXd::Zero(n));
}

Field Field::interpolate(MeshPtr mesh, const std::function<double(const Vec2 &)> &f)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->num_vertices()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = f(mesh->vertex(static_cast<int>(i)));
    return Field(std::move(mesh), std::move(v));
}

double Field::value(int t, const Vec3 &bary) const
{
    const auto &tri = mesh_->triangle(t);
    return bary[0] * values_[tri[0]] + bary[1] * values_[tri[1]] + bary[2] * values_[tri[2]];
}

Vec2 Field::gradient(int t) const
{
    const auto &tri = mesh_->triangle(t);
    const Eigen::Vector3d u(values_[tri[0]], values_[tri[1]], values_[tri[2]]);
    return mesh_->shape_gradients(t).transpose() * u;
}

double Field::sample(const Vec2 &x) const
{
    const Location loc = mesh_->locate(x);
    return value(loc.triangle, loc.bary);
}

Field Field::operator-(const Field &o) const { return Field(mesh_, values_ - o.values_); }
Field Field::operator+(const Field &o) const { return Field(mesh_, values_ + o.values_); }
Field Field::operator*(double s) const { return Field(mesh_, values_ * s); }

void write_field(std::ostream &out, const Field &f)
{
    out << "field " << f.values().size() << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < f.values().size(); ++i)
        out << f.values()[i] << '\n';
}

Eigen::VectorXd read_field(std::istream &in)
{
    std::string word;
    Eigen::Index n = 0;
    if (!(in >> word >> n) || word != "field" || n < 0)
        throw Error(ErrorKind::Validation, "field header must read `field N`");
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(in >> v[i]))
            throw Error(ErrorKind::Validation, "truncated field at entry " + std::to_string(i));
    return v;
}

namespace {

    constexpr int straddle_levels = 6;

    struct SingularWalker {
        const Mesh &mesh;
        const CutCells *cells;
        const QuadratureRule &rule;
        const PointVisitor &visit;
        const SingularRefinement &s;
        int t;

        void run(const std::array<Vec3, 3> &c, int level) const
        {
            const Vec2 a = mesh.point(t, c[0]), b = mesh.point(t, c[1]), d = mesh.point(t, c[2]);
            const double dmin = point_triangle_distance(s.center, a, b, d);
            const double dmax = std::max({(a - s.center).norm(), (b - s.center).norm(), (d - s.center).norm()});
            if (s.puncture > 0.0 && dmax <= s.puncture)
                return;
            const double diam = std::max({(a - b).norm(), (b - d).norm(), (d - a).norm()});
            const bool near = dmin < diam;
            const bool straddle = s.puncture > 0.0 && dmin < s.puncture && dmax > s.puncture;
            if ((near && level < s.max_level) || (straddle && level < straddle_levels)) {
                const Vec3 m01 = 0.5 * (c[0] + c[1]), m12 = 0.5 * (c[1] + c[2]), m20 = 0.5 * (c[2] + c[0]);
                run({c[0], m01, m20}, level + 1);
                run({m01, c[1], m12}, level + 1);
                run({m20, m12, c[2]}, level + 1);
                run({m01, m12, m20}, level + 1);
                return;
            }
            const Vec3 e1 = c[1] - c[0], e2 = c[2] - c[0];
            const double w = 2.0 * mesh.area(t) * std::abs(e1[1] * e2[2] - e1[2] * e2[1]);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Vec3 &p = rule.points[q];
                const Vec3 bary = p[0] * c[0] + p[1] * c[1] + p[2] * c[2];
                const Vec2 x = mesh.point(t, bary);
                if (s.puncture > 0.0 && (x - s.center).norm() < s.puncture)
                    continue;
                const bool inside = cells != nullptr && cells->inside_at(t, bary);
                visit(t, bary, x, rule.weights[q] * w, inside);
            }
        }
    };

} // namespace

void integrate(const Mesh &mesh, const CutCells *cells, int degree, const PointVisitor &visit,
               const SingularRefinement *singular)
{
    const QuadratureRule &rule = triangle_rule(degree);
    std::vector<char> special(mesh.num_triangles(), 0);
    if (singular != nullptr) {
        const double r = std::max(singular->radius, singular->puncture) + 1e-14;
        for (int t : mesh.triangles_near(singular->center, r))
            special[t] = 1;
    }
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        if (special[t]) {
            const SingularWalker w{mesh, cells, rule, visit, *singular, t};
            w.run({Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, 0);
            continue;
        }
        for_each_point(mesh, cells, t, rule, [&](const Vec3 &b, double w, bool inside) {
            visit(t, b, mesh.point(t, b), w, inside);
        });
    }
}

double norm(const Mesh &mesh, const Evaluator &u, const NormSpec &spec)
{
    if (!(spec.p >= 1.0) || !std::isfinite(spec.p))
        throw Error(ErrorKind::Validation, "norm exponent p must lie in [1, inf)");
    double sum = 0.0;
    const bool with_grad = spec.kind == NormSpec::Kind::w1p;
    integrate(
        mesh, nullptr, 4,
        [&](int t, const Vec3 &b, const Vec2 &x, double w, bool) {
            const PointEval e = u(t, b, x);
            double v = std::pow(std::abs(e.value), spec.p);
            if (with_grad)
                v += std::pow(e.grad.norm(), spec.p);
            sum += w * v;
        },
        spec.singular ? &*spec.singular : nullptr);
    return std::pow(sum, 1.0 / spec.p);
}

double norm_lp(const Field &u, double p)
{
    return norm(u.mesh(), [&](int t, const Vec3 &b, const Vec2 &) { return u.eval(t, b); },
                {NormSpec::Kind::lp, p, std::nullopt});
}

double norm_w1p(const Field &u, double p)
{
    return norm(u.mesh(), [&](int t, const Vec3 &b, const Vec2 &) { return u.eval(t, b); },
                {NormSpec::Kind::w1p, p, std::nullopt});
}

double integral(const Field &u)
{
    double s = 0.0;
    integrate(u.mesh(), nullptr, 4, [&](int t, const Vec3 &b, const Vec2 &, double w, bool) { s += w * u.value(t, b); });
    return s;
}

} // namespace toposd
