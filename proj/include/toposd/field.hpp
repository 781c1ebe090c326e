#pragma once

#include "toposd/cut_cell.hpp"
#include "toposd/mesh.hpp"
#include "toposd/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <optional>

namespace toposd {

/// P1 finite-element function: one nodal value per mesh vertex.
class Field {
public:
    Field() = default;
    Field(MeshPtr mesh, Eigen::VectorXd values);

    static Field zeros(MeshPtr mesh);
    static Field interpolate(MeshPtr mesh, const std::function<double(const Vec2 &)> &f);

    const Mesh &mesh() const { return *mesh_; }
    const MeshPtr &mesh_ptr() const { return mesh_; }
    const Eigen::VectorXd &values() const { return values_; }
    Eigen::VectorXd &values() { return values_; }

    double value(int t, const Vec3 &bary) const;
    /// Elementwise constant gradient.
    Vec2 gradient(int t) const;
    PointEval eval(int t, const Vec3 &bary) const { return {value(t, bary), gradient(t)}; }
    /// Point sample via locate; throws PointOutsideMesh.
    double sample(const Vec2 &x) const;

    Field operator-(const Field &o) const;
    Field operator+(const Field &o) const;
    Field operator*(double s) const;

private:
    MeshPtr mesh_;
    Eigen::VectorXd values_;
};

/// Plain-text export: `field N` followed by N values.
void write_field(std::ostream &out, const Field &f);
Eigen::VectorXd read_field(std::istream &in);

/// Local graded refinement toward a singular point used by integrals of
/// functions with integrable singularities at `center`.
struct SingularRefinement {
    Vec2 center = Vec2::Zero();
    /// Triangles within this distance of the center are refined.
    double radius = 0.0;
    int max_level = 24;
    /// Points closer than this to the center are excluded (punctured integrals).
    double puncture = 0.0;
};

using PointVisitor = std::function<void(int t, const Vec3 &bary, const Vec2 &x, double weight, bool inside)>;

/// Visits quadrature points of a degree-`degree` rule over the whole mesh,
/// resolving cut cells and, optionally, a singular point.
void integrate(const Mesh &mesh, const CutCells *cells, int degree, const PointVisitor &visit,
               const SingularRefinement *singular = nullptr);

using Evaluator = std::function<PointEval(int t, const Vec3 &bary, const Vec2 &x)>;

struct NormSpec {
    enum class Kind { lp, w1p };
    Kind kind = Kind::lp;
    double p = 2.0;
    std::optional<SingularRefinement> singular;
};

/// (∫|u|^p)^(1/p) or (∫|u|^p + |∇u|^p)^(1/p) with a degree-4 rule.
double norm(const Mesh &mesh, const Evaluator &u, const NormSpec &spec);
double norm_lp(const Field &u, double p);
double norm_w1p(const Field &u, double p);

/// ∫ u with the degree-4 rule.
double integral(const Field &u);

} // namespace toposd
