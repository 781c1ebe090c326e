#include "toposd/pde.hpp"

#include "toposd/error.hpp"
#include "toposd/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace toposd {

double reaction_value(const ProblemSpec &spec, bool inside, double u)
{
    return inside ? spec.g1.value(u) : spec.g2.value(u);
}

double reaction_derivative(const ProblemSpec &spec, bool inside, double u)
{
    return inside ? spec.g1.derivative(u) : spec.g2.derivative(u);
}

namespace {

    Eigen::VectorXd reaction_vector(const ProblemSpec &spec, const Mesh &mesh, const CutCells &omega,
                                    const Eigen::VectorXd &u)
    {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(u.size());
        const QuadratureRule &rule = triangle_rule(4);
        for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
            const auto &tri = mesh.triangle(t);
            for_each_point(mesh, &omega, t, rule, [&](const Vec3 &b, double w, bool inside) {
                const double uq = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
                const double v = w * reaction_value(spec, inside, uq);
                for (int k = 0; k < 3; ++k)
                    r[tri[k]] += v * b[k];
            });
        }
        return r;
    }

    SparseMatrix reaction_jacobian(const ProblemSpec &spec, const Mesh &mesh, const CutCells &omega,
                                   const Eigen::VectorXd &u)
    {
        return assemble_reaction(mesh, &omega, [&](int t, const Vec3 &b, const Vec2 &, bool inside) {
            const auto &tri = mesh.triangle(t);
            const double uq = b[0] * u[tri[0]] + b[1] * u[tri[1]] + b[2] * u[tri[2]];
            return reaction_derivative(spec, inside, uq);
        });
    }

    double free_norm(const Eigen::VectorXd &r, const std::vector<char> &constrained)
    {
        double s = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            if (!constrained[i])
                s += r[i] * r[i];
        return std::sqrt(s);
    }

    constexpr int max_newton = 60;
    constexpr int stall_window = 5;

} // namespace

Field solve_semilinear(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                       const SolverOptions &solver, NewtonReport *report)
{
    spec.validate();
    const auto &flags = mesh->boundary_flags();
    const SparseMatrix a = assemble_diffusion(*mesh, nullptr, 1.0, 1.0);
    const Eigen::VectorXd load = assemble_load(*mesh, &omega, spec.f1, spec.f2);
    const double tol = 1e-10 * (1.0 + free_norm(load, flags));

    Eigen::VectorXd u = Eigen::VectorXd::Zero(load.size());
    auto residual = [&](const Eigen::VectorXd &x) {
        Eigen::VectorXd r = a * x - load;
        if (!spec.is_linear())
            r += reaction_vector(spec, *mesh, omega, x);
        return r;
    };

    NewtonReport local;
    NewtonReport &rep = report != nullptr ? *report : local;
    rep = {};
    Eigen::VectorXd r = residual(u);
    double rn = free_norm(r, flags);
    rep.residuals.push_back(rn);
    while (rn > tol) {
        if (rep.iterations >= max_newton)
            throw Error(ErrorKind::NewtonStalled, "no convergence after " + std::to_string(max_newton) + " steps");
        SparseMatrix jac = a;
        if (!spec.is_linear())
            jac += reaction_jacobian(spec, *mesh, omega, u);
        const DirichletSolver lin(jac, flags, solver);
        const Eigen::VectorXd delta = lin.solve(-r);

        double alpha = 1.0;
        Eigen::VectorXd trial, rt;
        double tn = 0.0;
        for (int k = 0; k < 12; ++k) {
            trial = u + alpha * delta;
            rt = residual(trial);
            tn = free_norm(rt, flags);
            if (tn <= (1.0 - 1e-4 * alpha) * rn)
                break;
            alpha *= 0.5;
        }
        u = std::move(trial);
        r = std::move(rt);
        rn = tn;
        ++rep.iterations;
        rep.residuals.push_back(rn);
        const std::size_t k = rep.residuals.size() - 1;
        if (rn > tol && k >= stall_window && rn > (1.0 - 1e-3) * rep.residuals[k - stall_window]) {
            std::ostringstream os;
            os << "residual " << rn << " after " << rep.iterations << " steps";
            throw Error(ErrorKind::NewtonStalled, os.str());
        }
    }
    return Field(mesh, std::move(u));
}

Field solve_transmission(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                         const SolverOptions &solver)
{
    spec.validate();
    SparseSystem sys;
    sys.matrix = assemble_diffusion(*mesh, &omega, spec.beta1, spec.beta2);
    sys.rhs = assemble_load(*mesh, nullptr, spec.f, spec.f);
    sys.constrained = mesh->boundary_flags();
    return Field(mesh, solve_dirichlet(sys, solver));
}

Field solve_state(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega, const NumericOptions &opts,
                  NewtonReport *report)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        return solve_transmission(spec, mesh, omega, opts.solver);
    return solve_semilinear(spec, mesh, omega, opts.solver, report);
}

Field solve_state(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega, const NumericOptions &opts,
                  NewtonReport *report)
{
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    return solve_state(spec, mesh, cells, opts, report);
}

Vec2 recover_gradient(const Field &u, const Vec2 &x0, const Region *omega)
{
    const Mesh &mesh = u.mesh();
    mesh.locate(x0);
    const double radius = 2.0 * mesh.max_diameter();
    const std::vector<int> patch = mesh.triangles_near(x0, radius);
    if (omega != nullptr) {
        std::optional<Cover> common;
        for (int t : patch) {
            const auto &tri = mesh.triangle(t);
            const Cover c = omega->classify(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
            if (c == Cover::cut || (common && *common != c))
                throw Error(ErrorKind::PatchTouchesInterface, "gradient patch around x0 meets the boundary of Omega");
            common = c;
        }
    }
    Vec2 g = Vec2::Zero();
    double area = 0.0;
    for (int t : patch) {
        g += mesh.area(t) * u.gradient(t);
        area += mesh.area(t);
    }
    return g / area;
}

LinearizedOperator::LinearizedOperator(MeshPtr mesh, SparseMatrix matrix, const SolverOptions &solver)
    : mesh_(std::move(mesh)), matrix_(std::move(matrix)),
      solver_(std::make_shared<DirichletSolver>(matrix_, mesh_->boundary_flags(), solver))
{
}

LinearizedOperator LinearizedOperator::build(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                                             const Field &state, const SolverOptions &solver)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        return LinearizedOperator(mesh, assemble_diffusion(*mesh, &omega, spec.beta1, spec.beta2), solver);
    SparseMatrix a = assemble_diffusion(*mesh, nullptr, 1.0, 1.0);
    if (!spec.is_linear())
        a += reaction_jacobian(spec, *mesh, omega, state.values());
    return LinearizedOperator(mesh, std::move(a), solver);
}

Field LinearizedOperator::solve(const Eigen::VectorXd &load, const Eigen::VectorXd &boundary_values) const
{
    return Field(mesh_, solver_->solve(load, boundary_values));
}

} // namespace toposd
