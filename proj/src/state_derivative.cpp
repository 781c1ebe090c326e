#include "toposd/state_derivative.hpp"

#include "toposd/assembly.hpp"
#include "toposd/error.hpp"

#include <cmath>
#include <numbers>

namespace toposd {
namespace {

    constexpr double pi = std::numbers::pi;

    Vec2 seed_point(const InclusionSeed &seed)
    {
        if (seed.kind == InclusionSeed::Kind::circle_curve)
            throw Error(ErrorKind::UnsupportedSeed, "the splitting route needs a point seed");
        return seed.center;
    }

    OmegaShape seed_omega(const InclusionSeed &seed)
    {
        return seed.kind == InclusionSeed::Kind::scaled_shape ? seed.omega : OmegaShape::ball;
    }

    SingularRefinement refinement_at(const Mesh &mesh, const Vec2 &x0)
    {
        SingularRefinement s;
        s.center = x0;
        s.radius = 2.0 * mesh.max_diameter();
        return s;
    }

    Eigen::VectorXd boundary_data(const Mesh &mesh, const std::function<PointEval(const Vec2 &)> &s, double scale)
    {
        Eigen::VectorXd bc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
        for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v)
            if (mesh.is_boundary(v))
                bc[v] = scale * s(mesh.vertex(v)).value;
        return bc;
    }

    // accumulates Σ_k w_k f(x_k) φ_i(x_k)
    void add_point_load(const Mesh &mesh, Eigen::VectorXd &load, const Vec2 &x, double w)
    {
        const auto loc = mesh.locate(x);
        const auto &tri = mesh.triangle(loc.triangle);
        for (int k = 0; k < 3; ++k)
            load[tri[k]] += w * loc.bary[k];
    }

    bool single_disk(const Region &omega, Disk &out)
    {
        if (omega.shapes().size() != 1 || !omega.added().empty() || !omega.removed().empty())
            return false;
        if (const Disk *d = std::get_if<Disk>(&omega.shapes()[0])) {
            out = *d;
            return true;
        }
        return false;
    }

} // namespace

PointEval SplitField::eval(int t, const Vec3 &bary, const Vec2 &x) const
{
    PointEval e = regular.eval(t, bary);
    if (singular) {
        const PointEval s = singular(x);
        e.value += s.value;
        e.grad += s.grad;
    }
    return e;
}

Evaluator SplitField::evaluator() const
{
    return [this](int t, const Vec3 &b, const Vec2 &x) { return eval(t, b, x); };
}

double SplitField::sample(const Vec2 &x) const
{
    double v = regular.sample(x);
    if (singular)
        v += singular(x).value;
    return v;
}

Field SplitField::nodal() const
{
    Field f = regular;
    if (!singular)
        return f;
    const Mesh &mesh = regular.mesh();
    for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v)
        if ((mesh.vertex(v) - center).norm() > 1e-12)
            f.values()[v] += singular(mesh.vertex(v)).value;
    return f;
}

std::string to_string(Route r)
{
    switch (r) {
    case Route::quotient_limit: return "quotient-limit";
    case Route::measure_solve: return "measure-solve";
    case Route::splitting: return "splitting";
    }
    return "unknown";
}

KernelContext kernel_context(const ProblemSpec &spec, const Region &omega, const InclusionSeed &seed,
                             const Field *state)
{
    KernelContext c;
    c.sgn = sign_of(omega, seed);
    c.omega = seed_omega(seed);
    c.f1 = spec.f1;
    c.f2 = spec.f2;
    c.beta1 = spec.beta1;
    c.beta2 = spec.beta2;
    switch (spec.kind) {
    case ProblemSpec::Kind::poisson_rhs: c.kind = KernelContext::Case::rhs_perturbation; break;
    case ProblemSpec::Kind::semilinear:
        c.kind = spec.is_linear() ? KernelContext::Case::rhs_perturbation : KernelContext::Case::semilinear;
        break;
    case ProblemSpec::Kind::transmission: c.kind = KernelContext::Case::transmission; break;
    }
    if (c.kind == KernelContext::Case::semilinear) {
        if (state == nullptr)
            throw Error(ErrorKind::Validation, "semilinear kernel constants need the solved state");
        const double u = state->sample(seed_point(seed));
        c.g_x0 = spec.g2.value(u) - spec.g1.value(u);
    }
    return c;
}

Field differential_quotient(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                            const InclusionSeed &seed, double eps, const NumericOptions &opts, const Field *base)
{
    const double h = mesh->max_diameter();
    if (h > eps / 8.0 * (1.0 + 1e-9))
        throw Error(ErrorKind::MeshTooCoarse, "mesh size " + std::to_string(h) + " exceeds eps/8 = " +
                                                  std::to_string(eps / 8.0));
    const Dilation dil = dilate(seed, eps, omega.holdall());
    const Region pert = perturb_region(omega, seed, eps);
    const Field u_eps = solve_state(spec, mesh, pert, opts);
    const Field u = base != nullptr ? *base : solve_state(spec, mesh, omega, opts);
    return (u_eps - u) * (1.0 / dil.measure);
}

StateDerivativeResult semilinear_U0_measure(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                            const InclusionSeed &seed, const Field &state,
                                            const NumericOptions &opts)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "the measure route applies to the semilinear class");
    StateDerivativeResult r;
    r.route = Route::measure_solve;
    r.seed = seed;
    r.spec = spec;
    r.sgn = sign_of(omega, seed);
    const MeasureRHS mu = limit_measure(seed, opts.curve_nodes);
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(spec, mesh, cells, state, opts.solver);
    const int sgn = r.sgn;
    const Eigen::VectorXd load = assemble_measure_load(*mesh, mu, [&](const Vec2 &x) {
        const double u = state.sample(x);
        return sgn * ((spec.g2.value(u) - spec.g1.value(u)) + (spec.f1 - spec.f2));
    });
    r.u0.regular = op.solve(load);
    r.u0.center = seed.center;
    return r;
}

StateDerivativeResult rhs_linear_U0_splitting(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                              const InclusionSeed &seed, const NumericOptions &opts)
{
    if (!(spec.kind == ProblemSpec::Kind::poisson_rhs ||
          (spec.kind == ProblemSpec::Kind::semilinear && spec.is_linear())))
        throw Error(ErrorKind::UnsupportedCase, "the rhs splitting needs g1 = g2 = 0");
    const Vec2 x0 = seed_point(seed);
    StateDerivativeResult r;
    r.route = Route::splitting;
    r.seed = seed;
    r.spec = spec;
    r.sgn = sign_of(omega, seed);
    const double c = r.sgn * (spec.f1 - spec.f2);
    r.u0.center = x0;
    if (c == 0.0) {
        r.u0.regular = Field::zeros(mesh);
        return r;
    }
    r.u0.singular = [c, x0](const Vec2 &x) {
        const Vec2 d = x - x0;
        return PointEval{c * fundamental_solution(d), c * fundamental_solution_gradient(d)};
    };
    const LinearizedOperator op(mesh, assemble_diffusion(*mesh, nullptr, 1.0, 1.0), opts.solver);
    r.u0.regular = op.solve(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices())),
                            boundary_data(*mesh, r.u0.singular, -1.0));
    return r;
}

StateDerivativeResult semilinear_U0_splitting(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                              const InclusionSeed &seed, const Field &state,
                                              const NumericOptions &opts)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "the semilinear splitting needs the semilinear class");
    const Vec2 x0 = seed_point(seed);
    StateDerivativeResult r;
    r.route = Route::splitting;
    r.seed = seed;
    r.spec = spec;
    r.sgn = sign_of(omega, seed);
    const double u_x0 = state.sample(x0);
    const double strength = r.sgn * ((spec.g2.value(u_x0) - spec.g1.value(u_x0)) + (spec.f1 - spec.f2));
    r.u0.center = x0;
    if (strength == 0.0) {
        r.u0.regular = Field::zeros(mesh);
        return r;
    }
    r.u0.singular = [strength, x0](const Vec2 &x) {
        const Vec2 d = x - x0;
        return PointEval{strength * fundamental_solution(d), strength * fundamental_solution_gradient(d)};
    };
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(spec, mesh, cells, state, opts.solver);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices()));
    if (!spec.is_linear()) {
        const SingularRefinement sing = refinement_at(*mesh, x0);
        load = assemble_function_load(
            *mesh, &cells,
            [&](int t, const Vec3 &b, const Vec2 &x, bool inside) {
                const double w = reaction_derivative(spec, inside, state.value(t, b));
                return -w * strength * fundamental_solution(Vec2(x - x0));
            },
            &sing);
    }
    r.u0.regular = op.solve(load, boundary_data(*mesh, r.u0.singular, -1.0));
    return r;
}

ArcRule circle_rule(const Disk &d, int n)
{
    ArcRule a;
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * pi * k / n;
        const Vec2 nu(std::cos(th), std::sin(th));
        a.nodes.push_back(d.center + d.radius * nu);
        a.normals.push_back(nu);
        a.weights.push_back(2.0 * pi * d.radius / n);
    }
    return a;
}

StateDerivativeResult transmission_U0(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                      const InclusionSeed &seed, const Field &state, const NumericOptions &opts)
{
    if (spec.kind != ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "transmission_U0 needs the transmission class");
    if (seed_omega(seed) != OmegaShape::ball)
        throw Error(ErrorKind::UnsupportedCase, "the transmission limit is closed-form only for the ball");
    const Vec2 x0 = seed_point(seed);
    StateDerivativeResult r;
    r.route = Route::splitting;
    r.seed = seed;
    r.spec = spec;
    r.sgn = sign_of(omega, seed);
    const KernelContext ctx = kernel_context(spec, omega, seed);
    const Vec2 g = recover_gradient(state, x0, &omega);
    const Eigen::VectorXd xi = dipole_vector_xi(ctx, Eigen::VectorXd(g));
    r.grad_x0 = g;
    r.c_beta = transmission_C_beta(ctx);
    r.xi = Vec2(xi[0], xi[1]);
    r.u0.center = x0;
    if (spec.beta1 == spec.beta2 || g.norm() == 0.0) {
        r.u0.regular = Field::zeros(mesh);
        return r;
    }
    r.u0.singular = [ctx, g, x0](const Vec2 &x) { return transmission_singular(ctx, g, Vec2(x - x0)); };

    // interface load (β2 - β1) ∫_{∂Ω} ∂_ν S φ ds, ν outward of Omega
    const std::size_t n = mesh->num_vertices();
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const double jump = spec.beta2 - spec.beta1;
    Disk disk;
    if (single_disk(omega, disk)) {
        const ArcRule arc = circle_rule(disk, opts.interface_nodes);
        for (std::size_t k = 0; k < arc.nodes.size(); ++k) {
            const PointEval s = r.u0.singular(arc.nodes[k]);
            add_point_load(*mesh, load, arc.nodes[k], jump * s.grad.dot(arc.normals[k]) * arc.weights[k]);
        }
    } else {
        // volume form -∫ (β_Ω - β(x0)) ∇S·∇φ_i, exact for any Omega
        const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
        const double b0 = ctx.beta_x0();
        integrate(
            *mesh, &cells, 2,
            [&](int t, const Vec3 &, const Vec2 &x, double w, bool inside) {
                const double db = (inside ? spec.beta1 : spec.beta2) - b0;
                if (db == 0.0)
                    return;
                const Vec2 gs = r.u0.singular(x).grad;
                const auto &tri = mesh->triangle(t);
                for (int k = 0; k < 3; ++k)
                    load[tri[k]] -= w * db * gs.dot(Vec2(mesh->shape_gradients(t).row(k).transpose()));
            },
            nullptr);
    }
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(spec, mesh, cells, state, opts.solver);
    r.u0.regular = op.solve(load, boundary_data(*mesh, r.u0.singular, -1.0));
    return r;
}

Field green_column(const LinearizedOperator &op, const Vec2 &y)
{
    const Mesh &mesh = *op.mesh();
    mesh.locate(y);
    MeasureRHS mu;
    mu.nodes = {y};
    mu.weights = {1.0};
    return op.solve(assemble_measure_load(mesh, mu, [](const Vec2 &) { return 1.0; }));
}

Superposition control_derivative_superposition(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                               const Field &state, const Field &h, const NumericOptions &opts,
                                               bool with_columns)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "the control superposition applies to the semilinear class");
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(spec, mesh, cells, state, opts.solver);
    const Eigen::VectorXd m = lumped_mass(*mesh);
    const std::size_t n = mesh->num_vertices();
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (int v = 0; v < static_cast<int>(n); ++v) {
        if (mesh->is_boundary(v) || h.values()[v] == 0.0)
            continue;
        const double u = state.values()[v];
        const double s = omega.contains(mesh->vertex(v)) ? -1.0 : 1.0;
        const double f = (spec.g2.value(u) - spec.g1.value(u)) + (spec.f1 - spec.f2);
        coeff[v] = m[v] * s * f * h.values()[v];
    }
    Superposition out;
    out.direct = op.solve(coeff);
    out.superposed = Field::zeros(mesh);
    if (!with_columns)
        return out;
    for (int v = 0; v < static_cast<int>(n); ++v) {
        if (coeff[v] == 0.0)
            continue;
        out.superposed.values() += coeff[v] * green_column(op, mesh->vertex(v)).values();
        ++out.columns;
    }
    return out;
}

std::vector<CorrectorSample> rescaled_corrector(const Field &u_eps, const Field &u, double eps, const Vec2 &x0,
                                                double a, const std::vector<Vec2> &frame)
{
    std::vector<CorrectorSample> out;
    const double scale = std::pow(eps, -a);
    for (const Vec2 &xi : frame) {
        CorrectorSample s;
        s.xi = xi;
        try {
            const Vec2 x = x0 + eps * xi;
            s.value = (u_eps.sample(x) - u.sample(x)) * scale;
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::PointOutsideMesh)
                throw;
            s.valid = false;
        }
        out.push_back(s);
    }
    return out;
}

} // namespace toposd
