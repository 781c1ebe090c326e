#include "toposd/functionals.hpp"

#include "toposd/assembly.hpp"
#include "toposd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace toposd {
namespace {

    bool is_gradient_kind(FunctionalTerm::Kind k)
    {
        return k == FunctionalTerm::Kind::grad_tracking || k == FunctionalTerm::Kind::energy;
    }

    // F'(u) integrand for the value-type terms at one point
    double value_derivative(const FunctionalTerm &t, double u, const Vec2 &x)
    {
        const double d = u - t.u_ref(x);
        switch (t.kind) {
        case FunctionalTerm::Kind::l2_tracking: return 2.0 * d;
        case FunctionalTerm::Kind::lr_tracking: return t.r * std::pow(std::abs(d), t.r - 2.0) * d;
        default: return 0.0;
        }
    }

    // vector field V with F'(u)(w) = ∫ V·∇w for the gradient-type terms (β = 1)
    Field gradient_partner(const FunctionalTerm &t, const Field &u)
    {
        if (t.kind == FunctionalTerm::Kind::energy)
            return u;
        return u - Field::interpolate(u.mesh_ptr(), t.u_ref);
    }

    MeasureRHS seed_measure(const InclusionSeed &seed, int curve_nodes)
    {
        if (seed.kind == InclusionSeed::Kind::scaled_shape)
            return limit_measure(InclusionSeed::point(seed.center));
        return limit_measure(seed, curve_nodes);
    }

} // namespace

FunctionalSpec FunctionalSpec::single(FunctionalTerm::Kind kind, double u_ref, double r)
{
    FunctionalTerm t;
    t.kind = kind;
    t.r = r;
    t.u_ref = [u_ref](const Vec2 &) { return u_ref; };
    return FunctionalSpec{{t}};
}

void FunctionalSpec::validate() const
{
    if (terms.empty())
        throw Error(ErrorKind::Validation, "functional needs at least one term");
    for (const auto &t : terms)
        if (t.kind == FunctionalTerm::Kind::lr_tracking && !(t.r > 2.0))
            throw Error(ErrorKind::Validation, "functional.r must exceed 2 for lr_tracking");
}

std::string FunctionalSpec::name() const
{
    std::ostringstream s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i > 0)
            s << "+";
        if (terms[i].coefficient != 1.0)
            s << terms[i].coefficient << "*";
        s << to_string(terms[i].kind);
    }
    return s.str();
}

std::string to_string(FunctionalTerm::Kind k)
{
    switch (k) {
    case FunctionalTerm::Kind::l2_tracking: return "l2_tracking";
    case FunctionalTerm::Kind::lr_tracking: return "lr_tracking";
    case FunctionalTerm::Kind::grad_tracking: return "grad_tracking";
    case FunctionalTerm::Kind::energy: return "energy";
    }
    return "unknown";
}

FunctionalTerm::Kind parse_functional_kind(const std::string &s)
{
    if (s == "l2_tracking")
        return FunctionalTerm::Kind::l2_tracking;
    if (s == "lr_tracking")
        return FunctionalTerm::Kind::lr_tracking;
    if (s == "grad_tracking")
        return FunctionalTerm::Kind::grad_tracking;
    if (s == "energy")
        return FunctionalTerm::Kind::energy;
    throw Error(ErrorKind::Validation, "functional.kind: unknown functional '" + s + "'");
}

double evaluate(const FunctionalSpec &j, const Field &u, const ProblemSpec &spec, const CutCells *omega)
{
    j.validate();
    const Mesh &mesh = u.mesh();
    double total = 0.0;
    for (const auto &t : j.terms) {
        double s = 0.0;
        switch (t.kind) {
        case FunctionalTerm::Kind::l2_tracking:
        case FunctionalTerm::Kind::lr_tracking: {
            const double p = t.kind == FunctionalTerm::Kind::l2_tracking ? 2.0 : t.r;
            integrate(mesh, nullptr, 4, [&](int tri, const Vec3 &b, const Vec2 &x, double w, bool) {
                s += w * std::pow(std::abs(u.value(tri, b) - t.u_ref(x)), p);
            });
            break;
        }
        case FunctionalTerm::Kind::grad_tracking: {
            const Field d = gradient_partner(t, u);
            for (int tri = 0; tri < static_cast<int>(mesh.num_triangles()); ++tri)
                s += mesh.area(tri) * d.gradient(tri).squaredNorm();
            break;
        }
        case FunctionalTerm::Kind::energy: {
            const bool weighted = spec.kind == ProblemSpec::Kind::transmission;
            const std::vector<double> beta = weighted ? effective_coefficient(mesh, omega, spec.beta1, spec.beta2)
                                                      : std::vector<double>(mesh.num_triangles(), 1.0);
            for (int tri = 0; tri < static_cast<int>(mesh.num_triangles()); ++tri)
                s += beta[tri] * mesh.area(tri) * u.gradient(tri).squaredNorm();
            break;
        }
        }
        total += t.coefficient * s;
    }
    return total;
}

double evaluate(const FunctionalSpec &j, const Field &u) { return evaluate(j, u, ProblemSpec{}, nullptr); }

Eigen::VectorXd adjoint_load(const FunctionalSpec &j, const Field &u)
{
    j.validate();
    const Mesh &mesh = u.mesh();
    Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (const auto &t : j.terms) {
        if (is_gradient_kind(t.kind)) {
            const Field d = gradient_partner(t, u);
            load -= t.coefficient * 2.0 * (assemble_diffusion(mesh, nullptr, 1.0, 1.0) * d.values());
            continue;
        }
        load -= t.coefficient * assemble_function_load(mesh, nullptr, [&](int tri, const Vec3 &b, const Vec2 &x, bool) {
                    return value_derivative(t, u.value(tri, b), x);
                });
    }
    return load;
}

Field adjoint_state(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                    const Field &state, const NumericOptions &opts)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        for (const auto &t : j.terms)
            if (is_gradient_kind(t.kind))
                throw Error(ErrorKind::InadmissibleRoute,
                            "adjoint route for the transmission class covers value-tracking functionals only");
    const CutCells cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(spec, mesh, cells, state, opts.solver);
    return op.solve(adjoint_load(j, state));
}

double topo_derivative_semilinear(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh,
                                  const Region &omega, const InclusionSeed &seed, const Field &state,
                                  const NumericOptions &opts)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "the measure adjoint formula applies to the semilinear class");
    const int sgn = sign_of(omega, seed);
    const Field p = adjoint_state(j, spec, mesh, omega, state, opts);
    const MeasureRHS mu = seed_measure(seed, opts.curve_nodes);
    double w = 0.0;
    for (std::size_t k = 0; k < mu.nodes.size(); ++k) {
        const double u = state.sample(mu.nodes[k]);
        const double c = (spec.g2.value(u) - spec.g1.value(u)) + (spec.f1 - spec.f2);
        w += mu.weights[k] * c * p.sample(mu.nodes[k]);
    }
    return -sgn * w;
}

double topo_derivative_chain(const FunctionalSpec &j, const ProblemSpec &spec, const Field &state,
                             const SplitField &u0)
{
    j.validate();
    if (spec.kind == ProblemSpec::Kind::transmission)
        for (const auto &t : j.terms)
            if (t.kind != FunctionalTerm::Kind::l2_tracking)
                throw Error(ErrorKind::InadmissibleRoute, "chain rule through U0 needs the l2 tracking functional "
                                                          "in the transmission class, got " +
                                                              to_string(t.kind));
    const Mesh &mesh = state.mesh();
    SingularRefinement sr;
    sr.center = u0.center;
    sr.radius = 2.0 * mesh.max_diameter();
    const SingularRefinement *sing = u0.has_singular() ? &sr : nullptr;
    double total = 0.0;
    for (const auto &t : j.terms) {
        double s = 0.0;
        if (is_gradient_kind(t.kind)) {
            const Field d = gradient_partner(t, state);
            integrate(
                mesh, nullptr, 4,
                [&](int tri, const Vec3 &b, const Vec2 &x, double w, bool) {
                    s += w * 2.0 * u0.eval(tri, b, x).grad.dot(d.gradient(tri));
                },
                sing);
        } else {
            integrate(
                mesh, nullptr, 4,
                [&](int tri, const Vec3 &b, const Vec2 &x, double w, bool) {
                    s += w * u0.eval(tri, b, x).value * value_derivative(t, state.value(tri, b), x);
                },
                sing);
        }
        total += t.coefficient * s;
    }
    return total;
}

double topo_derivative_transmission_adjoint(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh,
                                            const Region &omega, const InclusionSeed &seed, const Field &state,
                                            const NumericOptions &opts)
{
    if (spec.kind != ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "the dipole adjoint formula applies to the transmission class");
    for (const auto &t : j.terms)
        if (t.kind != FunctionalTerm::Kind::l2_tracking)
            throw Error(ErrorKind::InadmissibleRoute,
                        "transmission adjoint formula is available for the l2 tracking functional only");
    if (seed.kind == InclusionSeed::Kind::circle_curve ||
        (seed.kind == InclusionSeed::Kind::scaled_shape && seed.omega != OmegaShape::ball))
        throw Error(ErrorKind::UnsupportedCase, "transmission adjoint formula needs a ball inclusion");
    const KernelContext ctx = kernel_context(spec, omega, seed);
    if (spec.beta1 == spec.beta2)
        return 0.0;
    const Field p = adjoint_state(j, spec, mesh, omega, state, opts);
    const Vec2 gu = recover_gradient(state, seed.center, &omega);
    const Vec2 gp = recover_gradient(p, seed.center, &omega);
    return -ctx.sgn * (spec.beta2 - spec.beta1) * (transmission_C_beta(ctx) + 1.0) * gu.dot(gp);
}

FdOracle fd_oracle(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                   const InclusionSeed &seed, const std::vector<double> &eps, const NumericOptions &opts,
                   const Field *state)
{
    if (eps.empty())
        throw Error(ErrorKind::Validation, "fd oracle needs at least one epsilon");
    const double h = mesh->max_diameter();
    const double eps_min = *std::min_element(eps.begin(), eps.end());
    if (h > eps_min / 8.0 * (1.0 + 1e-9))
        throw Error(ErrorKind::MeshTooCoarse, "mesh size " + std::to_string(h) + " exceeds eps_min/8 = " +
                                                  std::to_string(eps_min / 8.0));
    const CutCells base_cells = CutCells::from_region(*mesh, omega, opts.cut_depth);
    const Field u = state != nullptr ? *state : solve_state(spec, mesh, base_cells, opts);
    const double j0 = evaluate(j, u, spec, &base_cells);
    FdOracle out;
    for (double e : eps) {
        const Dilation dil = dilate(seed, e, omega.holdall());
        const CutCells cells = CutCells::from_region(*mesh, perturb_region(omega, seed, e), opts.cut_depth);
        const Field ue = solve_state(spec, mesh, cells, opts);
        out.table.emplace_back(e, (evaluate(j, ue, spec, &cells) - j0) / dil.measure);
    }
    out.extrapolated = richardson(out.table, 1.0);
    return out;
}

double richardson(const std::vector<std::pair<double, double>> &table, double order)
{
    if (table.empty())
        throw Error(ErrorKind::Validation, "richardson needs at least one quotient");
    std::vector<std::pair<double, double>> sorted = table;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1)
        return sorted[0].second;
    const double a = std::pow(sorted[0].first, order), b = std::pow(sorted[1].first, order);
    return (b * sorted[0].second - a * sorted[1].second) / (b - a);
}

double observed_remainder_order(const std::vector<std::pair<double, double>> &table, double limit)
{
    if (table.size() < 2)
        return std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> s = table;
    std::sort(s.begin(), s.end());
    return std::log(std::abs(s[0].second - limit) / std::abs(s[1].second - limit)) / std::log(s[0].first / s[1].first);
}

std::map<std::string, double> TopoDerivativeReport::pairwise_rel_diff() const
{
    std::map<std::string, double> out;
    for (auto a = routes.begin(); a != routes.end(); ++a)
        for (auto b = std::next(a); b != routes.end(); ++b) {
            const double scale = std::max(std::abs(a->second), std::abs(b->second));
            const double d = std::abs(a->second - b->second);
            out[a->first + "|" + b->first] = scale > 1e-12 ? d / scale : d;
        }
    return out;
}

} // namespace toposd
