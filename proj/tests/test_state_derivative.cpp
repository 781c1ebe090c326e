#include "toposd/error.hpp"
#include "toposd/state_derivative.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace toposd;

namespace {

constexpr double pi = std::numbers::pi;

double images_green(const Vec2 &x, const Vec2 &y)
{
    const Vec2 ys = y / y.squaredNorm();
    return -(std::log((x - y).norm()) - std::log(y.norm() * (x - ys).norm())) / (2.0 * pi);
}

ProblemSpec rhs_spec(double f1, double f2)
{
    ProblemSpec s;
    s.kind = ProblemSpec::Kind::poisson_rhs;
    s.f1 = f1;
    s.f2 = f2;
    return s;
}

ProblemSpec semilinear_spec()
{
    ProblemSpec s;
    s.kind = ProblemSpec::Kind::semilinear;
    s.g1 = Nonlinearity::parse("arctan");
    s.g2 = Nonlinearity::parse("tanh", 0.5);
    s.f1 = 1.0;
    s.f2 = 0.0;
    return s;
}

ProblemSpec transmission_spec(double b1, double b2)
{
    ProblemSpec s;
    s.kind = ProblemSpec::Kind::transmission;
    s.beta1 = b1;
    s.beta2 = b2;
    s.f = 1.0;
    return s;
}

MeshPtr square(int n) { return std::make_shared<const Mesh>(build_unit_square_mesh(n)); }
MeshPtr disk(int n) { return std::make_shared<const Mesh>(build_unit_disk_mesh(n)); }

Region square_omega() { return Region(HoldAll::square, {Disk{Vec2(0.3, 0.4), 0.15}}); }

// relative L1 error of a nodal field against the images Green function
double green_error(const Field &u, const Vec2 &y)
{
    SingularRefinement s;
    s.center = y;
    s.radius = 2.0 * u.mesh().max_diameter();
    const NormSpec l1{NormSpec::Kind::lp, 1.0, s};
    const double diff = norm(
        u.mesh(), [&](int t, const Vec3 &b, const Vec2 &x) { return PointEval{u.value(t, b) - images_green(x, y)}; },
        l1);
    const double ref = norm(u.mesh(), [&](int, const Vec3 &, const Vec2 &x) { return PointEval{images_green(x, y)}; },
                            l1);
    return diff / ref;
}

} // namespace

TEST(StateDerivative, TrivialSemilinearVanishes)
{
    const MeshPtr m = square(32);
    ProblemSpec s;
    s.kind = ProblemSpec::Kind::semilinear;
    s.g1 = s.g2 = Nonlinearity::parse("arctan");
    s.f1 = s.f2 = 1.0;
    const Region om = square_omega();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    NumericOptions o;
    const Field u = solve_state(s, m, om, o);
    EXPECT_LT(differential_quotient(s, m, om, seed, 0.25, o, &u).values().cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(semilinear_U0_measure(s, m, om, seed, u, o).u0.regular.values().cwiseAbs().maxCoeff(), 1e-14);
    const auto sp = semilinear_U0_splitting(s, m, om, seed, u, o);
    EXPECT_FALSE(sp.u0.has_singular());
    EXPECT_EQ(sp.u0.regular.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(StateDerivative, TransmissionEqualBetasVanish)
{
    const MeshPtr m = square(32);
    const ProblemSpec s = transmission_spec(1.5, 1.5);
    const Region om = square_omega();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    NumericOptions o;
    const Field u = solve_state(s, m, om, o);
    EXPECT_LT(differential_quotient(s, m, om, seed, 0.25, o, &u).values().cwiseAbs().maxCoeff(), 1e-10);
    const auto r = transmission_U0(s, m, om, seed, u, o);
    EXPECT_EQ(r.xi->norm(), 0.0);
    EXPECT_EQ(r.u0.regular.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(StateDerivative, MeshTooCoarse)
{
    const MeshPtr m = square(8);
    NumericOptions o;
    try {
        differential_quotient(rhs_spec(1, 0), m, square_omega(), InclusionSeed::point(Vec2(0.6, 0.5)), 0.2, o);
        ADD_FAILURE();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::MeshTooCoarse);
    }
}

TEST(StateDerivative, DiskGreenFunctionByMeasureRoute)
{
    const Vec2 y(0.3, 0.0);
    const Region om(HoldAll::disk, {Disk{Vec2(-0.4, -0.3), 0.2}});
    NumericOptions o;
    std::vector<double> err;
    for (int n : {16, 32}) {
        const MeshPtr m = disk(n);
        const ProblemSpec s = rhs_spec(1.0, 0.0);
        const Field u = solve_state(s, m, om, o);
        const auto r = semilinear_U0_measure(s, m, om, InclusionSeed::point(y), u, o);
        err.push_back(green_error(r.u0.regular, y));
    }
    EXPECT_LT(err[1], 0.05);
    EXPECT_GT(err[0] / err[1], 1.5);
}

TEST(StateDerivative, SplittingMatchesMeasureRoute)
{
    const Region om = square_omega();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    NumericOptions o;
    std::vector<double> diff;
    for (int n : {16, 32, 64}) {
        const MeshPtr m = square(n);
        const ProblemSpec s = rhs_spec(2.0, 0.5);
        const Field u = solve_state(s, m, om, o);
        const auto a = semilinear_U0_measure(s, m, om, seed, u, o);
        const auto b = rhs_linear_U0_splitting(s, m, om, seed, o);
        SingularRefinement sr;
        sr.center = seed.center;
        sr.radius = 2.0 * m->max_diameter();
        diff.push_back(norm(
            *m,
            [&](int t, const Vec3 &bb, const Vec2 &x) {
                return PointEval{a.u0.regular.value(t, bb) - b.u0.eval(t, bb, x).value};
            },
            {NormSpec::Kind::lp, 1.0, sr}));
        // boundary data of the corrector cancels the singular part
        for (int v = 0; v < static_cast<int>(m->num_vertices()); ++v)
            if (m->is_boundary(v))
                EXPECT_NEAR(b.u0.regular.values()[v] + b.u0.singular(m->vertex(v)).value, 0.0, 1e-14);
    }
    EXPECT_LT(diff[2], 2e-3);
    EXPECT_LT(diff[2], diff[1]);
    EXPECT_LT(diff[1], diff[0]);
}

TEST(StateDerivative, SemilinearSplittingMatchesMeasureRoute)
{
    const Region om = square_omega();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    NumericOptions o;
    std::vector<double> diff;
    for (int n : {16, 32, 64}) {
        const MeshPtr m = square(n);
        const ProblemSpec s = semilinear_spec();
        const Field u = solve_state(s, m, om, o);
        const auto a = semilinear_U0_measure(s, m, om, seed, u, o);
        const auto b = semilinear_U0_splitting(s, m, om, seed, u, o);
        SingularRefinement sr;
        sr.center = seed.center;
        sr.radius = 2.0 * m->max_diameter();
        diff.push_back(norm(
            *m,
            [&](int t, const Vec3 &bb, const Vec2 &x) {
                return PointEval{a.u0.regular.value(t, bb) - b.u0.eval(t, bb, x).value};
            },
            {NormSpec::Kind::lp, 1.0, sr}));
    }
    EXPECT_LT(diff[2], 2e-3);
    EXPECT_LT(diff[2], diff[1]);
    EXPECT_LT(diff[1], diff[0]);
}

TEST(StateDerivative, SignFlipsWithSide)
{
    const MeshPtr m = square(32);
    NumericOptions o;
    const ProblemSpec s = rhs_spec(1.0, 0.0);
    const Region out(HoldAll::square, {Disk{Vec2(0.3, 0.4), 0.15}});
    const Region in(HoldAll::square, {Disk{Vec2(0.6, 0.5), 0.15}});
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const auto a = semilinear_U0_measure(s, m, out, seed, solve_state(s, m, out, o), o);
    const auto b = semilinear_U0_measure(s, m, in, seed, solve_state(s, m, in, o), o);
    EXPECT_EQ(a.sgn, 1);
    EXPECT_EQ(b.sgn, -1);
    EXPECT_LT((a.u0.regular.values() + b.u0.regular.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StateDerivative, CircleSeedIsAverageOfDiracs)
{
    const MeshPtr m = square(24);
    NumericOptions o;
    o.curve_nodes = 64;
    const ProblemSpec s = semilinear_spec();
    const Region om = square_omega();
    const Field u = solve_state(s, m, om, o);
    const auto circle = InclusionSeed::circle(Vec2(0.35, 0.45), 0.3);
    const auto r = semilinear_U0_measure(s, m, om, circle, u, o);
    const MeasureRHS mu = limit_measure(circle, 64);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m->num_vertices()));
    for (std::size_t k = 0; k < mu.nodes.size(); ++k)
        sum += mu.weights[k] *
               semilinear_U0_measure(s, m, om, InclusionSeed::point(mu.nodes[k]), u, o).u0.regular.values();
    EXPECT_LT((sum - r.u0.regular.values()).cwiseAbs().maxCoeff(), 1e-10 * sum.cwiseAbs().maxCoeff());
}

TEST(StateDerivative, GreenColumnsSymmetricAndPositive)
{
    const MeshPtr m = square(16);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const Region om = square_omega();
    const Field u = solve_state(s, m, om, o);
    const CutCells cells = CutCells::from_region(*m, om, o.cut_depth);
    const LinearizedOperator op = LinearizedOperator::build(s, m, cells, u, o.solver);
    const Vec2 y1(0.25, 0.5), y2(0.75, 0.625);
    const Field g1 = green_column(op, y1), g2 = green_column(op, y2);
    EXPECT_NEAR(g1.sample(y2), g2.sample(y1), 1e-9);
    EXPECT_GE(g1.values().minCoeff(), -1e-14);
}

TEST(StateDerivative, SuperpositionIsExactIdentity)
{
    const MeshPtr m = square(12);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const Region om = square_omega();
    const Field u = solve_state(s, m, om, o);
    const Field h = Field::interpolate(m, [](const Vec2 &x) { return std::sin(3.0 * x.x()) + x.y() * x.y(); });
    const auto r = control_derivative_superposition(s, m, om, u, h, o);
    EXPECT_GT(r.columns, 50);
    const double rel = norm_lp(r.direct - r.superposed, 2.0) / norm_lp(r.direct, 2.0);
    EXPECT_LT(rel, 1e-8);
    const auto z = control_derivative_superposition(s, m, om, u, Field::zeros(m), o);
    EXPECT_EQ(z.direct.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(StateDerivative, QuotientsApproachSplitting)
{
    const MeshPtr m = square(80);
    NumericOptions o;
    const ProblemSpec s = rhs_spec(1.0, 0.0);
    const Region om(HoldAll::square, {Disk{Vec2(0.2, 0.2), 0.1}});
    const auto seed = InclusionSeed::point(Vec2(0.55, 0.55));
    const Field u = solve_state(s, m, om, o);
    const auto u0 = rhs_linear_U0_splitting(s, m, om, seed, o);
    SingularRefinement sr;
    sr.center = seed.center;
    sr.radius = 2.0 * m->max_diameter();
    std::vector<double> err;
    Field prev;
    std::vector<double> cauchy;
    for (double eps : {0.4, 0.2, 0.1}) {
        const Field ue = differential_quotient(s, m, om, seed, eps, o, &u);
        err.push_back(norm(
            *m, [&](int t, const Vec3 &b, const Vec2 &x) { return PointEval{ue.value(t, b) - u0.u0.eval(t, b, x).value}; },
            {NormSpec::Kind::lp, 2.0, sr}));
        if (prev.mesh_ptr())
            cauchy.push_back(norm_lp(ue - prev, 2.0));
        prev = ue;
    }
    EXPECT_LT(err[1], err[0]);
    EXPECT_LT(err[2], err[1]);
    EXPECT_LT(cauchy[1], cauchy[0]);
}

TEST(StateDerivative, TransmissionQuotientsApproachDipole)
{
    const MeshPtr m = square(80);
    NumericOptions o;
    const ProblemSpec s = transmission_spec(2.0, 1.0);
    const Region om(HoldAll::square, {Disk{Vec2(0.3, 0.4), 0.15}});
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const Field u = solve_state(s, m, om, o);
    const auto u0 = transmission_U0(s, m, om, seed, u, o);
    EXPECT_NEAR(*u0.c_beta, -1.0 / 3.0, 1e-15);
    SingularRefinement sr;
    sr.center = seed.center;
    sr.radius = 2.0 * m->max_diameter();
    std::vector<double> err;
    for (double eps : {0.2, 0.14, 0.1}) {
        const Field ue = differential_quotient(s, m, om, seed, eps, o, &u);
        err.push_back(norm(
            *m, [&](int t, const Vec3 &b, const Vec2 &x) { return PointEval{ue.value(t, b) - u0.u0.eval(t, b, x).value}; },
            {NormSpec::Kind::lp, 1.5, sr}));
    }
    EXPECT_LT(err[1], err[0]);
    EXPECT_LT(err[2], err[1]);
    // far from x0 the dipole dominates the quotient: same sign along ∇u(x0)
    const Vec2 dir = u0.grad_x0->normalized();
    const Field ue = differential_quotient(s, m, om, seed, 0.1, o, &u);
    const Vec2 x = seed.center + 0.25 * dir;
    EXPECT_GT(ue.sample(x) * u0.u0.sample(x), 0.0);
}

TEST(StateDerivative, RescaledCorrectorZeroForEqualFields)
{
    const MeshPtr m = square(8);
    const Field u = Field::interpolate(m, [](const Vec2 &x) { return x.x(); });
    const auto k = rescaled_corrector(u, u, 0.1, Vec2(0.5, 0.5), 2.0, {Vec2(1, 0), Vec2(3, 0), Vec2(10, 0)});
    EXPECT_EQ(k[0].value, 0.0);
    EXPECT_TRUE(k[1].valid);
    EXPECT_FALSE(k[2].valid);
}

TEST(StateDerivative, TransmissionLimitIdentity)
{
    // ∫ U0 v = sgn (β2 - β1)(C_β + 1) ∇u(x0)·∇φ_v(x0) with -div(β ∇φ_v) = v
    const MeshPtr m = square(64);
    NumericOptions o;
    const ProblemSpec s = transmission_spec(2.0, 1.0);
    const Region om(HoldAll::square, {Disk{Vec2(0.3, 0.4), 0.15}});
    for (const Vec2 &x0 : {Vec2(0.6, 0.5), Vec2(0.3, 0.4)}) {
        const auto seed = InclusionSeed::point(x0);
        const Field u = solve_state(s, m, om, o);
        const auto r = transmission_U0(s, m, om, seed, u, o);
        const CutCells cells = CutCells::from_region(*m, om, o.cut_depth);
        const LinearizedOperator op = LinearizedOperator::build(s, m, cells, u, o.solver);
        SingularRefinement sr;
        sr.center = x0;
        sr.radius = 2.0 * m->max_diameter();
        const std::vector<std::function<double(const Vec2 &)>> tests = {
            [](const Vec2 &x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); },
            [](const Vec2 &x) { return x.x() * x.x() - 0.5 * x.y(); },
            [](const Vec2 &x) { return std::exp(x.x() - x.y()); },
        };
        for (const auto &v : tests) {
            const Field phi = op.solve(
                assemble_function_load(*m, nullptr, [&](int, const Vec3 &, const Vec2 &x, bool) { return v(x); }));
            const Vec2 gphi = recover_gradient(phi, x0, &om);
            const double rhs = r.sgn * (s.beta2 - s.beta1) * (*r.c_beta + 1.0) * r.grad_x0->dot(gphi);
            double lhs = 0.0;
            integrate(
                *m, nullptr, 4,
                [&](int t, const Vec3 &b, const Vec2 &x, double w, bool) { lhs += w * r.u0.eval(t, b, x).value * v(x); },
                &sr);
            // relative to the pairing scale, since g·∇φ_v may nearly cancel
            const double scale = std::abs((s.beta2 - s.beta1) * (*r.c_beta + 1.0)) * r.grad_x0->norm() * gphi.norm();
            EXPECT_NEAR(lhs, rhs, 0.02 * scale) << x0.transpose();
        }
    }
}
