#include "toposd/error.hpp"
#include "toposd/functionals.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace toposd;

namespace {

using K = FunctionalTerm::Kind;

MeshPtr square(int n) { return std::make_shared<const Mesh>(build_unit_square_mesh(n)); }

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

Region omega() { return Region(HoldAll::square, {Disk{Vec2(0.3, 0.4), 0.15}}); }

ErrorKind kind_of(const std::function<void()> &f)
{
    try {
        f();
    } catch (const Error &e) {
        return e.kind();
    }
    ADD_FAILURE() << "no exception";
    return ErrorKind::Validation;
}

} // namespace

TEST(Functionals, EvaluateBasics)
{
    const MeshPtr m = square(8);
    const Field one = Field::interpolate(m, [](const Vec2 &) { return 1.0; });
    EXPECT_NEAR(evaluate(FunctionalSpec::single(K::l2_tracking), one), 1.0, 1e-13);
    EXPECT_NEAR(evaluate(FunctionalSpec::single(K::l2_tracking, 1.0), one), 0.0, 1e-15);
    EXPECT_EQ(evaluate(FunctionalSpec::single(K::energy), Field::zeros(m)), 0.0);
    const Field x = Field::interpolate(m, [](const Vec2 &p) { return p.x(); });
    EXPECT_NEAR(evaluate(FunctionalSpec::single(K::grad_tracking), x), 1.0, 1e-13);
    EXPECT_NEAR(evaluate(FunctionalSpec::single(K::lr_tracking, 0.0, 4.0), x), 0.2, 1e-13);
    EXPECT_THROW(FunctionalSpec::single(K::lr_tracking, 0.0, 2.0).validate(), Error);
}

TEST(Functionals, AdjointLoadMatchesDirectionalDerivative)
{
    const MeshPtr m = square(10);
    const Field u = Field::interpolate(m, [](const Vec2 &p) { return std::sin(3 * p.x()) * p.y() + 0.2; });
    const Field w = Field::interpolate(m, [](const Vec2 &p) { return p.x() * (1 - p.x()) * p.y() * (1 - p.y()); });
    for (K k : {K::l2_tracking, K::lr_tracking, K::grad_tracking, K::energy}) {
        const FunctionalSpec j = FunctionalSpec::single(k, 0.1, 4.0);
        const double t = 1e-5;
        const double fd = (evaluate(j, u + w * t) - evaluate(j, u - w * t)) / (2 * t);
        const double an = -adjoint_load(j, u).dot(w.values());
        EXPECT_NEAR(fd, an, 1e-4 * std::max(1.0, std::abs(an))) << to_string(k);
    }
}

TEST(Functionals, AdjointSignByMaximumPrinciple)
{
    const MeshPtr m = square(16);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const Field u = solve_state(s, m, omega(), o);
    const Field p = adjoint_state(FunctionalSpec::single(K::l2_tracking, -1.0), s, m, omega(), u, o);
    EXPECT_LE(p.values().maxCoeff(), 1e-14);
    const FunctionalSpec same{{FunctionalTerm{K::l2_tracking, 1.0, 4.0, [&](const Vec2 &x) { return u.sample(x); }}}};
    EXPECT_LT(adjoint_state(same, s, m, omega(), u, o).values().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Functionals, TrivialSpecGivesZeroDerivative)
{
    const MeshPtr m = square(32);
    NumericOptions o;
    ProblemSpec s;
    s.kind = ProblemSpec::Kind::semilinear;
    s.g1 = s.g2 = Nonlinearity::parse("tanh");
    s.f1 = s.f2 = 2.0;
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const Field u = solve_state(s, m, omega(), o);
    const FunctionalSpec j = FunctionalSpec::single(K::l2_tracking);
    EXPECT_EQ(topo_derivative_semilinear(j, s, m, omega(), seed, u, o), 0.0);
    const auto fd = fd_oracle(j, s, m, omega(), seed, {0.3, 0.25}, o);
    for (const auto &[e, q] : fd.table)
        EXPECT_LT(std::abs(q), 1e-10);
}

TEST(Functionals, ChainEqualsAdjointForMeasureRoute)
{
    const MeshPtr m = square(24);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const Field u = solve_state(s, m, omega(), o);
    for (const auto &seed : {InclusionSeed::point(Vec2(0.6, 0.5)), InclusionSeed::point(Vec2(0.31, 0.42)),
                             InclusionSeed::circle(Vec2(0.65, 0.6), 0.2)}) {
        const auto u0 = semilinear_U0_measure(s, m, omega(), seed, u, o);
        for (K k : {K::l2_tracking, K::grad_tracking, K::energy}) {
            const FunctionalSpec j = FunctionalSpec::single(k, 0.05);
            const double chain = topo_derivative_chain(j, s, u, u0.u0);
            const double adj = topo_derivative_semilinear(j, s, m, omega(), seed, u, o);
            EXPECT_NEAR(chain, adj, 1e-9 * std::abs(adj)) << to_string(k);
        }
    }
}

TEST(Functionals, DerivativeIsLinearInFunctional)
{
    const MeshPtr m = square(16);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const Field u = solve_state(s, m, omega(), o);
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const FunctionalSpec j1 = FunctionalSpec::single(K::l2_tracking, 0.1);
    const FunctionalSpec j2 = FunctionalSpec::single(K::grad_tracking);
    FunctionalSpec sum = j1;
    sum.terms[0].coefficient = 2.5;
    sum.terms.push_back(j2.terms[0]);
    const double a = topo_derivative_semilinear(j1, s, m, omega(), seed, u, o);
    const double b = topo_derivative_semilinear(j2, s, m, omega(), seed, u, o);
    EXPECT_NEAR(topo_derivative_semilinear(sum, s, m, omega(), seed, u, o), 2.5 * a + b, 1e-12);
    const auto u0 = semilinear_U0_measure(s, m, omega(), seed, u, o);
    EXPECT_NEAR(topo_derivative_chain(sum, s, u, u0.u0),
                2.5 * topo_derivative_chain(j1, s, u, u0.u0) + topo_derivative_chain(j2, s, u, u0.u0), 1e-12);
}

TEST(Functionals, CircleDerivativeIsArcAverage)
{
    const MeshPtr m = square(16);
    NumericOptions o;
    o.curve_nodes = 32;
    const ProblemSpec s = semilinear_spec();
    const Field u = solve_state(s, m, omega(), o);
    const FunctionalSpec j = FunctionalSpec::single(K::l2_tracking);
    const auto circle = InclusionSeed::circle(Vec2(0.65, 0.6), 0.2);
    const MeasureRHS mu = limit_measure(circle, 32);
    double avg = 0.0;
    for (std::size_t k = 0; k < mu.nodes.size(); ++k)
        avg += mu.weights[k] * topo_derivative_semilinear(j, s, m, omega(), InclusionSeed::point(mu.nodes[k]), u, o);
    EXPECT_NEAR(topo_derivative_semilinear(j, s, m, omega(), circle, u, o), avg, 1e-12);
}

TEST(Functionals, TransmissionRestrictions)
{
    const MeshPtr m = square(32);
    NumericOptions o;
    const ProblemSpec s = transmission_spec(2.0, 1.0);
    const Field u = solve_state(s, m, omega(), o);
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const auto u0 = transmission_U0(s, m, omega(), seed, u, o);
    EXPECT_EQ(kind_of([&] { topo_derivative_chain(FunctionalSpec::single(K::energy), s, u, u0.u0); }),
              ErrorKind::InadmissibleRoute);
    EXPECT_EQ(kind_of([&] {
                  topo_derivative_transmission_adjoint(FunctionalSpec::single(K::energy), s, m, omega(), seed, u, o);
              }),
              ErrorKind::InadmissibleRoute);
    const ProblemSpec eq = transmission_spec(1.3, 1.3);
    EXPECT_EQ(topo_derivative_transmission_adjoint(FunctionalSpec::single(K::l2_tracking), eq, m, omega(), seed,
                                                   solve_state(eq, m, omega(), o), o),
              0.0);
}

TEST(Functionals, RichardsonContract)
{
    const MeshPtr m = square(64);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const auto fd = fd_oracle(FunctionalSpec::single(K::l2_tracking), s, m, omega(), seed, {0.25, 0.125}, o);
    const double q_min = fd.table[1].second, q_2 = fd.table[0].second;
    EXPECT_LE(std::abs(fd.extrapolated - q_min), std::abs(q_min - q_2) * (1 + 1e-12));
    EXPECT_EQ(kind_of([&] { fd_oracle(FunctionalSpec::single(K::l2_tracking), s, m, omega(), seed, {0.1}, o); }),
              ErrorKind::MeshTooCoarse);
}

TEST(Functionals, RichardsonOrders)
{
    const std::vector<std::pair<double, double>> lin{{0.1, 3.0 + 0.1 * 2.0}, {0.07, 3.0 + 0.07 * 2.0}};
    EXPECT_NEAR(richardson(lin, 1.0), 3.0, 1e-13);
    std::vector<std::pair<double, double>> quad;
    for (double e : {0.2, 0.1, 0.05})
        quad.emplace_back(e, -1.0 + 5.0 * e * e);
    EXPECT_NEAR(richardson(quad, 2.0), -1.0, 1e-13);
    EXPECT_NEAR(observed_remainder_order(quad, -1.0), 2.0, 1e-12);
}

namespace {

// quotients along a sweep move monotonically toward the adjoint value; a second-order fit reaches it
void check_sweep(const std::vector<std::pair<double, double>> &table, double adj, double tol)
{
    for (std::size_t k = 1; k < table.size(); ++k)
        EXPECT_LT(std::abs(table[k].second - adj), std::abs(table[k - 1].second - adj));
    EXPECT_NEAR(richardson(table, 2.0), adj, tol * std::abs(adj));
    EXPECT_NEAR(observed_remainder_order(table, adj), 2.0, 0.4);
}

} // namespace

TEST(Functionals, SemilinearAdjointMatchesFiniteDifferences)
{
    const MeshPtr m = square(96);
    NumericOptions o;
    const ProblemSpec s = semilinear_spec();
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const FunctionalSpec j = FunctionalSpec::single(K::l2_tracking);
    const Field u = solve_state(s, m, omega(), o);
    const double adj = topo_derivative_semilinear(j, s, m, omega(), seed, u, o);
    const auto fd = fd_oracle(j, s, m, omega(), seed, {0.2, 0.14, 0.1}, o, &u);
    check_sweep(fd.table, adj, 0.08);
}

TEST(Functionals, TransmissionAdjointMatchesFiniteDifferences)
{
    const MeshPtr m = square(96);
    NumericOptions o;
    const ProblemSpec s = transmission_spec(2.0, 1.0);
    const auto seed = InclusionSeed::point(Vec2(0.6, 0.5));
    const FunctionalSpec j = FunctionalSpec::single(K::l2_tracking);
    const Field u = solve_state(s, m, omega(), o);
    const double adj = topo_derivative_transmission_adjoint(j, s, m, omega(), seed, u, o);
    const auto fd = fd_oracle(j, s, m, omega(), seed, {0.2, 0.14, 0.1}, o, &u);
    check_sweep(fd.table, adj, 0.10);
    const auto u0 = transmission_U0(s, m, omega(), seed, u, o);
    EXPECT_NEAR(topo_derivative_chain(j, s, u, u0.u0), adj, 0.02 * std::abs(adj));
}
