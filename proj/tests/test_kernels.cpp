#include "toposd/error.hpp"
#include "toposd/kernels.hpp"
#include "toposd/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace toposd;

namespace {

constexpr double pi = std::numbers::pi;

KernelContext transmission(double b1, double b2, int sgn, int d = 2)
{
    KernelContext c;
    c.kind = KernelContext::Case::transmission;
    c.beta1 = b1;
    c.beta2 = b2;
    c.sgn = sgn;
    c.d = d;
    return c;
}

// ∫ over a rectangle of -ln|x - y|/(2π) by tensor Gauss-Legendre on the four pieces split at x
double log_potential_rect(const Vec2 &x, double x0, double x1, double y0, double y1)
{
    const auto &gl = gauss_legendre(40);
    auto piece = [&](double a0, double a1, double b0, double b1) {
        if (a1 <= a0 || b1 <= b0)
            return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
                // cubic grading towards the split corner keeps the log singularity mild
                const double u = 0.5 * (gl.nodes[i] + 1.0), v = 0.5 * (gl.nodes[j] + 1.0);
                const double su = u * u * u, sv = v * v * v;
                const double wu = 3.0 * u * u * 0.5 * gl.weights[i], wv = 3.0 * v * v * 0.5 * gl.weights[j];
                const double px = std::abs(a0 - x.x()) < 1e-15 ? a0 + su * (a1 - a0) : a1 - su * (a1 - a0);
                const double py = std::abs(b0 - x.y()) < 1e-15 ? b0 + sv * (b1 - b0) : b1 - sv * (b1 - b0);
                const double r = std::hypot(px - x.x(), py - x.y());
                s += -std::log(r) / (2.0 * pi) * wu * wv * (a1 - a0) * (b1 - b0);
            }
        return s;
    };
    const double cx = std::clamp(x.x(), x0, x1), cy = std::clamp(x.y(), y0, y1);
    return piece(x0, cx, y0, cy) + piece(cx, x1, y0, cy) + piece(x0, cx, cy, y1) + piece(cx, x1, cy, y1);
}

} // namespace

TEST(Kernels, FundamentalSolution)
{
    EXPECT_EQ(fundamental_solution(2, 1.0), 0.0);
    EXPECT_NEAR(fundamental_solution(3, 1.0), 1.0 / (4.0 * pi), 1e-16);
    EXPECT_NEAR(fundamental_solution(2, std::exp(1.0)), -1.0 / (2.0 * pi), 1e-15);
    EXPECT_THROW(fundamental_solution(2, 0.0), Error);
    // gradient against central differences
    const Vec2 x(0.3, -0.7);
    const double h = 1e-6;
    const Vec2 fd((fundamental_solution(Vec2(x + Vec2(h, 0))) - fundamental_solution(Vec2(x - Vec2(h, 0)))) / (2 * h),
                  (fundamental_solution(Vec2(x + Vec2(0, h))) - fundamental_solution(Vec2(x - Vec2(0, h)))) / (2 * h));
    EXPECT_NEAR((fundamental_solution_gradient(x) - fd).norm(), 0.0, 1e-8);
}

TEST(Kernels, BallPotentialValues)
{
    // mean-value property outside, radial integral at the center
    EXPECT_NEAR(omega_log_potential(OmegaShape::ball, Vec2(2.0, 0.0)), -std::log(2.0) / 2.0, 1e-10);
    EXPECT_NEAR(omega_log_potential(OmegaShape::ball, Vec2(0.0, 0.0)), 0.25, 1e-9);
    // inside: (1 - r^2)/4 is the radial solution of -ΔK = 1 with K(1) = 0
    for (double r : {0.2, 0.5, 0.9})
        EXPECT_NEAR(omega_log_potential(OmegaShape::ball, Vec2(r * 0.6, r * 0.8)), 0.25 * (1.0 - r * r), 1e-8);
    for (double r : {1.0 + 1e-9, 1.3, 5.0})
        EXPECT_NEAR(omega_log_potential(OmegaShape::ball, Vec2(0.0, -r)), -0.5 * std::log(r), 1e-9);
}

TEST(Kernels, SquarePotential)
{
    EXPECT_NEAR(omega_log_potential(OmegaShape::square, Vec2(0.0, 0.0)),
                -(std::log(2.0) - 3.0 + pi / 2.0) / pi, 1e-8);
    for (const Vec2 &x : {Vec2(0.3, -0.5), Vec2(1.5, 0.2), Vec2(-2.0, 3.0), Vec2(0.99, 0.99)})
        EXPECT_NEAR(omega_log_potential(OmegaShape::square, x), log_potential_rect(x, -1, 1, -1, 1), 2e-6) << x;
    // symmetry of the square
    const double a = omega_log_potential(OmegaShape::square, Vec2(0.4, 0.7));
    EXPECT_NEAR(omega_log_potential(OmegaShape::square, Vec2(-0.7, 0.4)), a, 1e-10);
    // far field: |ω| E(x) + O(|x|^-2)
    const Vec2 far(40.0, 30.0);
    EXPECT_NEAR(omega_log_potential(OmegaShape::square, far), 4.0 * fundamental_solution(far), 1e-3);
}

TEST(Kernels, VolumePotentialScaling)
{
    KernelContext c;
    c.kind = KernelContext::Case::rhs_perturbation;
    c.f1 = 3.0;
    c.f2 = 1.0;
    c.sgn = -1;
    EXPECT_NEAR(volume_potential_K(c, Vec2(0, 0)), -2.0 * 0.25, 1e-9);
    c.d = 3;
    EXPECT_THROW(volume_potential_K(c, Vec2(0, 0)), Error);
    KernelContext s;
    s.kind = KernelContext::Case::semilinear;
    s.g_x0 = 0.5;
    EXPECT_NEAR(volume_potential_K(s, Vec2(2, 0)), -0.5 * std::log(2.0) / 2.0, 1e-10);
}

TEST(Kernels, LogCorrector)
{
    KernelContext c;
    c.f1 = 1.0;
    EXPECT_NEAR(log_corrector_b(c), -1.0 / (2.0 * pi), 1e-16);
    KernelContext s;
    s.kind = KernelContext::Case::semilinear;
    s.g_x0 = -2.0;
    EXPECT_NEAR(log_corrector_b(s), 1.0, 1e-15);
    EXPECT_THROW(log_corrector_b(transmission(1, 2, 1)), Error);
}

TEST(Kernels, TransmissionConstants)
{
    const KernelContext c = transmission(2.0, 1.0, 1);
    EXPECT_NEAR(transmission_C_beta(c), -1.0 / 3.0, 1e-15);
    const Eigen::VectorXd xi = dipole_vector_xi(c, Eigen::Vector2d(1.0, 0.0));
    EXPECT_NEAR(xi[0], -2.0 * pi / 3.0, 1e-14);
    EXPECT_EQ(xi[1], 0.0);
    EXPECT_EQ(transmission_C_beta(transmission(1.5, 1.5, -1)), 0.0);
    EXPECT_THROW(transmission_C_beta(transmission(-1.0, 1.0, 1)), Error);
}

TEST(Kernels, BallCorrectorSolvesTransmission)
{
    // continuity and flux balance β_in ∂_r K_in = β_out (∂_r K_out) + (β_out - β_in) g·ν at r = 1
    for (int d : {2, 3})
        for (int sgn : {1, -1}) {
            const KernelContext c = transmission(2.0, 0.5, sgn, d);
            const double b_in = sgn > 0 ? c.beta1 : c.beta2, b_out = sgn > 0 ? c.beta2 : c.beta1;
            Eigen::VectorXd g = Eigen::VectorXd::Zero(d), nu = Eigen::VectorXd::Zero(d);
            g[0] = 0.7;
            g[1] = -0.2;
            nu[0] = 0.6;
            nu[1] = 0.8;
            const auto in = transmission_K_ball(c, (1.0 - 1e-12) * nu, g);
            const auto out = transmission_K_ball(c, (1.0 + 1e-12) * nu, g);
            EXPECT_NEAR(in.value, out.value, 1e-10);
            const double jump = b_in * (in.grad.dot(nu) + g.dot(nu)) - b_out * (out.grad.dot(nu) + g.dot(nu));
            EXPECT_NEAR(jump, 0.0, 1e-10) << d << " " << sgn;
            // harmonic outside: finite-difference Laplacian
            Eigen::VectorXd x = 1.7 * nu;
            const double h = 1e-4;
            double lap = 0.0;
            for (int k = 0; k < d; ++k) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
                e[k] = h;
                lap += (transmission_K_ball(c, x + e, g).value - 2.0 * transmission_K_ball(c, x, g).value +
                        transmission_K_ball(c, x - e, g).value) / (h * h);
            }
            EXPECT_NEAR(lap, 0.0, 1e-6);
        }
}

TEST(Kernels, CorrectorRotationEquivariant)
{
    const KernelContext c = transmission(1.0, 3.0, -1);
    const double th = 0.7;
    Eigen::Matrix2d q;
    q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::Vector2d g(0.3, 1.1);
    for (const Eigen::Vector2d &x : {Eigen::Vector2d(0.2, 0.4), Eigen::Vector2d(1.5, -2.0)})
        EXPECT_NEAR(transmission_K_ball(c, q * x, q * g).value, transmission_K_ball(c, x, g).value, 1e-14);
}

TEST(Kernels, PolarisationMatrixFromFarField)
{
    // ∫_{|x|=R} K ν ds / |ω| recovers A g for the dipole far field C g·x/|x|^2
    const KernelContext c = transmission(2.0, 1.0, 1);
    const Eigen::Vector2d g(1.0, -0.5);
    const auto &gl = gauss_legendre(32);
    const double big = 3.0;
    Eigen::Vector2d m = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = pi * (gl.nodes[i] + 1.0);
        const Eigen::Vector2d nu(std::cos(t), std::sin(t));
        m += gl.weights[i] * pi * transmission_K_ball(c, big * nu, g).value * nu * big;
    }
    m /= pi;
    const Eigen::Vector2d ag = polarisation_matrix_ball(c) * g;
    EXPECT_NEAR((m - ag).norm(), 0.0, 1e-12);
}

TEST(Kernels, TransmissionSingularMatchesCorrectorOutside)
{
    const KernelContext c = transmission(2.0, 1.0, 1);
    const Vec2 g(0.4, 0.9);
    for (const Vec2 &x : {Vec2(1.2, 0.0), Vec2(-0.3, 2.5)}) {
        const auto s = transmission_singular(c, g, x);
        const auto k = transmission_K_ball(c, Eigen::VectorXd(x), Eigen::VectorXd(g));
        EXPECT_NEAR(s.value, k.value / pi, 1e-14);
        EXPECT_NEAR(s.grad.x(), k.grad[0] / pi, 1e-14);
        EXPECT_NEAR(s.grad.y(), k.grad[1] / pi, 1e-14);
    }
    EXPECT_THROW(transmission_singular(c, g, Vec2(0, 0)), Error);
}
