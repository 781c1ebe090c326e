#include "toposd/kernels.hpp"

#include "toposd/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace toposd {
namespace {

    constexpr double pi = std::numbers::pi;

    double ball_measure(int d) { return d == 2 ? pi : 4.0 * pi / 3.0; }

    // ∫_0^R -(1/2π) ln(r) r dr
    double radial_primitive(double r)
    {
        if (r <= 0.0)
            return 0.0;
        return -(0.5 * r * r * std::log(r) - 0.25 * r * r) / (2.0 * pi);
    }

    // parameter interval [t1, t2] of the ray x + t e inside ω, t >= 0
    bool ray_interval(OmegaShape w, const Vec2 &x, const Vec2 &e, double &t1, double &t2)
    {
        if (w == OmegaShape::ball) {
            const double b = x.dot(e);
            const double disc = b * b - (x.squaredNorm() - 1.0);
            if (disc <= 0.0)
                return false;
            const double s = std::sqrt(disc);
            t1 = std::max(0.0, -b - s);
            t2 = -b + s;
            return t2 > t1;
        }
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 2; ++k) {
            if (std::abs(e[k]) < 1e-300) {
                if (std::abs(x[k]) >= 1.0)
                    return false;
                continue;
            }
            double a = (-1.0 - x[k]) / e[k], b = (1.0 - x[k]) / e[k];
            if (a > b)
                std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
        }
        t1 = lo;
        t2 = hi;
        return hi > lo;
    }

    double chord_integral(OmegaShape w, const Vec2 &x, double theta)
    {
        const Vec2 e(std::cos(theta), std::sin(theta));
        double t1 = 0.0, t2 = 0.0;
        if (!ray_interval(w, x, e, t1, t2))
            return 0.0;
        return radial_primitive(t2) - radial_primitive(t1);
    }

    double integrate_angle(OmegaShape w, const Vec2 &x, double a, double b, double tol, double &err)
    {
        double e = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double th) { return chord_integral(w, x, th); }, a, b, 15, tol, &e);
        err += e;
        return v;
    }

} // namespace

double KernelContext::omega_measure() const
{
    if (omega == OmegaShape::ball)
        return ball_measure(d);
    return d == 2 ? 4.0 : 8.0;
}

double KernelContext::contrast() const
{
    switch (kind) {
    case Case::rhs_perturbation: return f1 - f2;
    case Case::semilinear: return g_x0 + (f1 - f2);
    case Case::transmission: return 0.0;
    }
    return 0.0;
}

void KernelContext::validate() const
{
    if (d != 2 && d != 3)
        throw Error(ErrorKind::UnsupportedCase, "kernel dimension must be 2 or 3");
    if (sgn != 1 && sgn != -1)
        throw Error(ErrorKind::Validation, "sign must be +1 or -1");
    if (kind == Case::transmission && (!(beta1 > 0.0) || !(beta2 > 0.0)))
        throw Error(ErrorKind::Validation, "beta1 and beta2 must be positive");
}

double fundamental_solution(int d, double r)
{
    if (r < 1e-14)
        throw Error(ErrorKind::OriginSingularity, "fundamental solution evaluated at the origin");
    if (d == 2)
        return -std::log(r) / (2.0 * pi);
    if (d == 3)
        return 1.0 / (4.0 * pi * r);
    throw Error(ErrorKind::UnsupportedCase, "fundamental solution needs d = 2 or 3");
}

double fundamental_solution(const Vec2 &x) { return fundamental_solution(2, x.norm()); }

Vec2 fundamental_solution_gradient(const Vec2 &x)
{
    const double r2 = x.squaredNorm();
    if (r2 < 1e-28)
        throw Error(ErrorKind::OriginSingularity, "fundamental solution gradient at the origin");
    return -x / (2.0 * pi * r2);
}

double singular_part_rhs(const KernelContext &ctx, double r)
{
    ctx.validate();
    const double c = ctx.sgn * (ctx.f1 - ctx.f2);
    if (c == 0.0)
        return 0.0;
    return c * fundamental_solution(ctx.d, r);
}

double omega_log_potential(OmegaShape w, const Vec2 &x)
{
    const bool inside = w == OmegaShape::ball ? x.norm() < 1.0 : x.cwiseAbs().maxCoeff() < 1.0;
    const double tol = inside ? 1e-10 : 1e-12;
    double err = 0.0, value = 0.0;
    if (w == OmegaShape::ball && !inside) {
        // cone of directions hitting the ball; θ = φ0 + α sin(s) removes the tangency square roots
        const double r = x.norm();
        const double phi0 = std::atan2(-x.y(), -x.x());
        const double alpha = std::asin(std::min(1.0, 1.0 / r));
        double e = 0.0;
        value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double s) { return chord_integral(w, x, phi0 + alpha * std::sin(s)) * alpha * std::cos(s); },
            -pi / 2, pi / 2, 15, tol, &e);
        err = e;
    } else {
        std::vector<double> breaks = {0.0, 2.0 * pi};
        if (w == OmegaShape::square)
            for (const Vec2 &c : {Vec2(1, 1), Vec2(-1, 1), Vec2(-1, -1), Vec2(1, -1)}) {
                double a = std::atan2(c.y() - x.y(), c.x() - x.x());
                if (a < 0.0)
                    a += 2.0 * pi;
                breaks.push_back(a);
            }
        std::sort(breaks.begin(), breaks.end());
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
            if (breaks[i + 1] > breaks[i])
                value += integrate_angle(w, x, breaks[i], breaks[i + 1], tol, err);
    }
    const double target = (inside ? 1e-6 : 1e-8) * std::max(std::abs(value), 1.0);
    if (!(err <= target) || !std::isfinite(value))
        throw Error(ErrorKind::QuadratureFailure, "volume potential quadrature error " + std::to_string(err) +
                                                      " exceeds target " + std::to_string(target));
    return value;
}

double volume_potential_K(const KernelContext &ctx, const Vec2 &x)
{
    ctx.validate();
    if (ctx.kind == KernelContext::Case::transmission)
        throw Error(ErrorKind::UnsupportedCase, "volume potential is defined for rhs and semilinear cases");
    if (ctx.d != 2)
        throw Error(ErrorKind::UnsupportedCase, "volume potential quadrature is implemented for d = 2");
    const double c = ctx.sgn * ctx.contrast();
    if (c == 0.0)
        return 0.0;
    return c * omega_log_potential(ctx.omega, x);
}

double log_corrector_b(const KernelContext &ctx)
{
    ctx.validate();
    if (ctx.d != 2)
        throw Error(ErrorKind::UnsupportedCase, "the logarithmic corrector exists only for d = 2");
    switch (ctx.kind) {
    case KernelContext::Case::rhs_perturbation: return -ctx.sgn * (ctx.f1 - ctx.f2) / (2.0 * pi);
    case KernelContext::Case::semilinear: return -ctx.sgn * ctx.contrast() * ctx.omega_measure() / (2.0 * pi);
    case KernelContext::Case::transmission: break;
    }
    throw Error(ErrorKind::UnsupportedCase, "no logarithmic corrector for the transmission case");
}

double transmission_C_beta(const KernelContext &ctx)
{
    ctx.validate();
    const double b_in = ctx.sgn > 0 ? ctx.beta1 : ctx.beta2;
    const double b_out = ctx.sgn > 0 ? ctx.beta2 : ctx.beta1;
    return ctx.sgn * (ctx.beta2 - ctx.beta1) / (b_in + (ctx.d - 1) * b_out);
}

KernelValue transmission_K_ball(const KernelContext &ctx, const Eigen::VectorXd &x, const Eigen::VectorXd &g)
{
    if (ctx.omega != OmegaShape::ball)
        throw Error(ErrorKind::UnsupportedCase, "closed-form transmission corrector needs the unit ball");
    if (x.size() != ctx.d || g.size() != ctx.d)
        throw Error(ErrorKind::Validation, "point and gradient must have dimension d");
    const double c = transmission_C_beta(ctx);
    const double r = x.norm();
    KernelValue k;
    if (r <= 1.0) {
        k.value = c * g.dot(x);
        k.grad = c * g;
        return k;
    }
    const double rd = std::pow(r, ctx.d);
    k.value = c * g.dot(x) / rd;
    k.grad = c * (g / rd - ctx.d * g.dot(x) * x / (rd * r * r));
    return k;
}

Eigen::MatrixXd polarisation_matrix_ball(const KernelContext &ctx)
{
    return transmission_C_beta(ctx) * Eigen::MatrixXd::Identity(ctx.d, ctx.d);
}

Eigen::VectorXd dipole_vector_xi(const KernelContext &ctx, const Eigen::VectorXd &g)
{
    const Eigen::MatrixXd a = polarisation_matrix_ball(ctx);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(ctx.d, ctx.d);
    return ctx.sgn * (ctx.beta2 - ctx.beta1) / ctx.beta_x0() * ctx.omega_measure() * ((a + id) * g);
}

PointEval transmission_singular(const KernelContext &ctx, const Vec2 &g, const Vec2 &x)
{
    if (ctx.d != 2)
        throw Error(ErrorKind::UnsupportedCase, "mesh-coupled transmission kernels need d = 2");
    const Eigen::VectorXd xi_dyn = dipole_vector_xi(ctx, Eigen::VectorXd(g));
    const Vec2 xi(xi_dyn[0], xi_dyn[1]);
    const double r2 = x.squaredNorm();
    if (r2 < 1e-28)
        throw Error(ErrorKind::OriginSingularity, "dipole evaluated at its center");
    const double w = ctx.omega_measure();
    // -ξ·∇E / |ω| with ∇E = -x/(2π r²), Hess E = -(I/r² - 2 x x^T/r^4)/(2π)
    PointEval p;
    p.value = xi.dot(x) / (2.0 * pi * r2 * w);
    p.grad = (xi / r2 - 2.0 * xi.dot(x) * x / (r2 * r2)) / (2.0 * pi * w);
    return p;
}

} // namespace toposd
