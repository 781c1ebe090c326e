#pragma once

#include "toposd/geometry.hpp"
#include "toposd/types.hpp"

#include <Eigen/Core>

namespace toposd {

/// Constants shared by the closed-form objects of one perturbation case.
struct KernelContext {
    enum class Case { rhs_perturbation, semilinear, transmission };

    int d = 2;
    Case kind = Case::rhs_perturbation;
    int sgn = 1;
    OmegaShape omega = OmegaShape::ball;
    double f1 = 0.0, f2 = 0.0;
    /// g2(u(x0)) - g1(u(x0)).
    double g_x0 = 0.0;
    double beta1 = 1.0, beta2 = 1.0;

    /// |omega| in dimension d (ball: π or 4π/3; square of side 2: 4 or 8).
    double omega_measure() const;
    /// Coefficient at x0: β2 outside Omega, β1 inside.
    double beta_x0() const { return sgn > 0 ? beta2 : beta1; }
    /// Source contrast: f1 - f2 (rhs), g_x0 + f1 - f2 (semilinear).
    double contrast() const;
    /// Throws on invalid dimension, sign or coefficients.
    void validate() const;
};

/// -(1/2π) ln|x| for d = 2, 1/(4π|x|) for d = 3. Throws OriginSingularity for |x| < 1e-14.
double fundamental_solution(int d, double r);
double fundamental_solution(const Vec2 &x);
/// ∇E(x) = -x / (2π|x|^2) in d = 2.
Vec2 fundamental_solution_gradient(const Vec2 &x);

/// sgn (f1 - f2) E(x).
double singular_part_rhs(const KernelContext &ctx, double r);

/// sgn · contrast · ∫_ω E(x - y) dy (d = 2). Relative accuracy 1e-8 outside ω, 1e-6 inside.
double volume_potential_K(const KernelContext &ctx, const Vec2 &x);
/// ∫_ω E(x - y) dy without constants.
double omega_log_potential(OmegaShape w, const Vec2 &x);

/// Logarithmic corrector constant: -sgn (f1 - f2)/(2π) for rhs, -sgn g|ω|/(2π) for semilinear.
double log_corrector_b(const KernelContext &ctx);

/// C_β = sgn (β2 - β1) / (β_in + (d - 1) β_out), the interior factor of the ball corrector.
double transmission_C_beta(const KernelContext &ctx);

struct KernelValue {
    double value = 0.0;
    Eigen::VectorXd grad;
};

/// K(x) = C_β g·x inside the unit ball and C_β g·x/|x|^d outside, with gradient.
KernelValue transmission_K_ball(const KernelContext &ctx, const Eigen::VectorXd &x, const Eigen::VectorXd &g);

/// A_ω = C_β I_d.
Eigen::MatrixXd polarisation_matrix_ball(const KernelContext &ctx);

/// ξ = sgn (β2 - β1)/β(x0) |ω| (A_ω + I) g.
Eigen::VectorXd dipole_vector_xi(const KernelContext &ctx, const Eigen::VectorXd &g);

/// Singular part of the transmission limit: -ξ·∇E(x)/|ω| = C_β g·x / (|ω| |x|^2), d = 2.
PointEval transmission_singular(const KernelContext &ctx, const Vec2 &g, const Vec2 &x);

} // namespace toposd
