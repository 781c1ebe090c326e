#pragma once

#include "toposd/field.hpp"
#include "toposd/geometry.hpp"
#include "toposd/kernels.hpp"
#include "toposd/pde.hpp"
#include "toposd/problem.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toposd {

/// FEM field plus an optional analytic singular part centered at x0.
struct SplitField {
    Field regular;
    std::function<PointEval(const Vec2 &)> singular;
    Vec2 center = Vec2::Zero();

    bool has_singular() const { return static_cast<bool>(singular); }
    PointEval eval(int t, const Vec3 &bary, const Vec2 &x) const;
    Evaluator evaluator() const;
    double sample(const Vec2 &x) const;
    /// Nodal interpolant of the sum; the singular part is dropped at a vertex sitting on the center.
    Field nodal() const;
};

enum class Route { quotient_limit, measure_solve, splitting };
std::string to_string(Route r);

struct StateDerivativeResult {
    SplitField u0;
    Route route = Route::measure_solve;
    InclusionSeed seed;
    std::optional<double> eps;
    ProblemSpec spec;
    int sgn = 1;
    /// Transmission only: recovered ∇u(x0), C_β and ξ.
    std::optional<Vec2> grad_x0;
    std::optional<double> c_beta;
    std::optional<Vec2> xi;
};

/// Kernel constants of a seed under the given problem and state.
KernelContext kernel_context(const ProblemSpec &spec, const Region &omega, const InclusionSeed &seed,
                             const Field *state = nullptr);

/// (u over Omega(E_ε) - u over Omega) / |E_ε| on one mesh.
/// Throws MeshTooCoarse when h > ε/8. `base` reuses an already solved u over Omega.
Field differential_quotient(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                            const InclusionSeed &seed, double eps, const NumericOptions &opts,
                            const Field *base = nullptr);

/// Linearized solve with the signed measure load sgn ((g2 - g1)(u) + f1 - f2) μ_E.
StateDerivativeResult semilinear_U0_measure(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                            const InclusionSeed &seed, const Field &state,
                                            const NumericOptions &opts);

/// sgn (f1 - f2) E(x - x0) plus its harmonic boundary corrector.
StateDerivativeResult rhs_linear_U0_splitting(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                              const InclusionSeed &seed, const NumericOptions &opts);

/// sgn c E(x - x0) plus the reaction-diffusion corrector with load -W sgn c E.
StateDerivativeResult semilinear_U0_splitting(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                              const InclusionSeed &seed, const Field &state,
                                              const NumericOptions &opts);

/// Dipole C_β g·(x - x0)/(|ω||x - x0|²) plus the corrector with the interface load on ∂Omega.
StateDerivativeResult transmission_U0(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                      const InclusionSeed &seed, const Field &state, const NumericOptions &opts);

/// Column G(y, ·) of the inverse linearized operator (unit Dirac at y).
Field green_column(const LinearizedOperator &op, const Vec2 &y);

struct Superposition {
    Field direct;
    Field superposed;
    /// Number of Green columns summed.
    int columns = 0;
};

/// ∫ sgn_Omega(y) F(y) h(y) G(y, ·) dy with vertex quadrature: one solve with the lumped load
/// and, for verification, the explicit sum of Green columns.
Superposition control_derivative_superposition(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                               const Field &state, const Field &h, const NumericOptions &opts,
                                               bool with_columns = true);

struct CorrectorSample {
    Vec2 xi = Vec2::Zero();
    double value = 0.0;
    bool valid = true;
};

/// (u_ε - u)(x0 + ε ξ) / ε^a at the given frame points; points leaving D are flagged invalid.
std::vector<CorrectorSample> rescaled_corrector(const Field &u_eps, const Field &u, double eps, const Vec2 &x0,
                                                double a, const std::vector<Vec2> &frame);

/// Arc measure of a circle: nodes, outward normals and weights of the trapezoid rule.
struct ArcRule {
    std::vector<Vec2> nodes, normals;
    std::vector<double> weights;
};
ArcRule circle_rule(const Disk &d, int n);

} // namespace toposd
