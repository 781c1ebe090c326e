#pragma once

#include "toposd/assembly.hpp"
#include "toposd/cut_cell.hpp"
#include "toposd/field.hpp"
#include "toposd/geometry.hpp"
#include "toposd/problem.hpp"
#include "toposd/solver.hpp"

#include <memory>
#include <vector>

namespace toposd {

struct NumericOptions {
    SolverOptions solver;
    int cut_depth = 4;
    int curve_nodes = 256;
    int interface_nodes = 512;
};

struct NewtonReport {
    /// Residual norms, one per iterate, starting with the initial guess.
    std::vector<double> residuals;
    int iterations = 0;
};

/// ρ_Ω(x, u): g1 on Omega, g2 elsewhere.
double reaction_value(const ProblemSpec &spec, bool inside, double u);
/// ∂_u ρ_Ω(x, u).
double reaction_derivative(const ProblemSpec &spec, bool inside, double u);

/// -Δu + ρ_Ω(x,u) = f1 χ + f2 (1 - χ), u = 0 on ∂D, by damped Newton.
/// Stops at residual <= 1e-10 (1 + |load|); throws NewtonStalled when the
/// residual shrinks by less than 1e-3 over 5 iterations.
Field solve_semilinear(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                       const SolverOptions &solver = {}, NewtonReport *report = nullptr);

/// -div(β_Ω ∇u) = f, u = 0 on ∂D.
Field solve_transmission(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                         const SolverOptions &solver = {});

/// Dispatch on the problem kind; builds the cut cells of `omega`.
Field solve_state(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega, const NumericOptions &opts,
                  NewtonReport *report = nullptr);
Field solve_state(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega, const NumericOptions &opts,
                  NewtonReport *report = nullptr);

/// Area-weighted mean of element gradients over the triangles within 2h of x0.
/// With a region, throws PatchTouchesInterface when the patch meets ∂Omega.
Vec2 recover_gradient(const Field &u, const Vec2 &x0, const Region *omega = nullptr);

/// Linearized operator at a solved state: -Δ + W_Ω for the semilinear class,
/// -div(β_Ω ∇·) for transmission. Factorized once, reused for every load.
class LinearizedOperator {
public:
    LinearizedOperator(MeshPtr mesh, SparseMatrix matrix, const SolverOptions &solver);

    static LinearizedOperator build(const ProblemSpec &spec, const MeshPtr &mesh, const CutCells &omega,
                                    const Field &state, const SolverOptions &solver);

    const SparseMatrix &matrix() const { return matrix_; }
    const MeshPtr &mesh() const { return mesh_; }
    /// Homogeneous or prescribed Dirichlet data on ∂D.
    Field solve(const Eigen::VectorXd &load, const Eigen::VectorXd &boundary_values = {}) const;

private:
    MeshPtr mesh_;
    SparseMatrix matrix_;
    std::shared_ptr<DirichletSolver> solver_;
};

} // namespace toposd
