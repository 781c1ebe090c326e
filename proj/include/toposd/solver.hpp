#pragma once

#include "toposd/assembly.hpp"

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <memory>
#include <string>
#include <vector>

namespace toposd {

enum class SolverKind { automatic, direct, cg };

SolverKind parse_solver_kind(const std::string &s);
std::string to_string(SolverKind k);

struct SolverOptions {
    SolverKind kind = SolverKind::automatic;
    /// Relative residual target of preconditioned CG.
    double cg_tolerance = 1e-10;
    /// `automatic` factorizes directly below this vertex count.
    std::size_t direct_threshold = 20000;
};

/// Symmetric system with Dirichlet constraints on flagged indices.
struct SparseSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<char> constrained;
    /// Prescribed values on constrained indices (full length); empty means zero.
    Eigen::VectorXd boundary_values;
};

/// Eliminates the constrained unknowns once and solves for any number of
/// right-hand sides. The direct path factorizes with sparse LDLT; the CG path
/// uses a diagonal preconditioner and at most 20 sqrt(N) iterations.
class DirichletSolver {
public:
    DirichletSolver(const SparseMatrix &matrix, const std::vector<char> &constrained,
                    const SolverOptions &options = {});
    ~DirichletSolver();
    DirichletSolver(DirichletSolver &&) noexcept;
    DirichletSolver &operator=(DirichletSolver &&) noexcept;

    /// Full-length solution; constrained entries equal `boundary_values` (zero when empty).
    Eigen::VectorXd solve(const Eigen::VectorXd &rhs, const Eigen::VectorXd &boundary_values = {}) const;

    bool uses_direct() const;
    int last_iterations() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd solve_dirichlet(const SparseSystem &system, const SolverOptions &options = {});

} // namespace toposd
