#include "toposd/solver.hpp"

#include "toposd/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace toposd {

SolverKind parse_solver_kind(const std::string &s)
{
    if (s == "auto" || s == "automatic")
        return SolverKind::automatic;
    if (s == "direct")
        return SolverKind::direct;
    if (s == "cg")
        return SolverKind::cg;
    throw Error(ErrorKind::Validation, "solver.kind must be auto, direct or cg (got `" + s + "`)");
}

std::string to_string(SolverKind k)
{
    switch (k) {
    case SolverKind::automatic: return "auto";
    case SolverKind::direct: return "direct";
    case SolverKind::cg: return "cg";
    }
    return "auto";
}

struct DirichletSolver::Impl {
    std::vector<char> constrained;
    std::vector<int> free_of;  // vertex -> free index or -1
    std::vector<int> vertex_of;
    SparseMatrix a_ff, a_fc;
    bool direct = true;
    double tolerance = 1e-10;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    mutable int iterations = 0;
};

DirichletSolver::DirichletSolver(const SparseMatrix &matrix, const std::vector<char> &constrained,
                                 const SolverOptions &options)
    : impl_(std::make_unique<Impl>())
{
    const auto n = matrix.rows();
    if (matrix.cols() != n || static_cast<Eigen::Index>(constrained.size()) != n)
        throw Error(ErrorKind::Validation, "system dimensions do not match the constraint flags");
    auto &im = *impl_;
    im.constrained = constrained;
    im.free_of.assign(n, -1);
    std::vector<int> cons_of(n, -1);
    int nf = 0, nc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (constrained[i]) {
            cons_of[i] = nc++;
        } else {
            im.free_of[i] = nf++;
            im.vertex_of.push_back(static_cast<int>(i));
        }
    }
    std::vector<Eigen::Triplet<double>> tff, tfc;
    for (Eigen::Index col = 0; col < matrix.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
            const int r = im.free_of[it.row()];
            if (r < 0)
                continue;
            if (im.free_of[it.col()] >= 0)
                tff.emplace_back(r, im.free_of[it.col()], it.value());
            else
                tfc.emplace_back(r, cons_of[it.col()], it.value());
        }
    im.a_ff.resize(nf, nf);
    im.a_ff.setFromTriplets(tff.begin(), tff.end());
    im.a_fc.resize(nf, nc);
    im.a_fc.setFromTriplets(tfc.begin(), tfc.end());
    im.tolerance = options.cg_tolerance;

    switch (options.kind) {
    case SolverKind::direct: im.direct = true; break;
    case SolverKind::cg: im.direct = false; break;
    case SolverKind::automatic: im.direct = static_cast<std::size_t>(n) < options.direct_threshold; break;
    }
    if (nf == 0)
        return;
    if (im.direct) {
        im.ldlt.compute(im.a_ff);
        if (im.ldlt.info() != Eigen::Success)
            throw Error(ErrorKind::NoConvergence, "sparse LDLT factorization failed");
        if (im.ldlt.vectorD().minCoeff() <= 0.0)
            throw Error(ErrorKind::NoConvergence, "system matrix is not positive definite");
    } else {
        im.cg.setTolerance(options.cg_tolerance);
        im.cg.setMaxIterations(static_cast<Eigen::Index>(std::ceil(20.0 * std::sqrt(static_cast<double>(nf)))));
        im.cg.compute(im.a_ff);
    }
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver &&) noexcept = default;
DirichletSolver &DirichletSolver::operator=(DirichletSolver &&) noexcept = default;

bool DirichletSolver::uses_direct() const { return impl_->direct; }
int DirichletSolver::last_iterations() const { return impl_->iterations; }

Eigen::VectorXd DirichletSolver::solve(const Eigen::VectorXd &rhs, const Eigen::VectorXd &boundary_values) const
{
    const auto &im = *impl_;
    const auto n = static_cast<Eigen::Index>(im.free_of.size());
    if (rhs.size() != n)
        throw Error(ErrorKind::Validation, "right-hand side length does not match the system");
    const auto nf = im.a_ff.rows();
    const auto nc = im.a_fc.cols();
    Eigen::VectorXd uc = Eigen::VectorXd::Zero(nc);
    if (boundary_values.size() != 0) {
        if (boundary_values.size() != n)
            throw Error(ErrorKind::Validation, "boundary value length does not match the system");
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (im.constrained[i])
                uc[k++] = boundary_values[i];
    }
    Eigen::VectorXd bf(nf);
    for (Eigen::Index i = 0; i < nf; ++i)
        bf[i] = rhs[im.vertex_of[i]];
    if (nc > 0)
        bf -= im.a_fc * uc;

    Eigen::VectorXd uf;
    if (nf == 0) {
        uf.resize(0);
    } else if (im.direct) {
        uf = im.ldlt.solve(bf);
        im.iterations = 0;
    } else if (bf.norm() == 0.0) {
        uf = Eigen::VectorXd::Zero(nf);
        im.iterations = 0;
    } else {
        uf = im.cg.solve(bf);
        im.iterations = static_cast<int>(im.cg.iterations());
        if (im.cg.info() != Eigen::Success || !(im.cg.error() <= im.tolerance))
            throw Error(ErrorKind::NoConvergence, "conjugate gradients stopped after " +
                                                      std::to_string(im.cg.iterations()) +
                                                      " iterations at relative residual " +
                                                      std::to_string(im.cg.error()));
    }
    Eigen::VectorXd u(n);
    Eigen::Index kf = 0, kc = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        u[i] = im.constrained[i] ? uc[kc++] : uf[kf++];
    return u;
}

Eigen::VectorXd solve_dirichlet(const SparseSystem &system, const SolverOptions &options)
{
    DirichletSolver solver(system.matrix, system.constrained, options);
    return solver.solve(system.rhs, system.boundary_values);
}

} // namespace toposd
