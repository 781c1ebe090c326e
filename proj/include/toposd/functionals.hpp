#pragma once

#include "toposd/field.hpp"
#include "toposd/geometry.hpp"
#include "toposd/pde.hpp"
#include "toposd/problem.hpp"
#include "toposd/state_derivative.hpp"

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace toposd {

/// One term c·F(u) of a shape functional.
struct FunctionalTerm {
    enum class Kind { l2_tracking, lr_tracking, grad_tracking, energy };
    Kind kind = Kind::l2_tracking;
    double coefficient = 1.0;
    /// Exponent of lr_tracking, r > 2.
    double r = 4.0;
    std::function<double(const Vec2 &)> u_ref = [](const Vec2 &) { return 0.0; };
};

/// Sum of terms. l2: ∫(u - u_ref)², lr: ∫|u - u_ref|^r, grad: ∫|∇u - ∇u_ref|², energy: ∫β|∇u|².
struct FunctionalSpec {
    std::vector<FunctionalTerm> terms;

    static FunctionalSpec single(FunctionalTerm::Kind kind, double u_ref = 0.0, double r = 4.0);
    void validate() const;
    std::string name() const;
};

std::string to_string(FunctionalTerm::Kind k);
FunctionalTerm::Kind parse_functional_kind(const std::string &s);

/// J(u); `omega` and the problem's conductivities weight the energy term (β = 1 for the semilinear class).
double evaluate(const FunctionalSpec &j, const Field &u, const ProblemSpec &spec, const CutCells *omega = nullptr);
double evaluate(const FunctionalSpec &j, const Field &u);

/// Load vector of -F'(u) tested with the P1 basis.
Eigen::VectorXd adjoint_load(const FunctionalSpec &j, const Field &u);

/// Adjoint state of the linearized operator (semilinear) or of -div(β∇·) (transmission).
Field adjoint_state(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                    const Field &state, const NumericOptions &opts);

/// -sgn μ_E(W) with W = ((g2 - g1)(u) + f1 - f2) p.
double topo_derivative_semilinear(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh,
                                  const Region &omega, const InclusionSeed &seed, const Field &state,
                                  const NumericOptions &opts);

/// F'(u)(U0) by quadrature. Throws InadmissibleRoute for gradient and energy terms in the transmission class.
double topo_derivative_chain(const FunctionalSpec &j, const ProblemSpec &spec, const Field &state,
                             const SplitField &u0);

/// -sgn (β2 - β1)(C_β + 1) ∇u(x0)·∇p(x0) for the l2 tracking functional and a ball.
double topo_derivative_transmission_adjoint(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh,
                                            const Region &omega, const InclusionSeed &seed, const Field &state,
                                            const NumericOptions &opts);

struct FdOracle {
    std::vector<std::pair<double, double>> table;
    double extrapolated = 0.0;
};

/// Limit of q(ε) = D + aε^order through the two smallest ε of the table.
double richardson(const std::vector<std::pair<double, double>> &table, double order);

/// Remainder order log(|q1 - D| / |q2 - D|) / log(ε1/ε2) against a reference limit D, two smallest ε.
double observed_remainder_order(const std::vector<std::pair<double, double>> &table, double limit);

/// Quotients (J(Omega(E_ε)) - J(Omega)) / |E_ε| and their first-order Richardson limit from the two smallest ε.
FdOracle fd_oracle(const FunctionalSpec &j, const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                   const InclusionSeed &seed, const std::vector<double> &eps, const NumericOptions &opts,
                   const Field *state = nullptr);

struct TopoDerivativeReport {
    std::map<std::string, double> routes;
    std::vector<std::pair<double, double>> table;
    InclusionSeed seed;
    std::string functional;
    ProblemSpec::Kind problem = ProblemSpec::Kind::semilinear;
    /// |a - b| / max(|a|, |b|) for each pair of routes, keyed "a|b"; absolute |a - b| when both are below 1e-12.
    std::map<std::string, double> pairwise_rel_diff() const;
};

} // namespace toposd
