#pragma once

#include <string>

namespace toposd {

/// Closed catalogue of C1, increasing, bounded nonlinearities g(u) = scale * base(u).
struct Nonlinearity {
    enum class Kind { zero, arctan, tanh, logistic };

    Kind kind = Kind::zero;
    double scale = 1.0;

    double value(double u) const;
    double derivative(double u) const;
    bool is_zero() const { return kind == Kind::zero || scale == 0.0; }
    bool operator==(const Nonlinearity &o) const;
    /// Catalogue name, e.g. "arctan".
    std::string name() const;

    /// Accepts "zero", "arctan", "tanh", "logistic"; negative scales are rejected.
    static Nonlinearity parse(const std::string &name, double scale = 1.0);
};

struct ProblemSpec {
    enum class Kind { poisson_rhs, semilinear, transmission };

    Kind kind = Kind::poisson_rhs;
    /// Source on Omega and on D \ Omega (poisson_rhs, semilinear).
    double f1 = 0.0, f2 = 0.0;
    Nonlinearity g1, g2;
    /// Conductivity on Omega and on D \ Omega, uniform source f (transmission).
    double beta1 = 1.0, beta2 = 1.0;
    double f = 1.0;

    /// Throws ValidationError naming the offending field.
    void validate() const;
    bool is_linear() const { return kind != Kind::semilinear || (g1.is_zero() && g2.is_zero()); }
};

std::string to_string(ProblemSpec::Kind k);
ProblemSpec::Kind parse_problem_kind(const std::string &s);

} // namespace toposd
