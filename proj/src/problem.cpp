#include "toposd/problem.hpp"

#include "toposd/error.hpp"

#include <cmath>

namespace toposd {

double Nonlinearity::value(double u) const
{
    switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::arctan: return scale * std::atan(u);
    case Kind::tanh: return scale * std::tanh(u);
    case Kind::logistic: return scale * (1.0 / (1.0 + std::exp(-u)) - 0.5);
    }
    return 0.0;
}

double Nonlinearity::derivative(double u) const
{
    switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::arctan: return scale / (1.0 + u * u);
    case Kind::tanh: {
        const double c = std::cosh(u);
        return scale / (c * c);
    }
    case Kind::logistic: {
        const double s = 1.0 / (1.0 + std::exp(-u));
        return scale * s * (1.0 - s);
    }
    }
    return 0.0;
}

bool Nonlinearity::operator==(const Nonlinearity &o) const
{
    if (is_zero() && o.is_zero())
        return true;
    return kind == o.kind && scale == o.scale;
}

std::string Nonlinearity::name() const
{
    switch (kind) {
    case Kind::zero: return "zero";
    case Kind::arctan: return "arctan";
    case Kind::tanh: return "tanh";
    case Kind::logistic: return "logistic";
    }
    return "zero";
}

Nonlinearity Nonlinearity::parse(const std::string &name, double scale)
{
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw Error(ErrorKind::Validation, "nonlinearity scale must be a nonnegative number");
    Nonlinearity g;
    g.scale = scale;
    if (name == "zero")
        g.kind = Kind::zero;
    else if (name == "arctan")
        g.kind = Kind::arctan;
    else if (name == "tanh")
        g.kind = Kind::tanh;
    else if (name == "logistic")
        g.kind = Kind::logistic;
    else
        throw Error(ErrorKind::Validation, "unknown nonlinearity `" + name +
                                               "` (catalogue: zero, arctan, tanh, logistic)");
    return g;
}

void ProblemSpec::validate() const
{
    auto finite = [](double v, const char *field) {
        if (!std::isfinite(v))
            throw Error(ErrorKind::Validation, std::string("problem.") + field + " must be finite");
    };
    finite(f1, "f1");
    finite(f2, "f2");
    finite(f, "f");
    if (kind == Kind::transmission) {
        if (!(beta1 > 0.0) || !std::isfinite(beta1))
            throw Error(ErrorKind::Validation, "problem.beta1 must be positive");
        if (!(beta2 > 0.0) || !std::isfinite(beta2))
            throw Error(ErrorKind::Validation, "problem.beta2 must be positive");
    }
    if (kind == Kind::poisson_rhs && !(g1.is_zero() && g2.is_zero()))
        throw Error(ErrorKind::Validation, "problem.g1/g2 must be zero for poisson_rhs");
}

std::string to_string(ProblemSpec::Kind k)
{
    switch (k) {
    case ProblemSpec::Kind::poisson_rhs: return "poisson_rhs";
    case ProblemSpec::Kind::semilinear: return "semilinear";
    case ProblemSpec::Kind::transmission: return "transmission";
    }
    return "unknown";
}

ProblemSpec::Kind parse_problem_kind(const std::string &s)
{
    if (s == "poisson_rhs")
        return ProblemSpec::Kind::poisson_rhs;
    if (s == "semilinear")
        return ProblemSpec::Kind::semilinear;
    if (s == "transmission")
        return ProblemSpec::Kind::transmission;
    throw Error(ErrorKind::Validation,
                "problem.kind must be one of poisson_rhs, semilinear, transmission (got `" + s + "`)");
}

} // namespace toposd
