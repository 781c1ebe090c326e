#pragma once

#include "toposd/field.hpp"
#include "toposd/geometry.hpp"
#include "toposd/pde.hpp"
#include "toposd/problem.hpp"
#include "toposd/state_derivative.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toposd {

/// Rate estimates with a known exponent.
enum class RateCase { rhs_lp, rhs_w1p, rhs_ball_lp, transmission_lq };

std::string to_string(RateCase c);
RateCase parse_rate_case(const std::string &s);

/// Exponent a of ‖U_ε - U0‖ ≤ C ε^a. Throws UnsupportedCase outside the proven ranges.
double theoretical_exponent(RateCase c, int d, double p);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Root mean square of the log-log residuals.
    double residual = 0.0;
};

/// Ordinary least squares of log(error) against log(ε).
SlopeFit fit_slope(const std::vector<double> &eps, const std::vector<double> &errors);

struct RateStudy {
    std::string case_id = "rate";
    ProblemSpec spec;
    Region omega;
    InclusionSeed seed;
    std::vector<double> eps{0.2, 0.14, 0.1, 0.07, 0.05};
    NormSpec::Kind norm = NormSpec::Kind::lp;
    double p = 2.0;
    /// Radius excluded around x0. The singular part of U0 is evaluated analytically on graded
    /// quadrature, so nothing is excluded by default.
    double puncture = 0.0;
    /// Exponent to compare against; none for the semilinear class.
    std::optional<RateCase> exponent_case;
    double tolerance = 0.15;

    void validate() const;
};

struct RateReport {
    std::string case_id;
    NormSpec::Kind norm = NormSpec::Kind::lp;
    double p = 2.0;
    double puncture = 0.0;
    double h = 0.0;
    std::string route;
    std::vector<double> eps, errors;
    std::optional<SlopeFit> fit;
    std::optional<double> exponent;
    double tolerance = 0.15;
    /// Every error at the solver noise floor: no slope is fitted.
    bool zero_signal = false;
    std::string flag;

    /// |slope - exponent| <= tolerance; false without an exponent or a fit.
    bool pass() const;
};

/// Solves U_ε along the ε list and measures it against the route-appropriate U0
/// (splitting for rhs and transmission, measure solve for semilinear).
/// Throws MeshTooCoarse when h > ε_min/8 and DegenerateFit when the log-log residual exceeds 0.1.
/// `threads` > 1 solves sweep members concurrently.
RateReport epsilon_sweep(const RateStudy &study, const MeshPtr &mesh, const NumericOptions &opts, int threads = 1);

/// Same sweep, returning the table without fitting or throwing on a poor fit.
RateReport epsilon_table(const RateStudy &study, const MeshPtr &mesh, const NumericOptions &opts, int threads = 1);

struct WeakProbe {
    std::vector<double> eps, pairing;
    /// Each entry at most 1.05 times the previous one.
    bool monotone = true;
    double limit_pairing = 0.0;
};

/// |⟨U_ε - U0, φ⟩| along the sweep with U0 from the measure solve (rhs or semilinear class).
WeakProbe weak_convergence_probe(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                 const InclusionSeed &seed, const std::function<double(const Vec2 &)> &phi,
                                 const std::vector<double> &eps, const NumericOptions &opts);

/// (1/|S|) ∫_S φ over a disk, annulus or convex polygon, by tensor Gauss rules.
double shape_average(const Shape &s, const std::function<double(const Vec2 &)> &phi);

struct MeasureProbe {
    std::vector<double> eps, gap;
    /// Largest gap(ε_{k+1}) / gap(ε_k).
    double max_ratio = 0.0;
};

/// |(1/|E_ε|)∫_{E_ε} φ - ⟨φ, μ_E⟩| along the ε list.
MeasureProbe measure_probe(const InclusionSeed &seed, const std::function<double(const Vec2 &)> &phi,
                           const std::vector<double> &eps, HoldAll holdall, int curve_nodes = 256);

} // namespace toposd
