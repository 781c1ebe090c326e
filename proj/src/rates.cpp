#include "toposd/rates.hpp"

#include "toposd/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace toposd {
namespace {

    using Gauss = boost::math::quadrature::gauss<double, 20>;

    std::string fmt(double x)
    {
        std::ostringstream s;
        s << x;
        return s.str();
    }

    // errors at or below this are treated as exact cancellation
    constexpr double zero_signal_floor = 1e-10;

    void check_open(double p, double lo, double hi, const std::string &what)
    {
        if (!(p > lo && p < hi))
            throw Error(ErrorKind::UnsupportedCase,
                        what + ": p = " + fmt(p) + " outside the open range (" + fmt(lo) + ", " + fmt(hi) + ")");
    }

    double integrate_1d(const std::function<double(double)> &f, double a, double b)
    {
        return Gauss::integrate(f, a, b);
    }

    // Polar tensor rule over r_in < |x - c| < r_out: Gauss in r, trapezoid in angle
    double polar_integral(const Vec2 &c, double r_in, double r_out, const std::function<double(const Vec2 &)> &phi)
    {
        const int n_theta = 256;
        double s = 0.0;
        for (int k = 0; k < n_theta; ++k) {
            const double t = 2.0 * std::numbers::pi * k / n_theta;
            const Vec2 dir(std::cos(t), std::sin(t));
            s += integrate_1d([&](double r) { return r * phi(c + r * dir); }, r_in, r_out);
        }
        return s * 2.0 * std::numbers::pi / n_theta;
    }

    // Fan triangulation from the first vertex, Duffy-collapsed tensor Gauss rule per triangle
    double polygon_integral(const Polygon &poly, const std::function<double(const Vec2 &)> &phi, double &area)
    {
        double s = 0.0;
        area = 0.0;
        const auto &v = poly.vertices;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            const Vec2 a = v[0], e1 = v[i] - v[0], e2 = v[i + 1] - v[0];
            const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
            area += 0.5 * jac;
            s += jac * integrate_1d(
                           [&](double u) {
                               return integrate_1d([&](double w) { return (1.0 - u) * phi(a + u * e1 + (1.0 - u) * w * e2); },
                                                   0.0, 1.0);
                           },
                           0.0, 1.0);
        }
        return s;
    }

} // namespace

std::string to_string(RateCase c)
{
    switch (c) {
    case RateCase::rhs_lp: return "rhs_lp";
    case RateCase::rhs_w1p: return "rhs_w1p";
    case RateCase::rhs_ball_lp: return "rhs_ball_lp";
    case RateCase::transmission_lq: return "transmission_lq";
    }
    return "unknown";
}

RateCase parse_rate_case(const std::string &s)
{
    for (RateCase c : {RateCase::rhs_lp, RateCase::rhs_w1p, RateCase::rhs_ball_lp, RateCase::transmission_lq})
        if (to_string(c) == s)
            return c;
    throw Error(ErrorKind::Validation, "rate.case: unknown rate case '" + s + "'");
}

double theoretical_exponent(RateCase c, int d, double p)
{
    if (d < 2)
        throw Error(ErrorKind::UnsupportedCase, "dimension " + std::to_string(d) + " is not covered");
    const double dd = d;
    const double inf = std::numeric_limits<double>::infinity();
    switch (c) {
    case RateCase::rhs_lp:
        if (d == 2) {
            check_open(p, 2.0, inf, "rhs L^p rate in d = 2");
            return 2.0 / p;
        }
        check_open(p, dd / (dd - 1.0), dd / (dd - 2.0), "rhs L^p rate");
        return (dd - p * (dd - 2.0)) / p;
    case RateCase::rhs_w1p:
        if (d == 2) {
            check_open(p, 1.0, 2.0, "rhs W^{1,p} rate in d = 2");
            return 2.0 / p - 1.0;
        }
        check_open(p, 1.0, dd / (dd - 1.0), "rhs W^{1,p} rate");
        return (dd - p * (dd - 1.0)) / p;
    case RateCase::rhs_ball_lp:
        check_open(p, 1.0, d == 2 ? inf : dd / (dd - 2.0), "ball-improved L^p rate");
        return (dd - p * (dd - 2.0)) / p;
    case RateCase::transmission_lq:
        check_open(p, 1.0, dd / (dd - 1.0), "transmission L^q rate");
        return (dd - p * (dd - 1.0)) / p;
    }
    throw Error(ErrorKind::UnsupportedCase, "unknown rate case");
}

SlopeFit fit_slope(const std::vector<double> &eps, const std::vector<double> &errors)
{
    if (eps.size() != errors.size() || eps.size() < 2)
        throw Error(ErrorKind::Validation, "slope fit needs at least two (eps, error) pairs");
    const std::size_t n = eps.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(eps[i] > 0.0) || !(errors[i] > 0.0))
            throw Error(ErrorKind::Validation, "slope fit needs positive eps and errors");
        x[i] = std::log(eps[i]);
        y[i] = std::log(errors[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.residual = std::sqrt(rss / n);
    return f;
}

void RateStudy::validate() const
{
    spec.validate();
    if (eps.size() < 4)
        throw Error(ErrorKind::Validation, "rate.eps: need at least 4 values");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0))
            throw Error(ErrorKind::Validation, "rate.eps: values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw Error(ErrorKind::Validation, "rate.eps: values must be strictly decreasing");
    }
    if (!(p >= 1.0) || !std::isfinite(p))
        throw Error(ErrorKind::Validation, "rate.p must lie in [1, inf)");
    if (!(puncture >= 0.0))
        throw Error(ErrorKind::Validation, "rate.puncture must be non-negative");
    if (!(tolerance > 0.0))
        throw Error(ErrorKind::Validation, "rate.tolerance must be positive");
    if (seed.kind == InclusionSeed::Kind::circle_curve)
        throw Error(ErrorKind::UnsupportedSeed, "rate sweeps measure against a point-supported U0");
    if (exponent_case)
        theoretical_exponent(*exponent_case, 2, p);
}

bool RateReport::pass() const
{
    if (!fit || !exponent)
        return false;
    return std::abs(fit->slope - *exponent) <= tolerance;
}

RateReport epsilon_table(const RateStudy &study, const MeshPtr &mesh, const NumericOptions &opts, int threads)
{
    study.validate();
    RateReport rep;
    rep.case_id = study.case_id;
    rep.norm = study.norm;
    rep.p = study.p;
    rep.tolerance = study.tolerance;
    rep.eps = study.eps;
    rep.h = mesh->max_diameter();
    if (study.exponent_case)
        rep.exponent = theoretical_exponent(*study.exponent_case, 2, study.p);
    const double eps_min = study.eps.back();
    if (rep.h > eps_min / 8.0 * (1.0 + 1e-9))
        throw Error(ErrorKind::MeshTooCoarse,
                    "mesh size " + fmt(rep.h) + " exceeds eps_min/8 = " + fmt(eps_min / 8.0));

    const Field state = solve_state(study.spec, mesh, study.omega, opts);
    StateDerivativeResult u0;
    switch (study.spec.kind) {
    case ProblemSpec::Kind::poisson_rhs:
        u0 = rhs_linear_U0_splitting(study.spec, mesh, study.omega, study.seed, opts);
        break;
    case ProblemSpec::Kind::transmission:
        u0 = transmission_U0(study.spec, mesh, study.omega, study.seed, state, opts);
        break;
    case ProblemSpec::Kind::semilinear:
        u0 = semilinear_U0_measure(study.spec, mesh, study.omega, study.seed, state, opts);
        break;
    }
    rep.route = to_string(u0.route);
    rep.puncture = study.puncture;

    NormSpec ns;
    ns.kind = study.norm;
    ns.p = study.p;
    if (u0.u0.has_singular() || rep.puncture > 0.0) {
        SingularRefinement sr;
        sr.center = study.seed.center;
        sr.radius = std::max(2.0 * rep.h, rep.puncture);
        sr.puncture = rep.puncture;
        ns.singular = sr;
    }

    rep.errors.assign(study.eps.size(), 0.0);
    auto member = [&](std::size_t k) {
        const Field ue = differential_quotient(study.spec, mesh, study.omega, study.seed, study.eps[k], opts, &state);
        rep.errors[k] = norm(
            *mesh,
            [&](int t, const Vec3 &b, const Vec2 &x) {
                const PointEval a = ue.eval(t, b), z = u0.u0.eval(t, b, x);
                return PointEval{a.value - z.value, a.grad - z.grad};
            },
            ns);
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(study.eps.size())));
    if (nt == 1) {
        for (std::size_t k = 0; k < study.eps.size(); ++k)
            member(k);
    } else {
        std::vector<std::exception_ptr> errs(study.eps.size());
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < study.eps.size(); k += nt) {
                    try {
                        member(k);
                    } catch (...) {
                        errs[k] = std::current_exception();
                    }
                }
            });
        for (auto &t : pool)
            t.join();
        for (auto &e : errs)
            if (e)
                std::rethrow_exception(e);
    }

    if (*std::max_element(rep.errors.begin(), rep.errors.end()) <= zero_signal_floor) {
        rep.zero_signal = true;
        rep.flag = "degenerate: zero signal";
        return rep;
    }
    rep.fit = fit_slope(rep.eps, rep.errors);
    if (rep.fit->residual > 0.1)
        rep.flag = "degenerate: log-log residual " + fmt(rep.fit->residual);
    return rep;
}

RateReport epsilon_sweep(const RateStudy &study, const MeshPtr &mesh, const NumericOptions &opts, int threads)
{
    RateReport rep = epsilon_table(study, mesh, opts, threads);
    if (rep.fit && rep.fit->residual > 0.1)
        throw Error(ErrorKind::DegenerateFit, "case " + rep.case_id + ": log-log residual " +
                                                  fmt(rep.fit->residual) + " exceeds 0.1 (slope " +
                                                  fmt(rep.fit->slope) + ")");
    return rep;
}

WeakProbe weak_convergence_probe(const ProblemSpec &spec, const MeshPtr &mesh, const Region &omega,
                                 const InclusionSeed &seed, const std::function<double(const Vec2 &)> &phi,
                                 const std::vector<double> &eps, const NumericOptions &opts)
{
    if (spec.kind == ProblemSpec::Kind::transmission)
        throw Error(ErrorKind::UnsupportedCase, "weak convergence probe covers the rhs and semilinear classes");
    const Field state = solve_state(spec, mesh, omega, opts);
    const StateDerivativeResult u0 = semilinear_U0_measure(spec, mesh, omega, seed, state, opts);
    const Field phi_h = Field::interpolate(mesh, phi);
    auto pairing = [&](const Field &f) {
        double s = 0.0;
        integrate(*mesh, nullptr, 4,
                  [&](int t, const Vec3 &b, const Vec2 &, double w, bool) { s += w * f.value(t, b) * phi_h.value(t, b); });
        return s;
    };
    WeakProbe out;
    out.limit_pairing = pairing(u0.u0.regular);
    for (double e : eps) {
        const Field ue = differential_quotient(spec, mesh, omega, seed, e, opts, &state);
        out.eps.push_back(e);
        out.pairing.push_back(std::abs(pairing(ue - u0.u0.regular)));
    }
    for (std::size_t k = 1; k < out.pairing.size(); ++k)
        if (out.pairing[k] > 1.05 * out.pairing[k - 1])
            out.monotone = false;
    return out;
}

double shape_average(const Shape &s, const std::function<double(const Vec2 &)> &phi)
{
    if (const auto *d = std::get_if<Disk>(&s))
        return polar_integral(d->center, 0.0, d->radius, phi) / shape_area(s);
    if (const auto *a = std::get_if<Annulus>(&s))
        return polar_integral(a->center, a->r_in, a->r_out, phi) / shape_area(s);
    double area = 0.0;
    const double v = polygon_integral(std::get<Polygon>(s), phi, area);
    return v / area;
}

MeasureProbe measure_probe(const InclusionSeed &seed, const std::function<double(const Vec2 &)> &phi,
                           const std::vector<double> &eps, HoldAll holdall, int curve_nodes)
{
    // a scaled shape concentrates at its centre
    const MeasureRHS mu = seed.kind == InclusionSeed::Kind::scaled_shape ? limit_measure(InclusionSeed::point(seed.center))
                                                                         : limit_measure(seed, curve_nodes);
    double limit = 0.0;
    for (std::size_t k = 0; k < mu.nodes.size(); ++k)
        limit += mu.weights[k] * phi(mu.nodes[k]);
    MeasureProbe out;
    for (double e : eps) {
        out.eps.push_back(e);
        out.gap.push_back(std::abs(shape_average(dilate(seed, e, holdall).shape, phi) - limit));
    }
    for (std::size_t k = 1; k < out.gap.size(); ++k)
        out.max_ratio = std::max(out.max_ratio, out.gap[k] / out.gap[k - 1]);
    return out;
}

} // namespace toposd
