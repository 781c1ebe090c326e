#include "toposd/geometry.hpp"

#include "toposd/error.hpp"
#include "toposd/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace toposd {
namespace {

    template <class... Ts> struct overloaded : Ts... {
        using Ts::operator()...;
    };

    double max_vertex_distance(const Vec2 &c, const Vec2 &a, const Vec2 &b, const Vec2 &d)
    {
        return std::max({(a - c).norm(), (b - c).norm(), (d - c).norm()});
    }

    bool inside_convex(const Polygon &p, const Vec2 &x)
    {
        const auto &v = p.vertices;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (orient(v[i], v[(i + 1) % v.size()], x) <= 0.0)
                return false;
        return true;
    }

    double boundary_distance(const Polygon &p, const Vec2 &x)
    {
        double d = std::numeric_limits<double>::infinity();
        const auto &v = p.vertices;
        for (std::size_t i = 0; i < v.size(); ++i)
            d = std::min(d, point_segment_distance(x, v[i], v[(i + 1) % v.size()]));
        return d;
    }

    // projection interval of a point set onto an axis
    std::pair<double, double> project(const Vec2 *pts, std::size_t n, const Vec2 &axis)
    {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = pts[i].dot(axis);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        return {lo, hi};
    }

    bool separated(const Polygon &p, const Vec2 &a, const Vec2 &b, const Vec2 &c)
    {
        const Vec2 tri[3] = {a, b, c};
        const auto &v = p.vertices;
        auto test_axes = [&](const Vec2 *poly, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 e = poly[(i + 1) % n] - poly[i];
                const Vec2 axis(-e.y(), e.x());
                auto [l1, h1] = project(tri, 3, axis);
                auto [l2, h2] = project(v.data(), v.size(), axis);
                if (h1 <= l2 || h2 <= l1)
                    return true;
            }
            return false;
        };
        return test_axes(v.data(), v.size()) || test_axes(tri, 3);
    }

    Cover cover_or(Cover a, Cover b)
    {
        if (a == Cover::in || b == Cover::in)
            return Cover::in;
        if (a == Cover::out && b == Cover::out)
            return Cover::out;
        return Cover::cut;
    }

} // namespace

bool contains(const Shape &s, const Vec2 &x)
{
    return std::visit(overloaded{
                          [&](const Disk &d) { return (x - d.center).norm() < d.radius; },
                          [&](const Polygon &p) { return inside_convex(p, x); },
                          [&](const Annulus &a) {
                              const double r = (x - a.center).norm();
                              return r > a.r_in && r < a.r_out;
                          },
                      },
                      s);
}

double signed_distance(const Shape &s, const Vec2 &x)
{
    return std::visit(overloaded{
                          [&](const Disk &d) { return (x - d.center).norm() - d.radius; },
                          [&](const Polygon &p) {
                              const double d = boundary_distance(p, x);
                              return inside_convex(p, x) ? -d : d;
                          },
                          [&](const Annulus &a) {
                              const double r = (x - a.center).norm();
                              return std::max(a.r_in - r, r - a.r_out);
                          },
                      },
                      s);
}

Cover classify(const Shape &s, const Vec2 &a, const Vec2 &b, const Vec2 &c)
{
    return std::visit(overloaded{
                          [&](const Disk &d) {
                              const double dmin = point_triangle_distance(d.center, a, b, c);
                              if (dmin >= d.radius)
                                  return Cover::out;
                              if (max_vertex_distance(d.center, a, b, c) <= d.radius)
                                  return Cover::in;
                              return Cover::cut;
                          },
                          [&](const Polygon &p) {
                              if (separated(p, a, b, c))
                                  return Cover::out;
                              auto inside_closed = [&](const Vec2 &x) {
                                  const auto &v = p.vertices;
                                  for (std::size_t i = 0; i < v.size(); ++i)
                                      if (orient(v[i], v[(i + 1) % v.size()], x) < 0.0)
                                          return false;
                                  return true;
                              };
                              if (inside_closed(a) && inside_closed(b) && inside_closed(c))
                                  return Cover::in;
                              return Cover::cut;
                          },
                          [&](const Annulus &an) {
                              const double dmin = point_triangle_distance(an.center, a, b, c);
                              const double dmax = max_vertex_distance(an.center, a, b, c);
                              if (dmax <= an.r_in || dmin >= an.r_out)
                                  return Cover::out;
                              if (dmin >= an.r_in && dmax <= an.r_out)
                                  return Cover::in;
                              return Cover::cut;
                          },
                      },
                      s);
}

double shape_area(const Shape &s)
{
    return std::visit(overloaded{
                          [](const Disk &d) { return std::numbers::pi * d.radius * d.radius; },
                          [](const Polygon &p) {
                              double a = 0.0;
                              const auto &v = p.vertices;
                              for (std::size_t i = 0; i < v.size(); ++i)
                                  a += cross2(v[i], v[(i + 1) % v.size()]);
                              return 0.5 * a;
                          },
                          [](const Annulus &an) {
                              return std::numbers::pi * (an.r_out * an.r_out - an.r_in * an.r_in);
                          },
                      },
                      s);
}

Polygon make_polygon(std::vector<Vec2> vertices)
{
    if (vertices.size() < 3)
        throw Error(ErrorKind::Validation, "polygon needs at least 3 vertices");
    Polygon p{std::move(vertices)};
    if (shape_area(p) < 0.0)
        std::reverse(p.vertices.begin(), p.vertices.end());
    const auto &v = p.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (orient(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]) <= 0.0)
            throw Error(ErrorKind::Validation, "polygon is not strictly convex");
    return p;
}

Polygon axis_square(const Vec2 &center, double half_side)
{
    return Polygon{{center + Vec2(-half_side, -half_side), center + Vec2(half_side, -half_side),
                    center + Vec2(half_side, half_side), center + Vec2(-half_side, half_side)}};
}

Region::Region(HoldAll holdall, std::vector<Shape> shapes) : holdall_(holdall), base_(std::move(shapes)) {}

bool Region::contains(const Vec2 &x) const
{
    bool in = false;
    for (const auto &s : base_)
        in = in || toposd::contains(s, x);
    for (const auto &s : added_)
        in = in || toposd::contains(s, x);
    if (!in)
        return false;
    for (const auto &s : removed_)
        if (toposd::contains(s, x))
            return false;
    return true;
}

double Region::signed_distance(const Vec2 &x) const
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto &s : base_)
        d = std::min(d, toposd::signed_distance(s, x));
    for (const auto &s : added_)
        d = std::min(d, toposd::signed_distance(s, x));
    for (const auto &s : removed_)
        d = std::max(d, -toposd::signed_distance(s, x));
    return d;
}

Cover Region::classify(const Vec2 &a, const Vec2 &b, const Vec2 &c) const
{
    Cover in = Cover::out;
    for (const auto &s : base_)
        in = cover_or(in, toposd::classify(s, a, b, c));
    for (const auto &s : added_)
        in = cover_or(in, toposd::classify(s, a, b, c));
    if (in == Cover::out)
        return Cover::out;
    Cover rm = Cover::out;
    for (const auto &s : removed_)
        rm = cover_or(rm, toposd::classify(s, a, b, c));
    if (rm == Cover::in)
        return Cover::out;
    if (in == Cover::in && rm == Cover::out)
        return Cover::in;
    return Cover::cut;
}

Region Region::with_added(const Shape &s) const
{
    Region r = *this;
    r.added_.push_back(s);
    return r;
}

Region Region::with_removed(const Shape &s) const
{
    Region r = *this;
    r.removed_.push_back(s);
    return r;
}

double holdall_signed_distance(HoldAll holdall, const Vec2 &x)
{
    if (holdall == HoldAll::disk)
        return x.norm() - 1.0;
    const Vec2 q = (x - Vec2(0.5, 0.5)).cwiseAbs() - Vec2(0.5, 0.5);
    const double outside = q.cwiseMax(0.0).norm();
    return outside > 0.0 ? outside : std::max(q.x(), q.y());
}

double omega_measure(OmegaShape w) { return w == OmegaShape::ball ? std::numbers::pi : 4.0; }

std::string to_string(OmegaShape w) { return w == OmegaShape::ball ? "ball" : "square"; }

InclusionSeed InclusionSeed::point(const Vec2 &x0) { return {Kind::point, x0, 0.0, OmegaShape::ball}; }

InclusionSeed InclusionSeed::circle(const Vec2 &c, double r)
{
    if (!(r > 0.0))
        throw Error(ErrorKind::Validation, "circle seed radius must be positive");
    return {Kind::circle_curve, c, r, OmegaShape::ball};
}

InclusionSeed InclusionSeed::scaled(const Vec2 &x0, OmegaShape w) { return {Kind::scaled_shape, x0, 0.0, w}; }

double InclusionSeed::omega_measure() const
{
    return kind == Kind::scaled_shape ? toposd::omega_measure(omega) : std::numbers::pi;
}

std::string to_string(InclusionSeed::Kind k)
{
    switch (k) {
    case InclusionSeed::Kind::point: return "point";
    case InclusionSeed::Kind::circle_curve: return "circle_curve";
    case InclusionSeed::Kind::scaled_shape: return "scaled_shape";
    }
    return "unknown";
}

namespace {

    // largest signed distance to ∂D over the closure of the shape
    double holdall_extent(HoldAll holdall, const Shape &s)
    {
        return std::visit(overloaded{
                              [&](const Disk &d) {
                                  if (holdall == HoldAll::disk)
                                      return d.center.norm() + d.radius - 1.0;
                                  const Vec2 &c = d.center;
                                  return std::max({d.radius - c.x(), d.radius - c.y(), c.x() + d.radius - 1.0,
                                                   c.y() + d.radius - 1.0});
                              },
                              [&](const Polygon &p) {
                                  double m = -std::numeric_limits<double>::infinity();
                                  for (const auto &v : p.vertices)
                                      m = std::max(m, holdall_signed_distance(holdall, v));
                                  return m;
                              },
                              [&](const Annulus &a) {
                                  return holdall_extent(holdall, Disk{a.center, a.r_out});
                              },
                          },
                          s);
    }

    std::string fmt(double v)
    {
        std::ostringstream os;
        os << v;
        return os.str();
    }

} // namespace

Dilation dilate(const InclusionSeed &seed, double eps, HoldAll holdall)
{
    if (!(eps > 0.0))
        throw Error(ErrorKind::Validation, "epsilon must be positive");
    Dilation out;
    switch (seed.kind) {
    case InclusionSeed::Kind::point:
        out.shape = Disk{seed.center, eps};
        out.measure = std::numbers::pi * eps * eps;
        break;
    case InclusionSeed::Kind::circle_curve:
        if (eps >= seed.radius)
            throw Error(ErrorKind::EpsilonTooLarge,
                        "epsilon " + fmt(eps) + " is not below the circle radius " + fmt(seed.radius));
        out.shape = Annulus{seed.center, seed.radius - eps, seed.radius + eps};
        out.measure = 4.0 * std::numbers::pi * seed.radius * eps;
        break;
    case InclusionSeed::Kind::scaled_shape:
        if (seed.omega == OmegaShape::ball)
            out.shape = Disk{seed.center, eps};
        else
            out.shape = axis_square(seed.center, eps);
        out.measure = eps * eps * omega_measure(seed.omega);
        break;
    }
    if (holdall_extent(holdall, out.shape) > -min_clearance)
        throw Error(ErrorKind::EpsilonTooLarge,
                    "dilated seed with epsilon " + fmt(eps) + " reaches the hold-all boundary");
    return out;
}

int sign_of(const Region &omega, const InclusionSeed &seed)
{
    std::vector<Vec2> samples;
    if (seed.kind == InclusionSeed::Kind::circle_curve) {
        const int n = 4096;
        for (int i = 0; i < n; ++i) {
            const double t = 2.0 * std::numbers::pi * i / n;
            samples.push_back(seed.center + seed.radius * Vec2(std::cos(t), std::sin(t)));
        }
    } else {
        samples.push_back(seed.center);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &x : samples) {
        if (holdall_signed_distance(omega.holdall(), x) > -min_clearance)
            throw Error(ErrorKind::SeedStraddlesBoundary, "seed is not inside D with clearance");
        const double d = omega.signed_distance(x);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (lo > min_clearance)
        return +1;
    if (hi < -min_clearance)
        return -1;
    throw Error(ErrorKind::SeedStraddlesBoundary, "seed meets the boundary of Omega");
}

Region perturb_region(const Region &omega, const InclusionSeed &seed, double eps)
{
    const int s = sign_of(omega, seed);
    const Dilation d = dilate(seed, eps, omega.holdall());
    return s > 0 ? omega.with_added(d.shape) : omega.with_removed(d.shape);
}

void validate_region(const Region &omega)
{
    for (std::size_t i = 0; i < omega.shapes().size(); ++i) {
        const auto &s = omega.shapes()[i];
        if (const auto *d = std::get_if<Disk>(&s); d && !(d->radius > 0.0))
            throw Error(ErrorKind::Validation, "omega_shapes[" + std::to_string(i) + "].radius must be positive");
        if (holdall_extent(omega.holdall(), s) > -min_clearance)
            throw Error(ErrorKind::Validation,
                        "omega_shapes[" + std::to_string(i) + "] is not inside D with clearance 1e-3");
    }
}

MeasureRHS limit_measure(const InclusionSeed &seed, int curve_nodes)
{
    MeasureRHS m;
    switch (seed.kind) {
    case InclusionSeed::Kind::point:
        m.kind = MeasureRHS::Kind::dirac;
        m.nodes = {seed.center};
        m.weights = {1.0};
        break;
    case InclusionSeed::Kind::circle_curve:
        if (curve_nodes < 1)
            throw Error(ErrorKind::Validation, "curve_nodes must be positive");
        m.kind = MeasureRHS::Kind::curve;
        for (int i = 0; i < curve_nodes; ++i) {
            const double t = 2.0 * std::numbers::pi * i / curve_nodes;
            m.nodes.push_back(seed.center + seed.radius * Vec2(std::cos(t), std::sin(t)));
            m.weights.push_back(1.0 / curve_nodes);
        }
        break;
    case InclusionSeed::Kind::scaled_shape:
        throw Error(ErrorKind::UnsupportedSeed, "scaled_shape seeds have no limit measure object");
    }
    return m;
}

} // namespace toposd
