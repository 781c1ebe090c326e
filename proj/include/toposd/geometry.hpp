#pragma once

#include "toposd/mesh.hpp"
#include "toposd/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace toposd {

/// Three-valued classification of a cell against a set.
enum class Cover { out, in, cut };

struct Disk {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

/// Convex polygon, counter-clockwise vertex order.
struct Polygon {
    std::vector<Vec2> vertices;
};

/// Open annulus {r_in < |x - c| < r_out}.
struct Annulus {
    Vec2 center = Vec2::Zero();
    double r_in = 0.0;
    double r_out = 0.0;
};

using Shape = std::variant<Disk, Polygon, Annulus>;

bool contains(const Shape &s, const Vec2 &x);
/// Signed distance to the shape boundary, negative inside.
double signed_distance(const Shape &s, const Vec2 &x);
/// Exact in/out/cut test of the closed triangle abc against the open shape.
Cover classify(const Shape &s, const Vec2 &a, const Vec2 &b, const Vec2 &c);
double shape_area(const Shape &s);

Polygon make_polygon(std::vector<Vec2> vertices);
Polygon axis_square(const Vec2 &center, double half_side);

/// Omega as a set expression: (union of base and added shapes) minus removed shapes.
class Region {
public:
    Region() = default;
    Region(HoldAll holdall, std::vector<Shape> shapes);

    HoldAll holdall() const { return holdall_; }
    const std::vector<Shape> &shapes() const { return base_; }
    const std::vector<Shape> &added() const { return added_; }
    const std::vector<Shape> &removed() const { return removed_; }

    bool contains(const Vec2 &x) const;
    double signed_distance(const Vec2 &x) const;
    Cover classify(const Vec2 &a, const Vec2 &b, const Vec2 &c) const;

    Region with_added(const Shape &s) const;
    Region with_removed(const Shape &s) const;

private:
    HoldAll holdall_ = HoldAll::square;
    std::vector<Shape> base_, added_, removed_;
};

/// Signed distance to the hold-all boundary, negative inside D.
double holdall_signed_distance(HoldAll holdall, const Vec2 &x);

enum class OmegaShape { ball, square };

double omega_measure(OmegaShape w);
std::string to_string(OmegaShape w);

struct InclusionSeed {
    enum class Kind { point, circle_curve, scaled_shape };

    Kind kind = Kind::point;
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    OmegaShape omega = OmegaShape::ball;

    static InclusionSeed point(const Vec2 &x0);
    static InclusionSeed circle(const Vec2 &c, double r);
    static InclusionSeed scaled(const Vec2 &x0, OmegaShape w);

    /// |omega| in the ε-expansion |E_ε| = ε^k |omega|: π for point seeds.
    double omega_measure() const;
};

std::string to_string(InclusionSeed::Kind k);

constexpr double min_clearance = 1e-3;

struct Dilation {
    Shape shape;
    double measure = 0.0;
};

/// E_ε together with its exact measure.
/// Throws EpsilonTooLarge when E_ε leaves D or comes within min_clearance of ∂D.
Dilation dilate(const InclusionSeed &seed, double eps, HoldAll holdall);

/// +1 when the seed lies in D \ cl(Omega), -1 when it lies in Omega.
/// Throws SeedStraddlesBoundary when neither holds with min_clearance.
int sign_of(const Region &omega, const InclusionSeed &seed);

/// Omega(E_ε) of the set algebra: union when outside, difference when inside.
Region perturb_region(const Region &omega, const InclusionSeed &seed, double eps);

/// Checks every shape of a region against the hold-all clearance.
void validate_region(const Region &omega);

/// Discrete probability measure: weighted atoms.
struct MeasureRHS {
    enum class Kind { dirac, curve };
    Kind kind = Kind::dirac;
    std::vector<Vec2> nodes;
    std::vector<double> weights;
};

/// Dirac at x0 or the normalized arc-length measure of the circle, n equispaced nodes.
MeasureRHS limit_measure(const InclusionSeed &seed, int curve_nodes = 256);

} // namespace toposd
