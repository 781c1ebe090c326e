#pragma once

#include "toposd/types.hpp"

#include <array>
#include <vector>

namespace toposd {

/// Quadrature rule on the reference triangle with vertices (0,0), (1,0), (0,1).
/// Points are barycentric coordinates; weights sum to the reference area 1/2.
struct QuadratureRule {
    std::vector<Vec3> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return weights.size(); }
};

/// Symmetric rule exact for polynomials of the requested total degree.
/// Degrees 1 through 5 are available; larger requests throw UnsupportedCase.
const QuadratureRule &triangle_rule(int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre &gauss_legendre(int n);

} // namespace toposd
