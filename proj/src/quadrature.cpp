#include "toposd/quadrature.hpp"

#include "toposd/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace toposd {
namespace {

    void add_orbit3(QuadratureRule &rule, double a, double weight)
    {
        // permutations of (a, a, 1 - 2a)
        const double b = 1.0 - 2.0 * a;
        rule.points.emplace_back(a, a, b);
        rule.points.emplace_back(a, b, a);
        rule.points.emplace_back(b, a, a);
        for (int i = 0; i < 3; ++i)
            rule.weights.push_back(0.5 * weight);
    }

    QuadratureRule make_rule(int degree)
    {
        QuadratureRule rule;
        switch (degree) {
        case 1:
            rule.degree = 1;
            rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
            rule.weights.push_back(0.5);
            break;
        case 2:
            rule.degree = 2;
            add_orbit3(rule, 1.0 / 6.0, 1.0 / 3.0);
            break;
        case 3:
        case 4:
            // Dunavant, 6 points
            rule.degree = 4;
            add_orbit3(rule, 0.445948490915965, 0.223381589678011);
            add_orbit3(rule, 0.091576213509771, 0.109951743655322);
            break;
        case 5:
            // Dunavant, 7 points
            rule.degree = 5;
            rule.points.emplace_back(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
            rule.weights.push_back(0.5 * 0.225);
            add_orbit3(rule, 0.470142064105115, 0.132394152788506);
            add_orbit3(rule, 0.101286507323456, 0.125939180544827);
            break;
        default:
            throw Error(ErrorKind::UnsupportedCase, "triangle rule of degree " + std::to_string(degree));
        }
        return rule;
    }

    GaussLegendre make_gauss_legendre(int n)
    {
        GaussLegendre gl;
        gl.nodes.resize(n);
        gl.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            gl.nodes[i] = x;
            gl.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return gl;
    }

} // namespace

const QuadratureRule &triangle_rule(int degree)
{
    static const std::array<QuadratureRule, 5> rules = {
        make_rule(1), make_rule(2), make_rule(3), make_rule(4), make_rule(5)};
    if (degree < 1 || degree > 5)
        throw Error(ErrorKind::UnsupportedCase, "triangle rule of degree " + std::to_string(degree));
    return rules[degree - 1];
}

const GaussLegendre &gauss_legendre(int n)
{
    static std::mutex mutex;
    static std::map<int, GaussLegendre> cache;
    if (n < 1)
        throw Error(ErrorKind::Validation, "Gauss-Legendre order must be positive");
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, make_gauss_legendre(n)).first;
    return it->second;
}

} // namespace toposd
