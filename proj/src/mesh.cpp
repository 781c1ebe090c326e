#include "toposd/mesh.hpp"

#include "toposd/error.hpp"
#include "toposd/planar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace toposd {
namespace {
    constexpr double locate_tolerance = 1e-10;
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<char> boundary,
           HoldAll holdall)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), boundary_(std::move(boundary)),
      holdall_(holdall)
{
    if (boundary_.size() != vertices_.size())
        throw Error(ErrorKind::Validation, "boundary flag count does not match vertex count");
    if (triangles_.empty())
        throw Error(ErrorKind::Validation, "mesh has no triangles");

    const int nv = static_cast<int>(vertices_.size());
    areas_.resize(triangles_.size());
    gradients_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto &tri = triangles_[t];
        for (int v : tri)
            if (v < 0 || v >= nv)
                throw Error(ErrorKind::Validation, "triangle " + std::to_string(t) + " has an invalid vertex index");
        const Vec2 &a = vertices_[tri[0]], &b = vertices_[tri[1]], &c = vertices_[tri[2]];
        const double twice_area = orient(a, b, c);
        if (!(twice_area > 0.0))
            throw Error(ErrorKind::Validation, "triangle " + std::to_string(t) + " is not positively oriented");
        areas_[t] = 0.5 * twice_area;
        // grad lambda_k = rot(opposite edge) / (2 area)
        Eigen::Matrix<double, 3, 2> g;
        const Vec2 e0 = c - b, e1 = a - c, e2 = b - a;
        g.row(0) << -e0.y(), e0.x();
        g.row(1) << -e1.y(), e1.x();
        g.row(2) << -e2.y(), e2.x();
        gradients_[t] = g / twice_area;
        max_diameter_ = std::max(max_diameter_, diameter(static_cast<int>(t)));
    }

    build_neighbors();
    build_locator();
}

double Mesh::diameter(int t) const
{
    const auto &tri = triangles_[t];
    const Vec2 &a = vertices_[tri[0]], &b = vertices_[tri[1]], &c = vertices_[tri[2]];
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
}

double Mesh::total_area() const
{
    double s = 0.0;
    for (double a : areas_)
        s += a;
    return s;
}

Vec2 Mesh::centroid(int t) const
{
    const auto &tri = triangles_[t];
    return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

Vec2 Mesh::point(int t, const Vec3 &bary) const
{
    const auto &tri = triangles_[t];
    return bary[0] * vertices_[tri[0]] + bary[1] * vertices_[tri[1]] + bary[2] * vertices_[tri[2]];
}

Vec3 Mesh::barycentric(int t, const Vec2 &x) const
{
    const auto &tri = triangles_[t];
    const auto &g = gradients_[t];
    Vec3 l;
    for (int k = 0; k < 3; ++k) {
        // lambda_k is affine, equal to 1 at vertex k; evaluate from the next vertex where it vanishes
        const Vec2 &anchor = vertices_[tri[(k + 1) % 3]];
        l[k] = g.row(k).dot(x - anchor);
    }
    return l;
}

void Mesh::build_neighbors()
{
    neighbors_.assign(triangles_.size(), Triangle{-1, -1, -1});
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    std::vector<int> edge_count_on_vertex(vertices_.size(), 0);
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
        for (int k = 0; k < 3; ++k) {
            int a = triangles_[t][(k + 1) % 3], b = triangles_[t][(k + 2) % 3];
            const auto key = std::minmax(a, b);
            auto it = edges.find(key);
            if (it == edges.end()) {
                edges.emplace(key, std::make_pair(t, k));
            } else {
                auto [t2, k2] = it->second;
                if (t2 < 0 || neighbors_[t2][k2] != -1)
                    throw Error(ErrorKind::Validation, "edge shared by more than two triangles");
                neighbors_[t][k] = t2;
                neighbors_[t2][k2] = t;
            }
        }
    }
    std::vector<char> on_boundary_edge(vertices_.size(), 0);
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t)
        for (int k = 0; k < 3; ++k)
            if (neighbors_[t][k] < 0) {
                on_boundary_edge[triangles_[t][(k + 1) % 3]] = 1;
                on_boundary_edge[triangles_[t][(k + 2) % 3]] = 1;
            }
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        if ((on_boundary_edge[v] != 0) != (boundary_[v] != 0))
            throw Error(ErrorKind::Validation,
                        "boundary flag of vertex " + std::to_string(v) + " disagrees with the boundary edges");
}

void Mesh::build_locator()
{
    Vec2 lo = vertices_.front(), hi = vertices_.front();
    for (const auto &v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Vec2 extent = (hi - lo).cwiseMax(Vec2::Constant(1e-12));
    const double per_bin = std::sqrt(extent.x() * extent.y() / static_cast<double>(triangles_.size()));
    nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / per_bin)));
    ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / per_bin)));
    lo_ = lo - Vec2::Constant(1e-9);
    bin_size_ = Vec2((extent.x() + 2e-9) / nx_, (extent.y() + 2e-9) / ny_);
    bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
        Vec2 tlo = vertices_[triangles_[t][0]], thi = tlo;
        for (int k = 1; k < 3; ++k) {
            tlo = tlo.cwiseMin(vertices_[triangles_[t][k]]);
            thi = thi.cwiseMax(vertices_[triangles_[t][k]]);
        }
        auto [i0, j0] = bin_of(tlo - Vec2::Constant(1e-10));
        auto [i1, j1] = bin_of(thi + Vec2::Constant(1e-10));
        for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
                bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
    }
}

std::pair<int, int> Mesh::bin_of(const Vec2 &x) const
{
    int i = static_cast<int>(std::floor((x.x() - lo_.x()) / bin_size_.x()));
    int j = static_cast<int>(std::floor((x.y() - lo_.y()) / bin_size_.y()));
    return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

std::optional<Location> Mesh::try_locate(const Vec2 &x) const
{
    if (!std::isfinite(x.x()) || !std::isfinite(x.y()))
        return std::nullopt;
    auto [i, j] = bin_of(x);
    std::optional<Location> best;
    for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
        if (best && t > best->triangle)
            continue;
        Vec3 l = barycentric(t, x);
        if (l.minCoeff() >= -locate_tolerance) {
            l = l.cwiseMax(0.0).cwiseMin(1.0);
            l /= l.sum();
            best = Location{t, l};
        }
    }
    return best;
}

Location Mesh::locate(const Vec2 &x) const
{
    auto loc = try_locate(x);
    if (!loc) {
        std::ostringstream os;
        os << std::setprecision(17) << "point (" << x.x() << ", " << x.y() << ") is not covered by the mesh";
        throw Error(ErrorKind::PointOutsideMesh, os.str());
    }
    return *loc;
}

std::vector<int> Mesh::triangles_near(const Vec2 &x, double radius) const
{
    auto [i0, j0] = bin_of(x - Vec2::Constant(radius));
    auto [i1, j1] = bin_of(x + Vec2::Constant(radius));
    std::vector<int> out;
    for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j)
            for (int t : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
                const auto &tri = triangles_[t];
                if (point_triangle_distance(x, vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) <= radius)
                    out.push_back(t);
            }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Mesh build_unit_disk_mesh(int n_rings)
{
    if (n_rings < 2)
        throw Error(ErrorKind::Validation, "n_rings must be at least 2");
    std::vector<Vec2> vertices;
    std::vector<char> boundary;
    std::vector<int> ring_start(n_rings + 1);
    vertices.emplace_back(0.0, 0.0);
    boundary.push_back(0);
    ring_start[0] = 0;
    for (int k = 1; k <= n_rings; ++k) {
        ring_start[k] = static_cast<int>(vertices.size());
        const double r = static_cast<double>(k) / n_rings;
        for (int j = 0; j < 6 * k; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / (6.0 * k);
            vertices.emplace_back(r * std::cos(theta), r * std::sin(theta));
            boundary.push_back(k == n_rings ? 1 : 0);
        }
    }
    auto ring_vertex = [&](int k, int j) {
        if (k == 0)
            return 0;
        return ring_start[k] + (j % (6 * k));
    };
    std::vector<Triangle> triangles;
    for (int k = 1; k <= n_rings; ++k) {
        for (int s = 0; s < 6; ++s) {
            // sector s: outer ring indices s*k .. s*k+k, inner ring s*(k-1) .. s*(k-1)+k-1
            for (int j = 0; j < k; ++j) {
                const int o0 = ring_vertex(k, s * k + j), o1 = ring_vertex(k, s * k + j + 1);
                const int i0 = ring_vertex(k - 1, s * (k - 1) + j);
                triangles.push_back({o0, o1, i0});
                if (j + 1 < k) {
                    const int i1 = ring_vertex(k - 1, s * (k - 1) + j + 1);
                    triangles.push_back({i0, o1, i1});
                }
            }
        }
    }
    for (auto &t : triangles)
        if (orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0)
            std::swap(t[1], t[2]);
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), HoldAll::disk);
}

Mesh build_unit_square_mesh(int n)
{
    if (n < 1)
        throw Error(ErrorKind::Validation, "n must be at least 1");
    std::vector<Vec2> vertices;
    std::vector<char> boundary;
    const double h = 1.0 / n;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) {
            vertices.emplace_back(i * h, j * h);
            boundary.push_back(i == 0 || j == 0 || i == n || j == n ? 1 : 0);
        }
    const int centers = static_cast<int>(vertices.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            vertices.emplace_back((i + 0.5) * h, (j + 0.5) * h);
            boundary.push_back(0);
        }
    auto grid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<Triangle> triangles;
    triangles.reserve(4 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int c = centers + j * n + i;
            const int a = grid(i, j), b = grid(i + 1, j), d = grid(i + 1, j + 1), e = grid(i, j + 1);
            triangles.push_back({a, b, c});
            triangles.push_back({b, d, c});
            triangles.push_back({d, e, c});
            triangles.push_back({e, a, c});
        }
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), HoldAll::square);
}

Mesh refine_uniform(const Mesh &mesh)
{
    std::vector<Vec2> vertices = mesh.vertices();
    std::vector<char> boundary = mesh.boundary_flags();
    std::map<std::pair<int, int>, int> midpoint;
    const auto &nbr = mesh.neighbors();

    auto mid = [&](int t, int k) {
        const auto &tri = mesh.triangle(t);
        const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end())
            return it->second;
        Vec2 m = 0.5 * (mesh.vertex(a) + mesh.vertex(b));
        const bool on_boundary = nbr[t][k] < 0;
        if (on_boundary && mesh.holdall() == HoldAll::disk)
            m /= m.norm();
        const int id = static_cast<int>(vertices.size());
        vertices.push_back(m);
        boundary.push_back(on_boundary ? 1 : 0);
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<Triangle> triangles;
    triangles.reserve(4 * mesh.num_triangles());
    for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
        const auto &tri = mesh.triangle(t);
        // m_k is the midpoint of the edge opposite local vertex k
        const int m0 = mid(t, 0), m1 = mid(t, 1), m2 = mid(t, 2);
        triangles.push_back({tri[0], m2, m1});
        triangles.push_back({m2, tri[1], m0});
        triangles.push_back({m1, m0, tri[2]});
        triangles.push_back({m0, m1, m2});
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), mesh.holdall());
}

void write_mesh(std::ostream &out, const Mesh &mesh)
{
    out << "vertices " << mesh.num_vertices() << " triangles " << mesh.num_triangles() << '\n';
    out << std::setprecision(17);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
        out << mesh.vertex(static_cast<int>(v)).x() << ' ' << mesh.vertex(static_cast<int>(v)).y() << ' '
            << (mesh.is_boundary(static_cast<int>(v)) ? 1 : 0) << '\n';
    for (const auto &t : mesh.triangles())
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream &in)
{
    std::string w1, w2;
    std::size_t nv = 0, nt = 0;
    if (!(in >> w1 >> nv >> w2 >> nt) || w1 != "vertices" || w2 != "triangles")
        throw Error(ErrorKind::Validation, "mesh header must read `vertices N triangles M`");
    std::vector<Vec2> vertices(nv);
    std::vector<char> boundary(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        int flag = 0;
        if (!(in >> vertices[v].x() >> vertices[v].y() >> flag))
            throw Error(ErrorKind::Validation, "truncated vertex list at vertex " + std::to_string(v));
        boundary[v] = flag != 0 ? 1 : 0;
    }
    std::vector<Triangle> triangles(nt);
    for (std::size_t t = 0; t < nt; ++t)
        if (!(in >> triangles[t][0] >> triangles[t][1] >> triangles[t][2]))
            throw Error(ErrorKind::Validation, "truncated triangle list at triangle " + std::to_string(t));

    bool all_on_circle = true, all_on_square = true;
    for (std::size_t v = 0; v < nv; ++v) {
        if (!boundary[v])
            continue;
        const Vec2 &x = vertices[v];
        all_on_circle = all_on_circle && std::abs(x.norm() - 1.0) < 1e-9;
        const double d = std::min({x.x(), x.y(), 1.0 - x.x(), 1.0 - x.y()});
        all_on_square = all_on_square && std::abs(d) < 1e-9;
    }
    const HoldAll holdall = all_on_circle ? HoldAll::disk : (all_on_square ? HoldAll::square : HoldAll::other);
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), holdall);
}

} // namespace toposd
