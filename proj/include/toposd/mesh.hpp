#pragma once

#include "toposd/types.hpp"

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace toposd {

enum class HoldAll { square, disk, other };

using Triangle = std::array<int, 3>;

/// Triangle id plus barycentric coordinates of a located point.
struct Location {
    int triangle = -1;
    Vec3 bary = Vec3::Zero();
};

/// Conforming, positively oriented triangulation of the hold-all domain.
///
/// Immutable after construction. The constructor validates orientation and
/// conformity, derives the neighbor table and builds a bucket grid for point
/// location, so every query below is safe to call from several threads.
class Mesh {
public:
    Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<char> boundary,
         HoldAll holdall);

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_triangles() const { return triangles_.size(); }

    const std::vector<Vec2> &vertices() const { return vertices_; }
    const std::vector<Triangle> &triangles() const { return triangles_; }
    const Vec2 &vertex(int v) const { return vertices_[v]; }
    const Triangle &triangle(int t) const { return triangles_[t]; }
    bool is_boundary(int v) const { return boundary_[v] != 0; }
    const std::vector<char> &boundary_flags() const { return boundary_; }
    HoldAll holdall() const { return holdall_; }

    /// neighbors()[t][k] is the triangle across the edge opposite local vertex k, or -1.
    const std::vector<Triangle> &neighbors() const { return neighbors_; }

    double area(int t) const { return areas_[t]; }
    double diameter(int t) const;
    /// Largest element diameter h.
    double max_diameter() const { return max_diameter_; }
    double total_area() const;

    Vec2 centroid(int t) const;
    Vec2 point(int t, const Vec3 &bary) const;
    /// Rows are the (constant) gradients of the three barycentric functions.
    const Eigen::Matrix<double, 3, 2> &shape_gradients(int t) const { return gradients_[t]; }
    Vec3 barycentric(int t, const Vec2 &x) const;

    /// Containing triangle with barycentrics clamped to [0,1]; ties go to the lowest id.
    /// Throws PointOutsideMesh when no triangle contains x within 1e-10.
    Location locate(const Vec2 &x) const;
    std::optional<Location> try_locate(const Vec2 &x) const;

    /// Triangles with at least one point within `radius` of x.
    std::vector<int> triangles_near(const Vec2 &x, double radius) const;

private:
    void build_neighbors();
    void build_locator();
    std::pair<int, int> bin_of(const Vec2 &x) const;

    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<char> boundary_;
    HoldAll holdall_;

    std::vector<Triangle> neighbors_;
    std::vector<double> areas_;
    std::vector<Eigen::Matrix<double, 3, 2>> gradients_;
    double max_diameter_ = 0.0;

    Vec2 lo_ = Vec2::Zero();
    Vec2 bin_size_ = Vec2::Ones();
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Unit disk from a center vertex and n_rings concentric rings (ring k has 6k vertices).
Mesh build_unit_disk_mesh(int n_rings);

/// Crisscross triangulation of (0,1)^2: every cell split into four by its center.
Mesh build_unit_square_mesh(int n);

/// Edge-midpoint refinement; boundary midpoints of a disk mesh are projected onto the unit circle.
Mesh refine_uniform(const Mesh &mesh);

/// Plain-text mesh format: `vertices N triangles M`, N lines `x y flag`, M lines `i j k`.
void write_mesh(std::ostream &out, const Mesh &mesh);
Mesh read_mesh(std::istream &in);

} // namespace toposd
