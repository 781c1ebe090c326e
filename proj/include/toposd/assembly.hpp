#pragma once

#include "toposd/cut_cell.hpp"
#include "toposd/field.hpp"
#include "toposd/geometry.hpp"
#include "toposd/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace toposd {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Scalar coefficient sampled at a quadrature point; `inside` is membership in the cut set.
using PointFunction = std::function<double(int t, const Vec3 &bary, const Vec2 &x, bool inside)>;

/// Element stiffness matrix of P1 on triangle t, scaled by `coefficient`.
Eigen::Matrix3d element_stiffness(const Mesh &mesh, int t, double coefficient = 1.0);

/// ∫ c ∇φ_i·∇φ_j with an elementwise constant coefficient.
SparseMatrix assemble_stiffness(const Mesh &mesh, const std::vector<double> &coefficient);

/// Elementwise average of a two-valued coefficient over the cut cells.
std::vector<double> effective_coefficient(const Mesh &mesh, const CutCells *cells, double inside, double outside);

/// ∫ β ∇φ_i·∇φ_j with β = inside on the cut set, outside elsewhere.
SparseMatrix assemble_diffusion(const Mesh &mesh, const CutCells *cells, double inside, double outside);

/// ∫ W φ_i φ_j with a degree-4 rule. Throws NegativeWeight if W < -1e-12 anywhere.
SparseMatrix assemble_reaction(const Mesh &mesh, const CutCells *cells, const PointFunction &weight);

/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const Mesh &mesh);

/// Vertex-quadrature (lumped) mass: |supp φ_i| / 3.
Eigen::VectorXd lumped_mass(const Mesh &mesh);

/// ∫ (f_in χ + f_out (1 - χ)) φ_i.
Eigen::VectorXd assemble_load(const Mesh &mesh, const CutCells *cells, double f_in, double f_out);

/// ∫ f φ_i for a pointwise function, optionally with graded refinement at a singular point.
Eigen::VectorXd assemble_function_load(const Mesh &mesh, const CutCells *cells, const PointFunction &f,
                                       const SingularRefinement *singular = nullptr);

/// ⟨strength φ_i, μ⟩ by nodal basis evaluation at the measure atoms.
Eigen::VectorXd assemble_measure_load(const Mesh &mesh, const MeasureRHS &mu,
                                      const std::function<double(const Vec2 &)> &strength);

} // namespace toposd
