#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "qgnls/graph.hpp"

namespace qgnls {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// A field on the graph is its coefficient vector over the global DOFs of a
/// Discretization (continuous piecewise-linear interpolant).
using FieldOnGraph = Vec;

/// Consistent: exact L2 Gram matrix of the hat functions.
/// Blended: average of consistent and row-lumped mass. Its eigenvalue error
/// cancels to fourth order in h, at the cost of not bounding eigenvalues from
/// above. Default.
enum class MassScheme { Consistent, Blended };

struct EdgeMesh {
  std::size_t edge = 0;
  int cells = 0;
  double h = 0.0;
  std::vector<Eigen::Index> dofs;  // cells + 1 entries, tail to head
};

class SymmetricSolver;

class Discretization {
 public:
  const MetricGraph& graph() const { return graph_; }
  Eigen::Index num_dofs() const { return ndof_; }
  const std::vector<EdgeMesh>& meshes() const { return meshes_; }
  int quad_order() const { return static_cast<int>(qx_.size()); }
  MassScheme mass_scheme() const { return scheme_; }
  int total_cells() const;
  double max_cell_size() const;

  const SpMat& stiffness() const { return A_; }
  const SpMat& mass_matrix() const { return M_; }
  const SpMat& h1_matrix() const { return S_; }

  /// Solves S x = rhs with the cached Cholesky factor of S = A + M.
  Vec solve_h1(const Vec& rhs) const;
  Mat solve_h1(const Mat& rhs) const;

  double mass(const Vec& u) const { return u.dot(M_ * u); }
  double kinetic(const Vec& u) const { return u.dot(A_ * u); }
  double h1_norm(const Vec& u) const { return std::sqrt(u.dot(S_ * u)); }
  double m_dot(const Vec& u, const Vec& v) const { return u.dot(M_ * v); }
  double s_dot(const Vec& u, const Vec& v) const { return u.dot(S_ * v); }

  /// Gauss quadrature of |u|^q over all cells. q >= 1.
  double integrate_power(const Vec& u, double q) const;
  /// (1^T M u) / l.
  double mean_value(const Vec& u) const;
  /// Weak load of |u|^{p-2}u: entries integrate |u|^{p-2}u against each hat.
  Vec nonlinear_load(const Vec& u, double p) const;
  /// Jacobian of nonlinear_load: (p-1) |u|^{p-2}-weighted mass matrix.
  SpMat nonlinear_jacobian(const Vec& u, double p) const;
  /// Sum of outward derivatives at each vertex, from cellwise slopes.
  Vec vertex_flux_sums(const Vec& u) const;
  /// Nodal values along one edge from tail to head.
  Vec edge_values(const Vec& u, std::size_t edge) const;
  /// Field of constant value c.
  Vec constant(double c) const { return Vec::Constant(ndof_, c); }
  /// Interpolates f(edge, s) with s the arclength from the tail.
  template <class F>
  Vec interpolate(F&& f) const {
    Vec u = Vec::Zero(ndof_);
    for (const auto& m : meshes_) {
      for (int i = 0; i <= m.cells; ++i) u[m.dofs[i]] = f(m.edge, i * m.h);
    }
    return u;
  }

 private:
  friend Discretization assemble(const MetricGraph&, const std::vector<int>&, int, MassScheme);

  MetricGraph graph_;
  Eigen::Index ndof_ = 0;
  std::vector<EdgeMesh> meshes_;
  std::vector<double> qx_, qw_;  // Gauss-Legendre on [0, 1]
  MassScheme scheme_ = MassScheme::Blended;
  SpMat A_, M_, S_;
  std::shared_ptr<const SymmetricSolver> solver_;
};

/// Cell counts per edge; loops are raised to at least 3 cells.
Discretization assemble(const MetricGraph& g, const std::vector<int>& cells_per_edge, int quad_order = 5,
                        MassScheme scheme = MassScheme::Blended);
/// Uses each edge's own cell count if set, else `cells`.
Discretization assemble_uniform(const MetricGraph& g, int cells, int quad_order = 5,
                                MassScheme scheme = MassScheme::Blended);
/// Uses each edge's own cell count if set, else ceil(length / h).
Discretization assemble_by_size(const MetricGraph& g, double h, int quad_order = 5,
                                MassScheme scheme = MassScheme::Blended);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace qgnls
