#include "qgnls/discretization.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "qgnls/error.hpp"

namespace qgnls {

class SymmetricSolver {
 public:
  explicit SymmetricSolver(const SpMat& S) {
    llt_.compute(S);
    if (llt_.info() != Eigen::Success) throw LinearSolveFailure("Cholesky factorization of S = A + M failed");
  }
  template <class R>
  auto solve(const R& rhs) const {
    return llt_.solve(rhs);
  }

 private:
  Eigen::SimplicialLLT<SpMat> llt_;
};

void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Mat J = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvectors()(0, i);
    x[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    w[i] = v * v;  // weights on [-1,1] are 2 v^2, halved for [0,1]
  }
}

Discretization assemble(const MetricGraph& g, const std::vector<int>& cells_per_edge, int quad_order,
                        MassScheme scheme) {
  if (cells_per_edge.size() != g.num_edges())
    throw InvalidArgument("cells_per_edge has " + std::to_string(cells_per_edge.size()) + " entries for " +
                          std::to_string(g.num_edges()) + " edges");
  if (quad_order < 2) throw InvalidArgument("quadrature order must be >= 2");

  Discretization d;
  d.graph_ = g;
  d.scheme_ = scheme;
  gauss_legendre_unit(quad_order, d.qx_, d.qw_);

  Eigen::Index next = static_cast<Eigen::Index>(g.num_vertices());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edges()[e];
    int n = cells_per_edge[e];
    if (n < 1) throw InvalidArgument("edge #" + std::to_string(e) + " needs at least one cell");
    if (edge.is_loop()) n = std::max(n, 3);
    EdgeMesh m;
    m.edge = e;
    m.cells = n;
    m.h = edge.length / n;
    m.dofs.resize(n + 1);
    m.dofs.front() = static_cast<Eigen::Index>(edge.tail);
    m.dofs.back() = static_cast<Eigen::Index>(edge.head);
    for (int i = 1; i < n; ++i) m.dofs[i] = next++;
    d.meshes_.push_back(std::move(m));
  }
  d.ndof_ = next;

  // Element matrices are accumulated into triplets; setFromTriplets sums the
  // duplicates in a fixed order, and each cell contributes a symmetric pair
  // with identical values, so A and M are exactly symmetric.
  const double cw = scheme == MassScheme::Consistent ? 1.0 : 0.5;
  std::vector<Eigen::Triplet<double>> ta, tm;
  for (const auto& m : d.meshes_) {
    const double h = m.h;
    const double md = cw * h / 3.0 + (1.0 - cw) * h / 2.0;
    const double mo = cw * h / 6.0;
    for (int c = 0; c < m.cells; ++c) {
      const auto i = m.dofs[c], j = m.dofs[c + 1];
      ta.emplace_back(i, i, 1.0 / h);
      ta.emplace_back(j, j, 1.0 / h);
      ta.emplace_back(i, j, -1.0 / h);
      ta.emplace_back(j, i, -1.0 / h);
      tm.emplace_back(i, i, md);
      tm.emplace_back(j, j, md);
      tm.emplace_back(i, j, mo);
      tm.emplace_back(j, i, mo);
    }
  }
  d.A_.resize(d.ndof_, d.ndof_);
  d.M_.resize(d.ndof_, d.ndof_);
  d.A_.setFromTriplets(ta.begin(), ta.end());
  d.M_.setFromTriplets(tm.begin(), tm.end());
  d.S_ = d.A_ + d.M_;
  d.A_.makeCompressed();
  d.M_.makeCompressed();
  d.S_.makeCompressed();
  d.solver_ = std::make_shared<const SymmetricSolver>(d.S_);
  return d;
}

Discretization assemble_uniform(const MetricGraph& g, int cells, int quad_order, MassScheme scheme) {
  std::vector<int> c;
  for (const auto& e : g.edges()) c.push_back(e.cells > 0 ? e.cells : cells);
  return assemble(g, c, quad_order, scheme);
}

Discretization assemble_by_size(const MetricGraph& g, double h, int quad_order, MassScheme scheme) {
  if (!(h > 0.0)) throw InvalidArgument("target cell size must be positive");
  std::vector<int> c;
  for (const auto& e : g.edges())
    c.push_back(e.cells > 0 ? e.cells : std::max(1, static_cast<int>(std::ceil(e.length / h - 1e-9))));
  return assemble(g, c, quad_order, scheme);
}

int Discretization::total_cells() const {
  int n = 0;
  for (const auto& m : meshes_) n += m.cells;
  return n;
}

double Discretization::max_cell_size() const {
  double h = 0.0;
  for (const auto& m : meshes_) h = std::max(h, m.h);
  return h;
}

Vec Discretization::solve_h1(const Vec& rhs) const {
  Vec x = solver_->solve(rhs);
  return x;
}

Mat Discretization::solve_h1(const Mat& rhs) const {
  Mat x = solver_->solve(rhs);
  return x;
}

double Discretization::integrate_power(const Vec& u, double q) const {
  if (!(q >= 1.0)) throw InvalidExponent(q);
  double total = 0.0;
  for (const auto& m : meshes_) {
    double edge_sum = 0.0;
    for (int c = 0; c < m.cells; ++c) {
      const double a = u[m.dofs[c]], b = u[m.dofs[c + 1]];
      if (a == 0.0 && b == 0.0) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < qx_.size(); ++k) s += qw_[k] * std::pow(std::abs(a + (b - a) * qx_[k]), q);
      edge_sum += s;
    }
    total += edge_sum * m.h;
  }
  return total;
}

double Discretization::mean_value(const Vec& u) const {
  return (M_ * u).sum() / graph_.total_length();
}

Vec Discretization::nonlinear_load(const Vec& u, double p) const {
  Vec n = Vec::Zero(ndof_);
  for (const auto& m : meshes_) {
    for (int c = 0; c < m.cells; ++c) {
      const double a = u[m.dofs[c]], b = u[m.dofs[c + 1]];
      if (a == 0.0 && b == 0.0) continue;
      double fa = 0.0, fb = 0.0;
      for (std::size_t k = 0; k < qx_.size(); ++k) {
        const double x = qx_[k];
        const double v = a + (b - a) * x;
        const double f = qw_[k] * std::pow(std::abs(v), p - 2.0) * v;
        fa += f * (1.0 - x);
        fb += f * x;
      }
      n[m.dofs[c]] += fa * m.h;
      n[m.dofs[c + 1]] += fb * m.h;
    }
  }
  return n;
}

SpMat Discretization::nonlinear_jacobian(const Vec& u, double p) const {
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& m : meshes_) {
    for (int c = 0; c < m.cells; ++c) {
      const auto i = m.dofs[c], j = m.dofs[c + 1];
      const double a = u[i], b = u[j];
      double kii = 0.0, kij = 0.0, kjj = 0.0;
      for (std::size_t k = 0; k < qx_.size(); ++k) {
        const double x = qx_[k];
        const double f = qw_[k] * (p - 1.0) * std::pow(std::abs(a + (b - a) * x), p - 2.0);
        kii += f * (1.0 - x) * (1.0 - x);
        kij += f * (1.0 - x) * x;
        kjj += f * x * x;
      }
      t.emplace_back(i, i, kii * m.h);
      t.emplace_back(j, j, kjj * m.h);
      t.emplace_back(i, j, kij * m.h);
      t.emplace_back(j, i, kij * m.h);
    }
  }
  SpMat J(ndof_, ndof_);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Vec Discretization::vertex_flux_sums(const Vec& u) const {
  Vec f = Vec::Zero(static_cast<Eigen::Index>(graph_.num_vertices()));
  for (const auto& m : meshes_) {
    const auto& e = graph_.edges()[m.edge];
    const int n = m.cells;
    f[static_cast<Eigen::Index>(e.tail)] += (u[m.dofs[1]] - u[m.dofs[0]]) / m.h;
    f[static_cast<Eigen::Index>(e.head)] += (u[m.dofs[n - 1]] - u[m.dofs[n]]) / m.h;
  }
  return f;
}

Vec Discretization::edge_values(const Vec& u, std::size_t edge) const {
  const auto& m = meshes_.at(edge);
  Vec v(m.cells + 1);
  for (int i = 0; i <= m.cells; ++i) v[i] = u[m.dofs[i]];
  return v;
}

}  // namespace qgnls
