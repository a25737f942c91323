// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "nahmpole/core_domain.hpp"

namespace nahmpole {

enum class OperatorMode { Line, Surface, Axisym, Cylinder, Plane };

inline OperatorMode mode_for(const GradedGrid& g) {
  switch (g.kind()) {
    case DomainKind::OdeLine: return OperatorMode::Line;
    case DomainKind::LimitSurface: return OperatorMode::Surface;
    case DomainKind::AxisymSlab: return OperatorMode::Axisym;
    case DomainKind::TorusHalfCylinder: return OperatorMode::Cylinder;
    case DomainKind::PlaneHalfSpace: return OperatorMode::Plane;
  }
  return OperatorMode::Line;
}

inline std::string to_string(OperatorMode m) {
  switch (m) {
    case OperatorMode::Line: return "line";
    case OperatorMode::Surface: return "surface";
    case OperatorMode::Axisym: return "axisym";
    case OperatorMode::Cylinder: return "cylinder";
    case OperatorMode::Plane: return "plane";
  }
  return "unknown";
}

/// Finite-volume form of -(g0^{-2} Lap_z + d_y^2) on a graded tensor grid.
///
/// Rows are scaled by rho_i = g0^2(z_i) |dual cell i| (the radial dual cell carries the r weight),
/// which makes the scaled matrix S symmetric: (L v)_i = (S v)_i / rho_i.
class DiscreteOperator {
 public:
  DiscreteOperator(GridPtr grid, std::vector<double> g0_sq) : grid_(std::move(grid)), g0_sq_(std::move(g0_sq)) {
    const GradedGrid& g = *grid_;
    if (g0_sq_.empty()) g0_sq_.assign(g.size(), 1.0);
    if (g0_sq_.size() != g.size()) throw InputError("metric factor has wrong size");
    for (double v : g0_sq_) {
      if (!(v > 0.0) || !std::isfinite(v)) throw InputError("metric factor must be positive and finite");
    }
    const std::size_t D = g.dimension();
    dual_.resize(D);
    for (std::size_t a = 0; a < D; ++a) dual_[a] = dual_widths(g.axis(a));

    unknown_of_.assign(g.size(), -1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.is_dirichlet(i)) {
        unknown_of_[i] = static_cast<std::ptrdiff_t>(nodes_.size());
        nodes_.push_back(i);
      }
    }
    rho_.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double V = 1.0;
      for (std::size_t a = 0; a < D; ++a) V *= dual_[a][g.index_along(i, a)];
      rho_[i] = g0_sq_[i] * V;
    }

    // Neighbour lists for unknown rows.
    offsets_.assign(nodes_.size() + 1, 0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const std::size_t i = nodes_[k];
      for (std::size_t a = 0; a < D; ++a) {
        const Axis& ax = g.axis(a);
        const std::size_t n = ax.size();
        const std::size_t ia = g.index_along(i, a);
        for (int dir : {-1, 1}) {
          std::size_t ja = 0;
          if (ax.kind == AxisKind::Periodic) {
            ja = dir == 1 ? (ia + 1) % n : (ia + n - 1) % n;
          } else {
            if ((dir == -1 && ia == 0) || (dir == 1 && ia + 1 == n)) continue;
            ja = dir == 1 ? ia + 1 : ia - 1;
          }
          const std::size_t j = i + ja * g.stride(a) - ia * g.stride(a);
          double area = 1.0;
          for (std::size_t b = 0; b < D; ++b) {
            if (b != a) area *= dual_[b][g.index_along(i, b)];
          }
          double spacing = 0.0;
          double face_r = 1.0;
          if (ax.kind == AxisKind::Periodic) {
            spacing = ax.period / static_cast<double>(n);
          } else {
            spacing = std::abs(ax.nodes[ja] - ax.nodes[ia]);
            if (ax.kind == AxisKind::Radial) face_r = 0.5 * (ax.nodes[ja] + ax.nodes[ia]);
          }
          double w = area * face_r / spacing;
          if (g.has_vertical() && a == g.vertical_axis()) w *= g0_sq_[i];
          nbr_.push_back(j);
          weight_.push_back(w);
        }
      }
      offsets_[k + 1] = nbr_.size();
    }
  }

  const GradedGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& row_scale() const { return rho_; }
  const std::vector<double>& g0_sq() const { return g0_sq_; }
  std::size_t unknown_count() const { return nodes_.size(); }
  const std::vector<std::size_t>& unknown_nodes() const { return nodes_; }
  std::ptrdiff_t unknown_of(std::size_t node) const { return unknown_of_[node]; }

  /// (L v)_i at unknown nodes; zero at Dirichlet nodes. Dirichlet values are read from v.
  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) out[nodes_[k]] = row_flux(k, v) / rho_[nodes_[k]];
    return out;
  }

  /// (S v)_i for the unknown row k (scaled, no division by rho).
  double row_flux(std::size_t k, const std::vector<double>& v) const {
    const std::size_t i = nodes_[k];
    double acc = 0.0;
    for (std::size_t e = offsets_[k]; e < offsets_[k + 1]; ++e) acc += weight_[e] * (v[i] - v[nbr_[e]]);
    return acc;
  }

  /// Calls f(neighbour node, face weight) for every face of unknown row k.
  template <class F>
  void for_each_face(std::size_t k, F&& f) const {
    for (std::size_t e = offsets_[k]; e < offsets_[k + 1]; ++e) f(nbr_[e], weight_[e]);
  }

  /// S + diag(rho * shift) restricted to unknowns.
  Eigen::SparseMatrix<double> shifted_matrix(const std::vector<double>& shift) const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(nbr_.size() + nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const std::size_t i = nodes_[k];
      double diag = shift.empty() ? 0.0 : rho_[i] * shift[i];
      for (std::size_t e = offsets_[k]; e < offsets_[k + 1]; ++e) {
        diag += weight_[e];
        const std::ptrdiff_t col = unknown_of_[nbr_[e]];
        if (col >= 0) t.emplace_back(static_cast<int>(k), static_cast<int>(col), -weight_[e]);
      }
      t.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
    }
    const auto n = static_cast<Eigen::Index>(nodes_.size());
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
  }

  /// Contribution of Dirichlet values to the scaled right-hand side.
  Eigen::VectorXd boundary_rhs(const std::vector<double>& v) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes_.size()));
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      for (std::size_t e = offsets_[k]; e < offsets_[k + 1]; ++e) {
        if (unknown_of_[nbr_[e]] < 0) b(static_cast<Eigen::Index>(k)) += weight_[e] * v[nbr_[e]];
      }
    }
    return b;
  }

  bool has_dirichlet() const { return nodes_.size() < grid_->size(); }

 private:
  static std::vector<double> dual_widths(const Axis& ax) {
    const std::size_t n = ax.size();
    std::vector<double> w(n, 0.0);
    if (ax.kind == AxisKind::Periodic) {
      std::fill(w.begin(), w.end(), ax.period / static_cast<double>(n));
      return w;
    }
    const auto& x = ax.nodes;
    for (std::size_t k = 0; k < n; ++k) {
      const double lo = k == 0 ? x[0] : 0.5 * (x[k - 1] + x[k]);
      const double hi = k + 1 == n ? x[n - 1] : 0.5 * (x[k] + x[k + 1]);
      w[k] = ax.kind == AxisKind::Radial ? 0.5 * (hi * hi - lo * lo) : hi - lo;
    }
    return w;
  }

  GridPtr grid_;
  std::vector<double> g0_sq_;
  std::vector<std::vector<double>> dual_;
  std::vector<std::ptrdiff_t> unknown_of_;
  std::vector<std::size_t> nodes_;
  std::vector<double> rho_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> nbr_;
  std::vector<double> weight_;
};

// ---------------------------------------------------------------------------
// Linear solves.
// ---------------------------------------------------------------------------

struct LinearSolveOptions {
  double tol = 1e-13;
  std::size_t max_iterations = 20000;
  std::size_t direct_limit = 4096;  // unknowns; 2D problems always use the direct path
};

/// Solves (L + shift) x = rhs at unknown nodes with x = dirichlet on Dirichlet nodes.
///
/// Without a shift and without Dirichlet nodes the operator is singular; then rhs must be
/// mean-zero and the returned solution has zero weighted mean.
inline ScalarField linear_solve(const DiscreteOperator& op, const std::vector<double>& shift, const ScalarField& rhs,
                                const ScalarField* dirichlet = nullptr, const LinearSolveOptions& opt = {}) {
  const GradedGrid& g = op.grid();
  const auto& rho = op.row_scale();
  const auto& nodes = op.unknown_nodes();
  const auto n = static_cast<Eigen::Index>(nodes.size());
  const bool shifted = std::any_of(shift.begin(), shift.end(), [](double s) { return s > 0.0; });
  const bool singular = !shifted && !op.has_dirichlet();

  Eigen::VectorXd b(n);
  for (Eigen::Index k = 0; k < n; ++k) b(k) = rho[nodes[static_cast<std::size_t>(k)]] * rhs[nodes[static_cast<std::size_t>(k)]];
  ScalarField x(rhs.grid(), 0.0);
  if (dirichlet != nullptr) {
    b += op.boundary_rhs(dirichlet->values());
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (op.unknown_of(i) < 0) x[i] = (*dirichlet)[i];
    }
  }
  Eigen::SparseMatrix<double> A = op.shifted_matrix(shift);
  if (singular) {
    const double total = b.sum();
    const double scale = b.cwiseAbs().sum();
    if (std::abs(total) > 1e-10 * std::max(scale, 1e-300)) {
      throw InputError("singular operator: right-hand side is not mean-zero");
    }
    // Pin the first unknown to zero; the mean is removed afterwards.
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, 0); it; ++it) it.valueRef() = it.row() == 0 ? 1.0 : 0.0;
    for (Eigen::Index c = 1; c < n; ++c) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
        if (it.row() == 0) it.valueRef() = 0.0;
      }
    }
    b(0) = 0.0;
  }

  Eigen::VectorXd sol;
  const bool direct = g.dimension() <= 2 || nodes.size() <= opt.direct_limit;
  if (direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("sparse factorization failed (operator not positive definite)");
    sol = ldlt.solve(b);
  } else {
    // Jacobi preconditioning: no breakdown for large monotone shifts, where incomplete Cholesky can fail.
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(opt.tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(opt.max_iterations));
    cg.compute(A);
    sol = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      throw ConvergenceError("conjugate gradient did not converge: relative residual " + std::to_string(cg.error()) +
                             " after " + std::to_string(cg.iterations()) + " iterations");
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) x[nodes[static_cast<std::size_t>(k)]] = sol(k);
  if (singular) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      num += rho[nodes[k]] * x[nodes[k]];
      den += rho[nodes[k]];
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) x[nodes[k]] -= num / den;
  }
  return x;
}

/// S + diag(rho * shift) factored once for repeated solves with a positive shift or Dirichlet rows.
class ShiftedSystem {
 public:
  ShiftedSystem(const DiscreteOperator& op, const std::vector<double>& shift, const LinearSolveOptions& opt = {})
      : direct_(op.grid().dimension() <= 2 || op.unknown_count() <= opt.direct_limit) {
    A_ = op.shifted_matrix(shift);
    if (direct_) {
      ldlt_.compute(A_);
      if (ldlt_.info() != Eigen::Success) {
        throw ConvergenceError("sparse factorization failed (operator not positive definite)");
      }
    } else {
      cg_.setTolerance(opt.tol);
      cg_.setMaxIterations(static_cast<Eigen::Index>(opt.max_iterations));
      cg_.compute(A_);
    }
  }

  /// Solves with a right-hand side already scaled by rho.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) {
    if (direct_) return ldlt_.solve(b);
    Eigen::VectorXd x = cg_.solve(b);
    iterations_ = static_cast<std::size_t>(cg_.iterations());
    if (cg_.info() != Eigen::Success) {
      throw ConvergenceError("conjugate gradient did not converge: relative residual " + std::to_string(cg_.error()) +
                             " after " + std::to_string(cg_.iterations()) + " iterations");
    }
    return x;
  }

  const Eigen::SparseMatrix<double>& matrix() const { return A_; }
  bool direct() const { return direct_; }
  std::size_t last_iterations() const { return iterations_; }

 private:
  bool direct_;
  std::size_t iterations_ = 0;
  Eigen::SparseMatrix<double> A_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg_;
};

// ---------------------------------------------------------------------------
// Semilinear problem in remainder form.
// ---------------------------------------------------------------------------

/// N^(v) = L v + c+ (e^{2v} - 1) + c- (1 - e^{-2v}) + f for u = u_hat + v.
struct SemilinearProblem {
  GridPtr grid;
  OperatorMode mode = OperatorMode::Line;
  std::shared_ptr<const DiscreteOperator> op;
  std::vector<double> c_plus;
  std::vector<double> c_minus;
  std::vector<double> f;
  ScalarField u_hat;
  ScalarField boundary;  // v on Dirichlet nodes

  double nonlinearity(std::size_t i, double v) const {
    return c_plus[i] * std::expm1(2.0 * v) - c_minus[i] * std::expm1(-2.0 * v);
  }
  double nonlinearity_derivative(std::size_t i, double v) const {
    return 2.0 * c_plus[i] * std::exp(2.0 * v) + 2.0 * c_minus[i] * std::exp(-2.0 * v);
  }

  /// Discrete N^(v) at unknown nodes; zero on Dirichlet nodes.
  std::vector<double> residual(const std::vector<double>& v) const {
    std::vector<double> r = op->apply(v);
    for (std::size_t i : op->unknown_nodes()) r[i] += nonlinearity(i, v[i]) + f[i];
    return r;
  }

  /// A field equal to `boundary` on Dirichlet nodes and `inner` elsewhere.
  ScalarField with_boundary(const std::vector<double>& inner) const {
    ScalarField v(grid, inner);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (op->unknown_of(i) < 0) v[i] = boundary[i];
    }
    return v;
  }
};

/// Assembles N^ from coefficient data, the approximate solution and its source f = N(u_hat).
///
/// Dirichlet values of v default to zero. Coefficients on Dirichlet nodes are ignored.
inline SemilinearProblem assemble_problem(const GridPtr& grid, const HiggsData& data, const ScalarField& u_hat,
                                          const ScalarField& source, OperatorMode mode,
                                          const ScalarField* boundary = nullptr) {
  if (mode != mode_for(*grid)) throw InputError("operator mode does not match the grid");
  if (u_hat.size() != grid->size() || source.size() != grid->size()) throw InputError("field size mismatch");
  SemilinearProblem p;
  p.grid = grid;
  p.mode = mode;
  p.u_hat = u_hat;
  p.op = std::make_shared<const DiscreteOperator>(grid, sample_horizontal(*grid, data.g0_sq));
  p.c_plus.assign(grid->size(), 0.0);
  p.c_minus.assign(grid->size(), 0.0);
  p.f.assign(grid->size(), 0.0);
  for (std::size_t i : p.op->unknown_nodes()) {
    const Complex z = grid->z(i);
    const double a2 = data.alpha_sq(z);
    const double b2 = data.beta_sq(z);
    if (!std::isfinite(u_hat[i]) || !std::isfinite(source[i])) {
      throw InputError("non-finite approximate solution or source at node " + std::to_string(i));
    }
    p.c_plus[i] = a2 > 0.0 ? std::exp(std::log(a2) + 2.0 * u_hat[i]) : 0.0;
    p.c_minus[i] = b2 > 0.0 ? std::exp(std::log(b2) - 2.0 * u_hat[i]) : 0.0;
    p.f[i] = source[i];
    if (!std::isfinite(p.c_plus[i]) || !std::isfinite(p.c_minus[i])) {
      throw InputError("non-finite coefficient at node " + std::to_string(i));
    }
  }
  p.boundary = boundary != nullptr ? *boundary : ScalarField(grid, 0.0);
  return p;
}

/// Residual of K - g0^{-2} Lap u - u_yy + |alpha|^2 e^{2u} - |beta|^2 e^{-2u} at unknown nodes; zero elsewhere.
inline std::vector<double> scalar_residual(const DiscreteOperator& op, const HiggsData& data,
                                           const std::vector<double>& u) {
  const GradedGrid& g = op.grid();
  if (u.size() != g.size()) throw InputError("field size mismatch");
  std::vector<double> r = op.apply(u);
  for (std::size_t i : op.unknown_nodes()) {
    const Complex z = g.z(i);
    const double a2 = data.alpha_sq(z);
    const double b2 = data.beta_sq(z);
    r[i] += data.K(z) + (a2 > 0.0 ? std::exp(std::log(a2) + 2.0 * u[i]) : 0.0) -
            (b2 > 0.0 ? std::exp(std::log(b2) - 2.0 * u[i]) : 0.0);
  }
  return r;
}

}  // namespace nahmpole
