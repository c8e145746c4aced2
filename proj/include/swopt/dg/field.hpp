#pragma once
/**
 * @file field.hpp
 * @brief broken polynomial fields: storage, L2 projection, inverse mass and
 *        the area-weighted projection to continuous P1
 */

#include "swopt/dg/basis.hpp"
#include "swopt/mesh/mesh.hpp"

#include <functional>
#include <vector>

namespace swopt {

/**
 * @brief per-cell nodal coefficients of a C-component field of order P
 *
 * Storage is flat, cell-major then component then dof, so the array length
 * is num_cells * C * ndof.
 */
template <int P, int C = 3>
class DGField {
public:
  static constexpr int order = P;
  static constexpr int ncomp = C;
  static constexpr int ndof = LagrangeBasis<P>::N;
  using CellCoeffs = Eigen::Matrix<double, C, ndof, (ndof > 1 ? Eigen::RowMajor : Eigen::ColMajor)>;
  using CellMap = Eigen::Map<CellCoeffs>;
  using ConstCellMap = Eigen::Map<const CellCoeffs>;
  using Value = Eigen::Matrix<double, C, 1>;

  DGField() = default;
  explicit DGField(std::size_t ncells) : ncells_(ncells), data_(ncells * C * ndof, 0.0) {}

  std::size_t num_cells() const { return ncells_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  CellMap cell(std::size_t c) { return CellMap(data_.data() + c * C * ndof); }
  ConstCellMap cell(std::size_t c) const { return ConstCellMap(data_.data() + c * C * ndof); }

  Value eval(std::size_t c, const Vec2& ref) const {
    return cell(c) * LagrangeBasis<P>::instance().eval(ref);
  }

  /// trace at local vertex k (nodal basis: coefficient k)
  Value vertex_value(std::size_t c, int k) const { return cell(c).col(k); }

  Value mean(std::size_t c) const {
    const auto& ref = ReferenceElement<P>::instance();
    Value s = Value::Zero();
    for (std::size_t q = 0; q < ref.volume.size(); ++q) s += ref.volume.weights[q] * (cell(c) * ref.phi[q]);
    return 2.0 * s;
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  DGField& operator+=(const DGField& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  /// this += a * o
  DGField& axpy(double a, const DGField& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    return *this;
  }

  DGField& operator*=(double a) {
    for (double& x : data_) x *= a;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    for (double x : data_)
      if (!std::isfinite(x)) return false;
    return true;
  }

private:
  void check_same(const DGField& o) const {
    if (o.data_.size() != data_.size()) throw DomainError("DGField size mismatch");
  }

  std::size_t ncells_ = 0;
  std::vector<double> data_;
};

template <int C>
using PointFunction = std::function<Eigen::Matrix<double, C, 1>(const Point&)>;

/**
 * @brief cell-wise L2 projection of f
 *
 * Uses a collapsed Gauss rule of the given degree (default well above the
 * basis order so smooth data is integrated to near machine precision).
 */
template <int P, int C>
DGField<P, C> project(const PointFunction<C>& f, const Mesh& mesh, int degree = 2 * P + 10) {
  const auto& b = LagrangeBasis<P>::instance();
  const auto& ref = ReferenceElement<P>::instance();
  const QuadratureRule rule = collapsed_triangle_rule(degree);
  std::vector<typename LagrangeBasis<P>::Values> phi;
  for (const auto& x : rule.points) phi.push_back(b.eval(x));
  DGField<P, C> out(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    Eigen::Matrix<double, C, LagrangeBasis<P>::N> rhs;
    rhs.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = mesh.map_to_physical(static_cast<int>(c), rule.points[q].x(), rule.points[q].y());
      rhs += rule.weights[q] * f(x) * phi[q].transpose();
    }
    // the 2|K| factors of mass and load cancel
    out.cell(c) = rhs * ref.inv_mass;
  }
  return out;
}

/// scalar convenience overload
template <int P>
DGField<P, 1> project_scalar(const std::function<double(const Point&)>& f, const Mesh& mesh,
                             int degree = 2 * P + 10) {
  return project<P, 1>([&](const Point& x) { return Eigen::Matrix<double, 1, 1>(f(x)); }, mesh, degree);
}

/**
 * @brief rate = M^{-1} residual, cell by cell
 *
 * Throws DomainError on a degenerate (non-positive area) cell.
 */
template <int P, int C>
DGField<P, C> apply_inverse_mass(const DGField<P, C>& residual, const Mesh& mesh) {
  if (residual.num_cells() != mesh.num_cells()) throw DomainError("apply_inverse_mass: size mismatch");
  const auto& ref = ReferenceElement<P>::instance();
  DGField<P, C> out(residual.num_cells());
  const auto& area = mesh.geometry().area;
  for (std::size_t c = 0; c < residual.num_cells(); ++c) {
    if (!(area[c] > 0.0)) throw DomainError("singular mass block in cell " + std::to_string(c));
    out.cell(c) = residual.cell(c) * ref.inv_mass / (2.0 * area[c]);
  }
  return out;
}

/// physical mass matrix of cell c
template <int P>
Eigen::Matrix<double, LagrangeBasis<P>::N, LagrangeBasis<P>::N> cell_mass(const Mesh& mesh, int c) {
  return 2.0 * mesh.geometry().area[c] * ReferenceElement<P>::instance().mass;
}

/// vertex values: area-weighted average of the incident cell traces
template <int P, int C>
std::vector<Eigen::Matrix<double, C, 1>> dg_to_cg(const DGField<P, C>& field, const Mesh& mesh) {
  using V = Eigen::Matrix<double, C, 1>;
  std::vector<V> out(mesh.num_vertices(), V::Zero());
  std::vector<double> weight(mesh.num_vertices(), 0.0);
  const auto& area = mesh.geometry().area;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(static_cast<int>(c));
    for (int k = 0; k < 3; ++k) {
      out[t[k]] += area[c] * field.vertex_value(c, k);
      weight[t[k]] += area[c];
    }
  }
  for (std::size_t v = 0; v < out.size(); ++v)
    if (weight[v] > 0.0) out[v] /= weight[v];
  return out;
}

/// DG field of order P holding the continuous P1 interpolant of vertex data
template <int P, int C>
DGField<P, C> cg_to_dg(const std::vector<Eigen::Matrix<double, C, 1>>& vertex_values, const Mesh& mesh) {
  const auto& b = LagrangeBasis<P>::instance();
  DGField<P, C> out(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangle(static_cast<int>(c));
    for (int i = 0; i < LagrangeBasis<P>::N; ++i) {
      const Vec2& x = b.nodes[i];
      out.cell(c).col(i) = (1.0 - x.x() - x.y()) * vertex_values[t[0]] + x.x() * vertex_values[t[1]] +
                           x.y() * vertex_values[t[2]];
    }
  }
  return out;
}

} // namespace swopt
