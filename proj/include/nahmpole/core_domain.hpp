// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nahmpole/error.hpp"

namespace nahmpole {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Polynomials in the horizontal coordinate z.
// ---------------------------------------------------------------------------

/// Complex polynomial with coefficients stored lowest degree first.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  /// Builds a * prod (z - r_j)^{n_j}.
  static Polynomial from_roots(Complex leading, const std::vector<std::pair<Complex, int>>& roots) {
    Polynomial p({leading});
    for (const auto& [root, order] : roots) {
      for (int k = 0; k < order; ++k) p = p.times_linear(root);
    }
    return p;
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Complex>& coefficients() const { return coeffs_; }
  Complex leading() const { return coeffs_.back(); }

  Complex operator()(Complex z) const {
    Complex acc{0.0, 0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() <= 1) return Polynomial({Complex{0.0, 0.0}});
    std::vector<Complex> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
  }

  /// Quotient of p by (z - root)^order via synthetic division; the remainder is dropped.
  Polynomial deflate(Complex root, int order) const {
    std::vector<Complex> c = coeffs_;
    for (int k = 0; k < order && c.size() > 1; ++k) {
      std::vector<Complex> q(c.size() - 1);
      Complex carry{0.0, 0.0};
      for (std::size_t i = c.size() - 1; i >= 1; --i) {
        carry = c[i] + carry * root;
        q[i - 1] = carry;
      }
      c = std::move(q);
    }
    return Polynomial(std::move(c));
  }

  Polynomial times_linear(Complex root) const {
    std::vector<Complex> r(coeffs_.size() + 1, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      r[i + 1] += coeffs_[i];
      r[i] -= root * coeffs_[i];
    }
    return Polynomial(std::move(r));
  }

 private:
  void trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == Complex{0.0, 0.0}) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(Complex{0.0, 0.0});
  }
  std::vector<Complex> coeffs_{Complex{0.0, 0.0}};
};

// ---------------------------------------------------------------------------
// Domain description.
// ---------------------------------------------------------------------------

/// A marked boundary point carrying a knot singularity of the given order.
struct KnotPoint {
  Complex position{0.0, 0.0};
  int order = 1;
};

enum class DomainKind { OdeLine, LimitSurface, AxisymSlab, TorusHalfCylinder, PlaneHalfSpace };

inline std::string to_string(DomainKind k) {
  switch (k) {
    case DomainKind::OdeLine: return "OdeLine";
    case DomainKind::LimitSurface: return "LimitSurface";
    case DomainKind::AxisymSlab: return "AxisymSlab";
    case DomainKind::TorusHalfCylinder: return "TorusHalfCylinder";
    case DomainKind::PlaneHalfSpace: return "PlaneHalfSpace";
  }
  return "unknown";
}

inline DomainKind domain_kind_from_string(const std::string& s) {
  for (auto k : {DomainKind::OdeLine, DomainKind::LimitSurface, DomainKind::AxisymSlab,
                 DomainKind::TorusHalfCylinder, DomainKind::PlaneHalfSpace}) {
    if (to_string(k) == s) return k;
  }
  throw InputError("unknown domain kind '" + s + "'");
}

/// Geometry of the computational domain.
///
/// `extents` holds the horizontal periods (LimitSurface, TorusHalfCylinder), the box
/// half-widths around `center` (PlaneHalfSpace) or the radial extent (AxisymSlab).
/// The vertical range is [y_min, y_max]; y_min is zero except for slabs that stay away
/// from the boundary on purpose.
struct DomainSpec {
  DomainKind kind = DomainKind::OdeLine;
  std::vector<double> extents;
  double y_min = 0.0;
  double y_max = 1.0;
  Complex center{0.0, 0.0};
  std::vector<KnotPoint> knots;
  int far_field_degree = 0;
};

// ---------------------------------------------------------------------------
// Grids.
// ---------------------------------------------------------------------------

enum class AxisKind { Periodic, Bounded, Radial };

enum class NodeClass : std::uint8_t { Interior, BottomFace, Lateral, Top, Axis };

/// Bijective map from the unit parameter t to an axis coordinate.
struct GradingMap {
  enum class Type { Uniform, Power, SymmetricPower, Explicit } type = Type::Uniform;
  double lo = 0.0;
  double hi = 1.0;
  double exponent = 1.0;

  double forward(double t) const {
    switch (type) {
      case Type::Uniform:
      case Type::Explicit: return lo + (hi - lo) * t;
      case Type::Power: return lo + (hi - lo) * std::pow(t, exponent);
      case Type::SymmetricPower: {
        const double s = 2.0 * t - 1.0;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        return mid + half * std::copysign(std::pow(std::abs(s), exponent), s);
      }
    }
    return 0.0;
  }

  double inverse(double x) const {
    switch (type) {
      case Type::Uniform:
      case Type::Explicit: return (x - lo) / (hi - lo);
      case Type::Power: return std::pow(std::max(0.0, (x - lo) / (hi - lo)), 1.0 / exponent);
      case Type::SymmetricPower: {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        const double q = (x - mid) / half;
        const double s = std::copysign(std::pow(std::abs(q), 1.0 / exponent), q);
        return 0.5 * (s + 1.0);
      }
    }
    return 0.0;
  }
};

struct Axis {
  AxisKind kind = AxisKind::Bounded;
  GradingMap map;
  std::vector<double> nodes;
  double period = 0.0;  // periodic axes only

  std::size_t size() const { return nodes.size(); }
};

struct GradingParams {
  double y_exponent = 2.0;           // power-law stretch toward y = y_min
  double horizontal_exponent = 1.0;  // symmetric stretch toward the box centre (plane)
  double radial_exponent = 1.0;      // stretch toward r = 0 (axisymmetric slab)
  bool include_y0 = true;            // remainder unknowns include the bottom face
};

inline constexpr std::size_t kMinResolution = 8;

/// Tensor-product nonuniform grid. Axis order is (x, x3, y) in 3D, (r, y) for
/// axisymmetric slabs, (x, x3) for surfaces and (y) for lines; the last index is
/// fastest in the flat numbering.
class GradedGrid {
 public:
  GradedGrid(DomainSpec spec, std::vector<Axis> axes, GradingParams grading)
      : spec_(std::move(spec)), axes_(std::move(axes)), grading_(grading) {
    strides_.assign(axes_.size(), 1);
    for (std::size_t a = axes_.size(); a-- > 1;) strides_[a - 1] = strides_[a] * axes_[a].size();
    size_ = 1;
    for (const auto& ax : axes_) size_ *= ax.size();
  }

  const DomainSpec& spec() const { return spec_; }
  DomainKind kind() const { return spec_.kind; }
  const GradingParams& grading() const { return grading_; }
  std::size_t dimension() const { return axes_.size(); }
  const Axis& axis(std::size_t a) const { return axes_[a]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t a) const { return strides_[a]; }

  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d;
    for (const auto& ax : axes_) d.push_back(ax.size());
    return d;
  }

  bool has_vertical() const { return spec_.kind != DomainKind::LimitSurface; }
  /// Index of the y axis; only meaningful when has_vertical().
  std::size_t vertical_axis() const { return axes_.size() - 1; }
  /// Number of horizontal axes (0 for lines, 1 for axisymmetric slabs).
  std::size_t horizontal_dims() const { return has_vertical() ? axes_.size() - 1 : axes_.size(); }

  std::size_t index_along(std::size_t flat, std::size_t a) const {
    return (flat / strides_[a]) % axes_[a].size();
  }

  std::size_t flat(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) f += idx[a] * strides_[a];
    return f;
  }

  double coordinate(std::size_t flat, std::size_t a) const { return axes_[a].nodes[index_along(flat, a)]; }

  double y(std::size_t flat) const { return has_vertical() ? coordinate(flat, vertical_axis()) : 0.0; }

  /// Horizontal position as a complex number (r + 0i on axisymmetric slabs).
  Complex z(std::size_t flat) const {
    switch (horizontal_dims()) {
      case 0: return {0.0, 0.0};
      case 1: return {coordinate(flat, 0), 0.0};
      default: return {coordinate(flat, 0), coordinate(flat, 1)};
    }
  }

  NodeClass classify(std::size_t flat) const {
    if (has_vertical()) {
      const std::size_t ya = vertical_axis();
      const std::size_t iy = index_along(flat, ya);
      if (iy == 0) return NodeClass::BottomFace;
      if (iy + 1 == axes_[ya].size()) return NodeClass::Top;
    }
    for (std::size_t a = 0; a < horizontal_dims(); ++a) {
      const Axis& ax = axes_[a];
      if (ax.kind == AxisKind::Periodic) continue;
      const std::size_t i = index_along(flat, a);
      if (ax.kind == AxisKind::Radial && i == 0) return NodeClass::Axis;
      if (i == 0 || i + 1 == ax.size()) return NodeClass::Lateral;
    }
    return NodeClass::Interior;
  }

  /// True for nodes that carry Dirichlet data in the discrete problems.
  bool is_dirichlet(std::size_t flat) const {
    const NodeClass c = classify(flat);
    return c != NodeClass::Interior && c != NodeClass::Axis;
  }

  /// Trapezoidal quadrature weight of one axis node (Cartesian measure).
  double axis_weight(std::size_t a, std::size_t i) const {
    const Axis& ax = axes_[a];
    if (ax.kind == AxisKind::Periodic) return ax.period / static_cast<double>(ax.size());
    const auto& x = ax.nodes;
    const std::size_t n = x.size();
    if (n == 1) return 1.0;
    if (i == 0) return 0.5 * (x[1] - x[0]);
    if (i + 1 == n) return 0.5 * (x[n - 1] - x[n - 2]);
    return 0.5 * (x[i + 1] - x[i - 1]);
  }

  double quadrature_weight(std::size_t flat) const {
    double w = 1.0;
    for (std::size_t a = 0; a < axes_.size(); ++a) w *= axis_weight(a, index_along(flat, a));
    return w;
  }

  /// Measure of the node hull (periods for periodic axes).
  double measure() const {
    double m = 1.0;
    for (const auto& ax : axes_) {
      m *= ax.kind == AxisKind::Periodic ? ax.period : ax.nodes.back() - ax.nodes.front();
    }
    return m;
  }

  /// Grid made of the horizontal axes only (used for surface and limit problems).
  std::shared_ptr<const GradedGrid> horizontal_grid() const {
    DomainSpec s = spec_;
    s.kind = DomainKind::LimitSurface;
    std::vector<Axis> ax(axes_.begin(), axes_.begin() + static_cast<std::ptrdiff_t>(horizontal_dims()));
    return std::make_shared<const GradedGrid>(std::move(s), std::move(ax), grading_);
  }

  /// Flat index of the horizontal node underlying a full-grid node.
  std::size_t horizontal_index(std::size_t flat) const {
    return has_vertical() ? flat / axes_[vertical_axis()].size() : flat;
  }

 private:
  DomainSpec spec_;
  std::vector<Axis> axes_;
  GradingParams grading_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

using GridPtr = std::shared_ptr<const GradedGrid>;

namespace detail {

inline Axis make_periodic_axis(double lo, double period, std::size_t n) {
  Axis ax;
  ax.kind = AxisKind::Periodic;
  ax.period = period;
  ax.map = {GradingMap::Type::Uniform, lo, lo + period, 1.0};
  for (std::size_t k = 0; k < n; ++k) ax.nodes.push_back(lo + period * static_cast<double>(k) / static_cast<double>(n));
  return ax;
}

inline Axis make_bounded_axis(AxisKind kind, GradingMap map, std::size_t n, bool include_lo) {
  Axis ax;
  ax.kind = kind;
  ax.map = map;
  const double denom = include_lo ? static_cast<double>(n - 1) : static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (include_lo ? static_cast<double>(k) : static_cast<double>(k + 1)) / denom;
    ax.nodes.push_back(k + 1 == n ? map.hi : map.forward(t));
  }
  if (include_lo) ax.nodes.front() = map.lo;
  return ax;
}

inline void check_exponent(double g, const char* what) {
  if (!(g >= 1.0 && g <= 4.0)) throw InputError(std::string(what) + " grading exponent must lie in [1, 4]");
}

}  // namespace detail

/// Builds the tensor-product grid for a domain.
inline GridPtr build_grid(const DomainSpec& spec, std::span<const std::size_t> resolution,
                          const GradingParams& grading = {}) {
  std::size_t needed = 0;
  switch (spec.kind) {
    case DomainKind::OdeLine: needed = 1; break;
    case DomainKind::LimitSurface:
    case DomainKind::AxisymSlab: needed = 2; break;
    case DomainKind::TorusHalfCylinder:
    case DomainKind::PlaneHalfSpace: needed = 3; break;
  }
  if (resolution.size() != needed) throw InputError("resolution must have one entry per axis");
  for (auto n : resolution) {
    if (n < kMinResolution) throw InputError("resolution below minimum");
  }
  detail::check_exponent(grading.y_exponent, "y");
  detail::check_exponent(grading.horizontal_exponent, "horizontal");
  detail::check_exponent(grading.radial_exponent, "radial");
  if (spec.kind != DomainKind::LimitSurface) {
    if (!(spec.y_max > 0.0)) throw InputError("y_max must be positive");
    if (!(spec.y_min >= 0.0 && spec.y_min < spec.y_max)) throw InputError("y_min must lie in [0, y_max)");
  }
  const std::size_t horiz = spec.kind == DomainKind::OdeLine ? 0 : (spec.kind == DomainKind::AxisymSlab ? 1 : 2);
  if (spec.kind != DomainKind::OdeLine && spec.extents.size() < horiz) throw InputError("missing domain extents");
  for (std::size_t a = 0; a < horiz; ++a) {
    if (!(spec.extents[a] > 0.0)) throw InputError("domain extents must be positive");
  }

  for (std::size_t i = 0; i < spec.knots.size(); ++i) {
    const auto& k = spec.knots[i];
    if (k.order < 1) throw InputError("order must be a positive integer");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(spec.knots[j].position - k.position) == 0.0) throw InputError("knot positions must be distinct");
    }
    bool inside = true;
    switch (spec.kind) {
      case DomainKind::TorusHalfCylinder:
      case DomainKind::LimitSurface:
        inside = k.position.real() >= 0.0 && k.position.real() < spec.extents[0] && k.position.imag() >= 0.0 &&
                 k.position.imag() < spec.extents[1];
        break;
      case DomainKind::PlaneHalfSpace: {
        const Complex d = k.position - spec.center;
        inside = std::abs(d.real()) < spec.extents[0] && std::abs(d.imag()) < spec.extents[1];
        break;
      }
      case DomainKind::AxisymSlab: inside = std::abs(k.position) < spec.extents[0]; break;
      case DomainKind::OdeLine: inside = false; break;
    }
    if (!inside) throw InputError("knot outside domain");
  }
  if (spec.kind == DomainKind::PlaneHalfSpace) {
    int total = 0;
    for (const auto& k : spec.knots) total += k.order;
    if (total != spec.far_field_degree) throw InputError("far-field degree must equal the sum of knot orders");
  }

  std::vector<Axis> axes;
  const GradingMap ymap{grading.y_exponent == 1.0 ? GradingMap::Type::Uniform : GradingMap::Type::Power, spec.y_min,
                        spec.y_max, grading.y_exponent};
  switch (spec.kind) {
    case DomainKind::OdeLine:
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, ymap, resolution[0], grading.include_y0));
      break;
    case DomainKind::LimitSurface:
      axes.push_back(detail::make_periodic_axis(0.0, spec.extents[0], resolution[0]));
      axes.push_back(detail::make_periodic_axis(0.0, spec.extents[1], resolution[1]));
      break;
    case DomainKind::AxisymSlab: {
      const GradingMap rmap{grading.radial_exponent == 1.0 ? GradingMap::Type::Uniform : GradingMap::Type::Power, 0.0,
                            spec.extents[0], grading.radial_exponent};
      axes.push_back(detail::make_bounded_axis(AxisKind::Radial, rmap, resolution[0], true));
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, ymap, resolution[1], grading.include_y0));
      break;
    }
    case DomainKind::TorusHalfCylinder:
      axes.push_back(detail::make_periodic_axis(0.0, spec.extents[0], resolution[0]));
      axes.push_back(detail::make_periodic_axis(0.0, spec.extents[1], resolution[1]));
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, ymap, resolution[2], grading.include_y0));
      break;
    case DomainKind::PlaneHalfSpace: {
      const auto type = grading.horizontal_exponent == 1.0 ? GradingMap::Type::Uniform : GradingMap::Type::SymmetricPower;
      const GradingMap xmap{type, spec.center.real() - spec.extents[0], spec.center.real() + spec.extents[0],
                            grading.horizontal_exponent};
      const GradingMap x3map{type, spec.center.imag() - spec.extents[1], spec.center.imag() + spec.extents[1],
                             grading.horizontal_exponent};
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, xmap, resolution[0], true));
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, x3map, resolution[1], true));
      axes.push_back(detail::make_bounded_axis(AxisKind::Bounded, ymap, resolution[2], grading.include_y0));
      break;
    }
  }
  return std::make_shared<const GradedGrid>(spec, std::move(axes), grading);
}

inline GridPtr build_grid(const DomainSpec& spec, std::initializer_list<std::size_t> resolution,
                          const GradingParams& grading = {}) {
  std::vector<std::size_t> r(resolution);
  return build_grid(spec, std::span<const std::size_t>(r), grading);
}

// ---------------------------------------------------------------------------
// Fields.
// ---------------------------------------------------------------------------

/// Real nodal values on a grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0) : grid_(std::move(grid)), values_(grid_->size(), fill) {}
  ScalarField(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw InputError("field size does not match grid");
  }

  template <class Fn>
  static ScalarField sample(GridPtr grid, Fn&& fn) {
    ScalarField f(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) f.values_[i] = fn(i);
    return f;
  }

  const GridPtr& grid() const { return grid_; }
  const GradedGrid& grid_ref() const { return *grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

// ---------------------------------------------------------------------------
// Higgs data.
// ---------------------------------------------------------------------------

using HorizontalFn = std::function<double(Complex)>;

/// Coefficients of the scalar equation on the horizontal domain.
///
/// When `poly` is set the data come from a Higgs field with upper entry p(z); then
/// alpha_sq = |p|^2 and the knots are the roots of p.
struct HiggsData {
  HorizontalFn K = [](Complex) { return 0.0; };
  HorizontalFn alpha_sq = [](Complex) { return 1.0; };
  HorizontalFn beta_sq = [](Complex) { return 0.0; };
  HorizontalFn g0_sq = [](Complex) { return 1.0; };
  std::vector<KnotPoint> knots;
  std::optional<Polynomial> poly;

  static HiggsData constant(double K, double alpha_sq, double beta_sq) {
    HiggsData d;
    d.K = [K](Complex) { return K; };
    d.alpha_sq = [alpha_sq](Complex) { return alpha_sq; };
    d.beta_sq = [beta_sq](Complex) { return beta_sq; };
    return d;
  }

  static HiggsData from_polynomial(const Polynomial& p, std::vector<KnotPoint> knots) {
    HiggsData d;
    d.alpha_sq = [p](Complex z) { return std::norm(p(z)); };
    d.knots = std::move(knots);
    d.poly = p;
    return d;
  }
};

inline std::vector<double> sample_horizontal(const GradedGrid& grid, const HorizontalFn& fn) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = fn(grid.z(i));
  return out;
}

/// Warning text when the data cannot support a decaying limit, else empty.
inline std::string solvability_warning(const GradedGrid& surface, const HiggsData& data) {
  double k_int = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    const double w = surface.quadrature_weight(i) * data.g0_sq(surface.z(i));
    k_int += w * data.K(surface.z(i));
    area += w;
  }
  if (k_int > 1e-12 * std::max(1.0, area)) {
    return "integral of K is positive: the data are inconsistent with a stable limit as y -> infinity";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Coordinates and norms.
// ---------------------------------------------------------------------------

struct SphericalCoords {
  double R = 0.0;
  double psi = 0.0;    // elevation above the boundary plane, in [0, pi/2]
  double theta = 0.0;  // arg(z - p); zero on the vertical axis
};

inline SphericalCoords spherical_coords(Complex z, double y, const KnotPoint& knot) {
  if (y < 0.0) throw InputError("spherical_coords requires y >= 0");
  const Complex d = z - knot.position;
  const double r = std::abs(d);
  const double R = std::hypot(r, y);
  if (R == 0.0) throw InputError("coordinate singularity at the knot");
  return {R, std::atan2(y, r), r == 0.0 ? 0.0 : std::arg(d)};
}

enum class Region { Interior, All };

struct FieldNorms {
  double linf = 0.0;
  double l2 = 0.0;
  double weighted_l2 = 0.0;  // weight y^2
};

inline FieldNorms field_norms(const ScalarField& f, Region region = Region::All) {
  const GradedGrid& g = f.grid_ref();
  FieldNorms n;
  double s2 = 0.0;
  double sw = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (region == Region::Interior && g.is_dirichlet(i)) continue;
    const double v = f[i];
    const double w = g.quadrature_weight(i);
    const double y = g.y(i);
    n.linf = std::max(n.linf, std::abs(v));
    s2 += w * v * v;
    sw += w * y * y * v * v;
  }
  n.l2 = std::sqrt(s2);
  n.weighted_l2 = std::sqrt(sw);
  return n;
}

}  // namespace nahmpole
