#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "helecloak/types.hpp"

namespace helecloak {

inline constexpr int kDefaultNodes = 256;

// Position and the first two parameter derivatives of a curve at one
// parameter value.
struct CurveSample {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
};

// Closed, counterclockwise, 2*pi-periodic curve.
class ParametricCurve {
 public:
  virtual ~ParametricCurve() = default;
  virtual CurveSample sample(double t) const = 0;
  virtual std::string kind() const = 0;
};

using CurvePtr = std::shared_ptr<const ParametricCurve>;

// Rigid motion plus uniform scaling applied when a curve is sampled.
struct Placement {
  Vec2 center{0.0, 0.0};
  double rotation = 0.0;
  double scale = 1.0;

  Vec2 apply(Vec2 p) const;
  Vec2 apply_direction(Vec2 v) const;
};

// Focal half-distance of the elliptic coordinate system
//   x1 = l cosh(xi) cos(eta),  x2 = l sinh(xi) sin(eta).
struct EllipticFrame {
  double focal = 1.0;

  void validate() const;
  // Metric factor gamma(xi, eta) = l sqrt(sinh^2 xi + sin^2 eta).
  double metric(double xi, double eta) const;
  Vec2 to_cartesian(double xi, double eta) const;
};

struct EllipticCoords {
  double xi = 0.0;
  double eta = 0.0;  // in [0, 2*pi)
};

EllipticCoords cartesian_to_elliptic(const EllipticFrame& frame, Vec2 point);

// Radius function r(t) of a star-shaped curve together with r' and r''.
class RadiusFunction {
 public:
  virtual ~RadiusFunction() = default;
  virtual void evaluate(double t, double& r, double& dr, double& ddr) const = 0;
};

using RadiusFunctionPtr = std::shared_ptr<const RadiusFunction>;

// r(t) = a0 + sum_k (a_k cos kt + b_k sin kt). cos_coeffs[0] is a0;
// sin_coeffs[0] is ignored.
RadiusFunctionPtr fourier_radius(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs = {});
// r(t) = sqrt(ax^2 cos^2 t + ay^2 sin^2 t).
RadiusFunctionPtr elliptic_radius(double ax, double ay);

// Flower boundary r(t) = 1 - 0.1 cos 5t.
RadiusFunctionPtr flower_radius();
// Peanut boundary r(t) = sqrt(cos^2 t + 0.25 sin^2 t).
RadiusFunctionPtr peanut_radius();

CurvePtr make_circle_curve(double radius);
CurvePtr make_ellipse_curve(const EllipticFrame& frame, double xi);
// Axis-aligned ellipse (a cos t, b sin t).
CurvePtr make_ellipse_axes_curve(double a, double b);
CurvePtr make_polar_curve(RadiusFunctionPtr radius);
// Trigonometric polynomial curve; coefficient index k multiplies cos(kt) or
// sin(kt).
CurvePtr make_trig_curve(std::vector<double> x_cos, std::vector<double> x_sin,
                         std::vector<double> y_cos, std::vector<double> y_sin);
CurvePtr make_kite_curve();
// Trigonometric interpolant through points assumed equispaced in parameter.
CurvePtr make_point_list_curve(std::span<const Vec2> points);
// Convex polygon with every corner replaced by a circular arc. The parameter
// is graded so that arcs receive a quarter of the nodes.
CurvePtr make_rounded_polygon_curve(std::span<const Vec2> vertices, double rounding_radius);

// Vertices of a regular polygon inscribed in a circle, counterclockwise,
// first vertex at angle `rotation`.
std::vector<Vec2> regular_polygon_vertices(int sides, double circumradius, double rotation = 0.0);

// Discretization of a closed curve on N equispaced parameter nodes
// (trapezoidal rule).
class QuadratureMesh {
 public:
  static QuadratureMesh sample(const ParametricCurve& curve, int nodes, const Placement& placement = {},
                               std::string label = {});

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const Vec2> nodes() const { return nodes_; }
  std::span<const Vec2> normals() const { return normals_; }
  std::span<const double> parameters() const { return params_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> jacobians() const { return jacobians_; }
  std::span<const double> curvatures() const { return curvatures_; }
  // The curve resampled at kEvaluationRefinement times the node count, used
  // for off-curve evaluation of layer potentials.
  std::span<const Vec2> fine_nodes() const { return fine_nodes_; }
  std::span<const double> fine_weights() const { return fine_weights_; }
  const std::string& label() const { return label_; }

  double step() const { return kTwoPi / size(); }
  double perimeter() const;
  double signed_area() const;
  Vec2 centroid() const;
  double diameter() const;

  // Point-in-curve test on the node polygon.
  bool contains(Vec2 p) const;
  // Index of the node nearest to p.
  int nearest_node(Vec2 p) const;
  // True when p is closer than twice the local node spacing to the curve.
  bool in_near_field(Vec2 p) const;
  // True if any pair of non-adjacent node-polygon edges intersect.
  bool self_intersects() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<Vec2> normals_;
  std::vector<double> params_;
  std::vector<double> weights_;
  std::vector<double> jacobians_;
  std::vector<double> curvatures_;
  std::vector<Vec2> fine_nodes_;
  std::vector<double> fine_weights_;
  std::string label_;
};

using MeshPtr = std::shared_ptr<const QuadratureMesh>;

inline constexpr double kNearFieldFactor = 2.0;
inline constexpr int kEvaluationRefinement = 4;

MeshPtr build_circle(double radius, Vec2 center, int nodes = kDefaultNodes);
MeshPtr build_confocal_ellipse(const EllipticFrame& frame, double xi, int nodes = kDefaultNodes,
                               Vec2 center = {});
MeshPtr build_polar_shape(RadiusFunctionPtr radius, int nodes = kDefaultNodes, const Placement& placement = {});
MeshPtr build_kite(int nodes = kDefaultNodes, const Placement& placement = {});
MeshPtr build_rounded_polygon(std::span<const Vec2> vertices, double rounding_radius,
                              int nodes = kDefaultNodes, const Placement& placement = {});
MeshPtr build_point_list(std::span<const Vec2> points, int nodes = kDefaultNodes,
                         const Placement& placement = {});
MeshPtr build_mesh(const ParametricCurve& curve, int nodes, const Placement& placement = {},
                   std::string label = {});

// Rounding radius used when none is given: 1e-2 of the circumradius.
double default_rounding_radius(std::span<const Vec2> vertices);

void validate_node_count(int nodes);

}  // namespace helecloak
