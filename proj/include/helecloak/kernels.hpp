#pragma once

#include <Eigen/Dense>
#include <span>

#include "helecloak/geometry.hpp"

namespace helecloak {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Laplace fundamental solution G(x, y) = (1/2pi) ln|x - y|.
double green(Vec2 x, Vec2 y);
// Gradient of G with respect to x.
Vec2 green_gradient(Vec2 x, Vec2 y);

// Single-layer operator S on its own curve, Nystrom discretization with
// periodic logarithmic splitting.
Matrix assemble_single_layer(const QuadratureMesh& source);
// Single layer from `source` evaluated at the nodes of another curve.
Matrix assemble_single_layer(const QuadratureMesh& source, const QuadratureMesh& target);
// Single layer evaluated at free points (plain trapezoid).
Matrix assemble_single_layer(const QuadratureMesh& source, std::span<const Vec2> targets);

// Neumann-Poincare operator K* on its own curve. Diagonal is the curvature
// limit kappa/(4pi).
Matrix assemble_np_star(const QuadratureMesh& source);
// Normal derivative, along the target normals, of the single layer of
// `source` evaluated at the nodes of a disjoint curve.
Matrix assemble_single_layer_normal_derivative(const QuadratureMesh& source, const QuadratureMesh& target);

enum class Side { Exterior, Interior };

// (+-1/2 I + K*)[density]: normal derivative of the single layer on the
// exterior (+) or interior (-) side.
Vector jump_normal_derivative(const Matrix& np_star, const Vector& density, Side side);

// Pointwise single-layer value and gradient. Both raise NearFieldError when
// `x` is inside the near-field band of the source curve. The density is
// trigonometrically interpolated onto the refined nodes before summation.
double single_layer_value(const QuadratureMesh& source, const Vector& density, Vec2 x);
Vec2 single_layer_gradient(const QuadratureMesh& source, const Vector& density, Vec2 x);

// Trigonometric interpolant of a nodal density sampled at the refined nodes.
Vector refine_density(const QuadratureMesh& mesh, const Vector& density);
// Variants taking a density already on the refined nodes.
double refined_single_layer_value(const QuadratureMesh& source, const Vector& fine_density, Vec2 x);
Vec2 refined_single_layer_gradient(const QuadratureMesh& source, const Vector& fine_density, Vec2 x);

// Throws NearFieldError if `x` violates the near-field threshold of `source`.
void check_far_field(const QuadratureMesh& source, Vec2 x);

enum class Parity { Cos, Sin };

// beta_n(eta) = gamma(xi, eta)^{-1} cos(n eta) or sin(n eta) at the nodes of a
// confocal ellipse mesh whose parameter is eta.
Vector elliptic_basis(const EllipticFrame& frame, double xi, int n, Parity parity, const QuadratureMesh& mesh);

// Weighted inner product sum_j w_j a_j b_j on a mesh.
double weighted_dot(const QuadratureMesh& mesh, const Vector& a, const Vector& b);

}  // namespace helecloak
