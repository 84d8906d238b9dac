#pragma once

#include "helecloak/kernels.hpp"

namespace helecloak {

enum class Frame { Polar, Elliptic };

// Harmonic background pair. With f(z) = z^n (polar) or T_n(z/l) (elliptic,
// Chebyshev), H = a_H * Re f and P = a_P * Re f for cos parity, Im f for sin
// parity. In the elliptic frame Re f = cosh(n xi) cos(n eta) and
// Im f = sinh(n xi) sin(n eta).
struct BackgroundField {
  Frame frame = Frame::Polar;
  double focal = 1.0;
  int n = 1;
  Parity parity = Parity::Cos;
  double amplitude_h = 1.0;
  double amplitude_p = 12.0;
  Vec2 origin{0.0, 0.0};

  void validate() const;

  double H(Vec2 x) const { return amplitude_h * mode(x); }
  double P(Vec2 x) const { return amplitude_p * mode(x); }
  Vec2 grad_H(Vec2 x) const { return mode_gradient(x) * amplitude_h; }
  Vec2 grad_P(Vec2 x) const { return mode_gradient(x) * amplitude_p; }

  // Unit-amplitude mode and its gradient.
  double mode(Vec2 x) const;
  Vec2 mode_gradient(Vec2 x) const;

  // Normal derivative of the unit mode at the nodes of a mesh.
  Vector mode_normal_derivative(const QuadratureMesh& mesh) const;
  Vector mode_values(const QuadratureMesh& mesh) const;
};

}  // namespace helecloak
