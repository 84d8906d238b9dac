#pragma once

#include "helecloak/geometry.hpp"
#include "helecloak/kernels.hpp"

namespace helecloak {

// Concentric disks |x| < r_i inside |x| < r_e, background mode n.
struct AnnulusSpec {
  double r_i = 1.0;
  double r_e = 2.0;
  int n = 1;
  void validate() const;
};

// Confocal ellipses xi = xi_i inside xi = xi_e. Cos parity is the x-mode
// (H = cosh(n xi) cos(n eta)), Sin parity the y-mode (H = sinh(n xi) sin(n eta)).
struct ConfocalSpec {
  double xi_i = 0.5;
  double xi_e = 1.0;
  double focal = 1.0;
  int n = 1;
  Parity parity = Parity::Cos;
  void validate() const;
};

// Shells thinner than this are rejected: the conditions blow up as the shell
// closes.
inline constexpr double kMinShellGap = 1e-6;

double annulus_cloak_zeta(const AnnulusSpec& spec);
double annulus_shield_zeta(const AnnulusSpec& spec);
double ellipse_cloak_zeta(const ConfocalSpec& spec);
double ellipse_shield_zeta(const ConfocalSpec& spec);

// Electrostatic potential and pressure with their Cartesian gradients. The
// background is H = r^n cos(n theta) (or sin) and P = 12 H.
struct FieldSample {
  double phi = 0.0;
  double p = 0.0;
  Vec2 grad_phi;
  Vec2 grad_p;
};

FieldSample annulus_fields(const AnnulusSpec& spec, double zeta0, Vec2 point, Parity parity = Parity::Cos);
FieldSample ellipse_fields(const ConfocalSpec& spec, double zeta0, Vec2 point);

}  // namespace helecloak
