#include "helecloak/analytic.hpp"

#include <complex>

namespace helecloak {

namespace {

void check_mode(int n) {
  if (n < 1) throw InvalidArgumentError("background mode n must be >= 1");
}

double trig(Parity parity, double a) { return parity == Parity::Cos ? std::cos(a) : std::sin(a); }
double dtrig(Parity parity, double a) { return parity == Parity::Cos ? -std::sin(a) : std::cos(a); }

// Radial profiles of the confocal solution, u = f(xi) T(n eta).
struct ConfocalProfiles {
  int n;
  Parity parity;
  double xi_i, xi_e;
  double ci;   // image coefficient making phi Neumann on xi_i
  double s_e;  // d/dxi of the phi profile at xi_e, divided by n

  explicit ConfocalProfiles(const ConfocalSpec& s) : n(s.n), parity(s.parity), xi_i(s.xi_i), xi_e(s.xi_e) {
    ci = std::exp(n * xi_i) * dbackground(xi_i) / n;
    s_e = dphi(xi_e) / n;
  }
  double background(double xi) const { return parity == Parity::Cos ? std::cosh(n * xi) : std::sinh(n * xi); }
  double dbackground(double xi) const {
    return n * (parity == Parity::Cos ? std::sinh(n * xi) : std::cosh(n * xi));
  }
  double phi(double xi) const { return background(xi) + ci * std::exp(-n * xi); }
  double dphi(double xi) const { return dbackground(xi) - n * ci * std::exp(-n * xi); }
};

}  // namespace

void AnnulusSpec::validate() const {
  check_mode(n);
  if (!(r_i > 0.0) || !(r_e > r_i) || !std::isfinite(r_e))
    throw InvalidArgumentError("annulus needs 0 < r_i < r_e");
  if ((r_e - r_i) < kMinShellGap * r_e) throw InvalidArgumentError("annulus shell is too thin (r_e - r_i < 1e-6 r_e)");
}

void ConfocalSpec::validate() const {
  check_mode(n);
  if (!(focal > 0.0) || !std::isfinite(focal)) throw InvalidArgumentError("focal half-distance must be positive");
  if (!(xi_i > 0.0) || !(xi_e > xi_i) || !std::isfinite(xi_e))
    throw InvalidArgumentError("confocal ellipses need 0 < xi_i < xi_e");
  if (xi_e - xi_i < kMinShellGap) throw InvalidArgumentError("confocal shell is too thin (xi_e - xi_i < 1e-6)");
}

double annulus_cloak_zeta(const AnnulusSpec& spec) {
  spec.validate();
  const double a = std::pow(spec.r_i, 2 * spec.n), b = std::pow(spec.r_e, 2 * spec.n);
  return 2.0 * a * b / (b * b - a * a);
}

double annulus_shield_zeta(const AnnulusSpec& spec) {
  spec.validate();
  const double a = std::pow(spec.r_i, 2 * spec.n), b = std::pow(spec.r_e, 2 * spec.n);
  return 2.0 * b / (b - a);
}

double ellipse_cloak_zeta(const ConfocalSpec& spec) {
  spec.validate();
  const ConfocalProfiles f(spec);
  return f.ci / (f.phi(spec.xi_e) * f.s_e);
}

double ellipse_shield_zeta(const ConfocalSpec& spec) {
  spec.validate();
  const ConfocalProfiles f(spec);
  return std::exp(spec.n * spec.xi_e) / f.s_e;
}

FieldSample annulus_fields(const AnnulusSpec& spec, double zeta0, Vec2 point, Parity parity) {
  spec.validate();
  if (!std::isfinite(zeta0)) throw InvalidArgumentError("zeta0 must be finite");
  const int n = spec.n;
  const double r = norm(point);
  if (r < spec.r_i * (1.0 - 1e-12)) throw InvalidArgumentError("point lies inside the object disk");
  const double theta = std::atan2(point.y, point.x);
  const double ri2n = std::pow(spec.r_i, 2 * n), re2n = std::pow(spec.r_e, 2 * n);
  const double rn = std::pow(r, n), rmn = 1.0 / rn;

  // f(r) = alpha r^n + beta r^-n
  auto sample = [&](double alpha, double beta, double& value, Vec2& grad) {
    const double f = alpha * rn + beta * rmn;
    const double df = n * (alpha * rn - beta * rmn) / r;
    const double t = trig(parity, n * theta), dt = n * dtrig(parity, n * theta);
    value = f * t;
    const Vec2 er = point / r, et = perp(er);
    grad = er * (df * t) + et * (f * dt / r);
  };

  FieldSample out;
  sample(1.0, ri2n, out.phi, out.grad_phi);
  if (r <= spec.r_e) {
    const double amp = -6.0 / re2n * ((re2n - ri2n) * zeta0 - 2.0 * re2n);
    sample(amp, amp * ri2n, out.p, out.grad_p);
  } else {
    const double c = -6.0 / re2n * ((re2n * re2n - ri2n * ri2n) * zeta0 - 2.0 * ri2n * re2n);
    sample(12.0, c, out.p, out.grad_p);
  }
  return out;
}

FieldSample ellipse_fields(const ConfocalSpec& spec, double zeta0, Vec2 point) {
  spec.validate();
  if (!std::isfinite(zeta0)) throw InvalidArgumentError("zeta0 must be finite");
  const EllipticFrame frame{spec.focal};
  const EllipticCoords e = cartesian_to_elliptic(frame, point);
  if (e.xi < spec.xi_i * (1.0 - 1e-12)) throw InvalidArgumentError("point lies inside the object ellipse");
  const ConfocalProfiles f(spec);
  const int n = spec.n;

  const double amp = 12.0 * (1.0 - zeta0 * f.s_e * std::exp(-n * spec.xi_e));
  const double c = std::exp(n * spec.xi_e) * (amp * f.phi(spec.xi_e) - 12.0 * f.background(spec.xi_e));

  const std::complex<double> dz = frame.focal * std::sinh(std::complex<double>(e.xi, e.eta));
  auto sample = [&](double prof, double dprof, double& value, Vec2& grad) {
    const double t = trig(spec.parity, n * e.eta), dt = n * dtrig(spec.parity, n * e.eta);
    value = prof * t;
    const std::complex<double> g = std::complex<double>(dprof * t, prof * dt) / std::conj(dz);
    grad = {g.real(), g.imag()};
  };

  FieldSample out;
  sample(f.phi(e.xi), f.dphi(e.xi), out.phi, out.grad_phi);
  if (e.xi <= spec.xi_e) {
    sample(amp * f.phi(e.xi), amp * f.dphi(e.xi), out.p, out.grad_p);
  } else {
    const double decay = std::exp(-n * e.xi);
    sample(12.0 * f.background(e.xi) + c * decay, 12.0 * f.dbackground(e.xi) - n * c * decay, out.p, out.grad_p);
  }
  return out;
}

}  // namespace helecloak
