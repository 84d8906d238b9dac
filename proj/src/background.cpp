#include "helecloak/background.hpp"

#include <complex>

namespace helecloak {

namespace {

using Complex = std::complex<double>;

// f(z) and f'(z) for the background mode.
void evaluate_mode(const BackgroundField& bg, Vec2 x, Complex& f, Complex& df) {
  const Complex z(x.x - bg.origin.x, x.y - bg.origin.y);
  if (bg.frame == Frame::Polar) {
    Complex p = 1.0;
    for (int k = 1; k < bg.n; ++k) p *= z;
    df = static_cast<double>(bg.n) * p;
    f = p * z;
    return;
  }
  // Chebyshev recurrences T_{k+1} = 2u T_k - T_{k-1}, U likewise.
  const Complex u = z / bg.focal;
  Complex t0 = 1.0, t1 = u, u0 = 1.0, u1 = 2.0 * u;
  for (int k = 1; k < bg.n; ++k) {
    const Complex t2 = 2.0 * u * t1 - t0;
    t0 = t1;
    t1 = t2;
    const Complex u2 = 2.0 * u * u1 - u0;
    u0 = u1;
    u1 = u2;
  }
  f = t1;
  df = static_cast<double>(bg.n) * u0 / bg.focal;  // T_n' = n U_{n-1}
}

}  // namespace

void BackgroundField::validate() const {
  if (n < 1) throw InvalidArgumentError("background mode n must be >= 1");
  if (frame == Frame::Elliptic && (!(focal > 0.0) || !std::isfinite(focal)))
    throw InvalidArgumentError("elliptic background needs focal half-distance l > 0");
  if (!std::isfinite(amplitude_h) || !std::isfinite(amplitude_p))
    throw InvalidArgumentError("background amplitudes must be finite");
}

double BackgroundField::mode(Vec2 x) const {
  Complex f, df;
  evaluate_mode(*this, x, f, df);
  return parity == Parity::Cos ? f.real() : f.imag();
}

Vec2 BackgroundField::mode_gradient(Vec2 x) const {
  Complex f, df;
  evaluate_mode(*this, x, f, df);
  return parity == Parity::Cos ? Vec2{df.real(), -df.imag()} : Vec2{df.imag(), df.real()};
}

Vector BackgroundField::mode_normal_derivative(const QuadratureMesh& mesh) const {
  Vector out(mesh.size());
  const auto x = mesh.nodes();
  const auto nu = mesh.normals();
  for (int j = 0; j < mesh.size(); ++j) out[j] = dot(mode_gradient(x[j]), nu[j]);
  return out;
}

Vector BackgroundField::mode_values(const QuadratureMesh& mesh) const {
  Vector out(mesh.size());
  const auto x = mesh.nodes();
  for (int j = 0; j < mesh.size(); ++j) out[j] = mode(x[j]);
  return out;
}

}  // namespace helecloak
