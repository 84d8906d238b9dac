#include "helecloak/kernels.hpp"

#include <complex>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "helecloak/parallel.hpp"

namespace helecloak {

namespace {

constexpr double kInv2Pi = 1.0 / kTwoPi;
constexpr double kInv4Pi = 1.0 / (2.0 * kTwoPi);

[[noreturn]] void throw_near_field(const QuadratureMesh& source, Vec2 x) {
  std::ostringstream os;
  os.precision(6);
  os << "target (" << x.x << ", " << x.y << ") is inside the near-field band of curve '" << source.label()
     << "'; move it at least " << kNearFieldFactor << " node spacings away or increase the node count";
  throw NearFieldError(os.str());
}

}  // namespace

double green(Vec2 x, Vec2 y) {
  const double r2 = norm2(x - y);
  if (r2 == 0.0) throw InvalidArgumentError("Green function is singular at coincident points");
  return 0.5 * kInv2Pi * std::log(r2);
}

Vec2 green_gradient(Vec2 x, Vec2 y) {
  const Vec2 d = x - y;
  const double r2 = norm2(d);
  if (r2 == 0.0) throw InvalidArgumentError("Green function gradient is singular at coincident points");
  return d * (kInv2Pi / r2);
}

void check_far_field(const QuadratureMesh& source, Vec2 x) {
  if (source.in_near_field(x)) throw_near_field(source, x);
}

Matrix assemble_single_layer(const QuadratureMesh& source) {
  const int n2 = source.size();
  const int n = n2 / 2;
  const double h = source.step();
  const auto x = source.nodes();
  const auto t = source.parameters();
  const auto jac = source.jacobians();

  // Kress weights depend only on the index difference.
  std::vector<double> r(n2);
  for (int k = 0; k < n2; ++k) {
    const double d = h * k;
    double s = 0.0;
    for (int m = 1; m < n; ++m) s += std::cos(m * d) / m;
    r[k] = -(kTwoPi / n2) * 2.0 * s - (kPi / (static_cast<double>(n) * n)) * std::cos(n * d);
  }

  Matrix out(n2, n2);
  parallel_for(static_cast<std::size_t>(n2), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n2; ++j) {
      double smooth;
      if (i == j) {
        smooth = kInv2Pi * std::log(jac[i]);
      } else {
        const double sn = std::sin(0.5 * (t[i] - t[j]));
        smooth = kInv4Pi * std::log(norm2(x[i] - x[j]) / (4.0 * sn * sn));
      }
      const int k = ((i - j) % n2 + n2) % n2;
      out(i, j) = (kInv4Pi * r[k] + h * smooth) * jac[j];
    }
  });
  return out;
}

Matrix assemble_single_layer(const QuadratureMesh& source, std::span<const Vec2> targets) {
  const auto y = source.nodes();
  const auto w = source.weights();
  for (Vec2 p : targets) check_far_field(source, p);
  Matrix out(static_cast<Eigen::Index>(targets.size()), source.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    for (int j = 0; j < source.size(); ++j)
      out(static_cast<Eigen::Index>(i), j) = 0.5 * kInv2Pi * std::log(norm2(targets[i] - y[j])) * w[j];
  });
  return out;
}

Matrix assemble_single_layer(const QuadratureMesh& source, const QuadratureMesh& target) {
  return assemble_single_layer(source, target.nodes());
}

Matrix assemble_np_star(const QuadratureMesh& source) {
  const int n = source.size();
  const auto x = source.nodes();
  const auto nu = source.normals();
  const auto w = source.weights();
  const auto kappa = source.curvatures();
  Matrix out(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out(i, j) = kInv4Pi * kappa[i] * w[j];
      } else {
        const Vec2 d = x[i] - x[j];
        out(i, j) = kInv2Pi * dot(d, nu[i]) / norm2(d) * w[j];
      }
    }
  });
  return out;
}

Matrix assemble_single_layer_normal_derivative(const QuadratureMesh& source, const QuadratureMesh& target) {
  const auto y = source.nodes();
  const auto w = source.weights();
  const auto x = target.nodes();
  const auto nu = target.normals();
  for (Vec2 p : x) check_far_field(source, p);
  Matrix out(target.size(), source.size());
  parallel_for(static_cast<std::size_t>(target.size()), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < source.size(); ++j) {
      const Vec2 d = x[i] - y[j];
      out(i, j) = kInv2Pi * dot(d, nu[i]) / norm2(d) * w[j];
    }
  });
  return out;
}

Vector jump_normal_derivative(const Matrix& np_star, const Vector& density, Side side) {
  if (np_star.rows() != density.size() || np_star.cols() != density.size())
    throw InvalidArgumentError("density length does not match the operator");
  const double half = side == Side::Exterior ? 0.5 : -0.5;
  return half * density + np_star * density;
}

Vector refine_density(const QuadratureMesh& mesh, const Vector& density) {
  const int n = mesh.size();
  if (density.size() != n) throw InvalidArgumentError("density length does not match the mesh");
  const int m = static_cast<int>(mesh.fine_nodes().size());
  Eigen::FFT<double> fft;
  std::vector<double> coarse(density.data(), density.data() + n);
  std::vector<std::complex<double>> coef;
  fft.fwd(coef, coarse);
  // Zero padding; the Nyquist coefficient is split between +-n/2.
  std::vector<std::complex<double>> padded(m, 0.0);
  const int half = n / 2;
  for (int k = 0; k < half; ++k) padded[k] = coef[k];
  for (int k = 1; k < half; ++k) padded[m - k] = coef[n - k];
  padded[half] = 0.5 * coef[half];
  padded[m - half] = 0.5 * coef[half];
  std::vector<std::complex<double>> fine;
  fft.inv(fine, padded);
  Vector out(m);
  const double scale = static_cast<double>(m) / n;
  for (int j = 0; j < m; ++j) out[j] = scale * fine[j].real();
  return out;
}

double refined_single_layer_value(const QuadratureMesh& source, const Vector& fine_density, Vec2 x) {
  check_far_field(source, x);
  const auto y = source.fine_nodes();
  const auto w = source.fine_weights();
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) s += std::log(norm2(x - y[j])) * w[j] * fine_density[j];
  return 0.5 * kInv2Pi * s;
}

Vec2 refined_single_layer_gradient(const QuadratureMesh& source, const Vector& fine_density, Vec2 x) {
  check_far_field(source, x);
  const auto y = source.fine_nodes();
  const auto w = source.fine_weights();
  Vec2 g{};
  for (std::size_t j = 0; j < y.size(); ++j) {
    const Vec2 d = x - y[j];
    g += d * (w[j] * fine_density[j] / norm2(d));
  }
  return g * kInv2Pi;
}

double single_layer_value(const QuadratureMesh& source, const Vector& density, Vec2 x) {
  check_far_field(source, x);
  return refined_single_layer_value(source, refine_density(source, density), x);
}

Vec2 single_layer_gradient(const QuadratureMesh& source, const Vector& density, Vec2 x) {
  check_far_field(source, x);
  return refined_single_layer_gradient(source, refine_density(source, density), x);
}

Vector elliptic_basis(const EllipticFrame& frame, double xi, int n, Parity parity, const QuadratureMesh& mesh) {
  frame.validate();
  if (n < 0) throw InvalidArgumentError("basis mode must be non-negative");
  const auto eta = mesh.parameters();
  Vector out(mesh.size());
  for (int j = 0; j < mesh.size(); ++j) {
    const double trig = parity == Parity::Cos ? std::cos(n * eta[j]) : std::sin(n * eta[j]);
    out[j] = trig / frame.metric(xi, eta[j]);
  }
  return out;
}

double weighted_dot(const QuadratureMesh& mesh, const Vector& a, const Vector& b) {
  const auto w = mesh.weights();
  double s = 0.0;
  for (int j = 0; j < mesh.size(); ++j) s += w[j] * a[j] * b[j];
  return s;
}

}  // namespace helecloak
