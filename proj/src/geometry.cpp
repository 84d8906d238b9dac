#include "helecloak/geometry.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <sstream>

namespace helecloak {

namespace {

double wrap_parameter(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

class CircleCurve final : public ParametricCurve {
 public:
  explicit CircleCurve(double radius) : radius_(radius) {}
  CurveSample sample(double t) const override {
    const double c = std::cos(t), s = std::sin(t);
    return {{radius_ * c, radius_ * s}, {-radius_ * s, radius_ * c}, {-radius_ * c, -radius_ * s}};
  }
  std::string kind() const override { return "circle"; }

 private:
  double radius_;
};

class EllipseCurve final : public ParametricCurve {
 public:
  EllipseCurve(double a, double b) : a_(a), b_(b) {}
  CurveSample sample(double t) const override {
    const double c = std::cos(t), s = std::sin(t);
    return {{a_ * c, b_ * s}, {-a_ * s, b_ * c}, {-a_ * c, -b_ * s}};
  }
  std::string kind() const override { return "ellipse"; }

 private:
  double a_, b_;
};

class PolarCurve final : public ParametricCurve {
 public:
  explicit PolarCurve(RadiusFunctionPtr r) : radius_(std::move(r)) {}
  CurveSample sample(double t) const override {
    double r, dr, ddr;
    radius_->evaluate(t, r, dr, ddr);
    const double c = std::cos(t), s = std::sin(t);
    return {{r * c, r * s},
            {dr * c - r * s, dr * s + r * c},
            {ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s}};
  }
  std::string kind() const override { return "polar"; }

 private:
  RadiusFunctionPtr radius_;
};

class TrigCurve final : public ParametricCurve {
 public:
  TrigCurve(std::vector<double> xc, std::vector<double> xs, std::vector<double> yc, std::vector<double> ys,
            std::string kind)
      : xc_(std::move(xc)), xs_(std::move(xs)), yc_(std::move(yc)), ys_(std::move(ys)), kind_(std::move(kind)) {}

  CurveSample sample(double t) const override {
    CurveSample out;
    accumulate(xc_, xs_, t, out.position.x, out.velocity.x, out.acceleration.x);
    accumulate(yc_, ys_, t, out.position.y, out.velocity.y, out.acceleration.y);
    return out;
  }
  std::string kind() const override { return kind_; }

 private:
  static void accumulate(const std::vector<double>& cs, const std::vector<double>& sn, double t, double& v,
                         double& dv, double& ddv) {
    v = dv = ddv = 0.0;
    const std::size_t n = std::max(cs.size(), sn.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double a = k < cs.size() ? cs[k] : 0.0;
      const double b = (k < sn.size() && k > 0) ? sn[k] : 0.0;
      const double kk = static_cast<double>(k);
      const double c = std::cos(kk * t), s = std::sin(kk * t);
      v += a * c + b * s;
      dv += kk * (-a * s + b * c);
      ddv += -kk * kk * (a * c + b * s);
    }
  }

  std::vector<double> xc_, xs_, yc_, ys_;
  std::string kind_;
};

class FourierRadius final : public RadiusFunction {
 public:
  FourierRadius(std::vector<double> a, std::vector<double> b) : a_(std::move(a)), b_(std::move(b)) {}
  void evaluate(double t, double& r, double& dr, double& ddr) const override {
    r = dr = ddr = 0.0;
    const std::size_t n = std::max(a_.size(), b_.size());
    for (std::size_t k = 0; k < n; ++k) {
      const double a = k < a_.size() ? a_[k] : 0.0;
      const double b = (k < b_.size() && k > 0) ? b_[k] : 0.0;
      const double kk = static_cast<double>(k);
      const double c = std::cos(kk * t), s = std::sin(kk * t);
      r += a * c + b * s;
      dr += kk * (-a * s + b * c);
      ddr += -kk * kk * (a * c + b * s);
    }
  }

 private:
  std::vector<double> a_, b_;
};

class EllipticRadius final : public RadiusFunction {
 public:
  EllipticRadius(double ax, double ay) : ax2_(ax * ax), ay2_(ay * ay) {}
  void evaluate(double t, double& r, double& dr, double& ddr) const override {
    const double s = std::sin(t);
    const double q = ax2_ + (ay2_ - ax2_) * s * s;
    const double dq = (ay2_ - ax2_) * std::sin(2.0 * t);
    const double ddq = 2.0 * (ay2_ - ax2_) * std::cos(2.0 * t);
    r = std::sqrt(q);
    dr = dq / (2.0 * r);
    ddr = (ddq - 2.0 * dr * dr) / (2.0 * r);
  }

 private:
  double ax2_, ay2_;
};

// Straight edges joined by circular arcs. Each arc is traversed at constant
// parameter speed; each edge blends smoothly between the speeds of its two
// neighbouring arcs with a raised-cosine bump, so the parameter speed is C^1.
class RoundedPolygonCurve final : public ParametricCurve {
 public:
  RoundedPolygonCurve(std::span<const Vec2> vertices, double radius) : radius_(radius) {
    const int m = static_cast<int>(vertices.size());
    if (m < 3) throw InvalidArgumentError("rounded polygon needs at least 3 vertices");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw InvalidArgumentError("rounding radius must be positive (a polygon with sharp corners is not C1)");

    std::vector<double> turn(m), tangent_len(m);
    std::vector<Vec2> dir_in(m), dir_out(m);
    double total_turn = 0.0;
    for (int k = 0; k < m; ++k) {
      const Vec2 prev = vertices[(k + m - 1) % m], cur = vertices[k], next = vertices[(k + 1) % m];
      const Vec2 ein = cur - prev, eout = next - cur;
      if (norm(ein) == 0.0 || norm(eout) == 0.0) throw InvalidArgumentError("rounded polygon has repeated vertices");
      dir_in[k] = ein / norm(ein);
      dir_out[k] = eout / norm(eout);
      turn[k] = std::atan2(cross(dir_in[k], dir_out[k]), dot(dir_in[k], dir_out[k]));
      if (!(turn[k] > 0.0) || turn[k] >= kPi)
        throw InvalidArgumentError("rounded polygon must be strictly convex and counterclockwise");
      tangent_len[k] = radius * std::tan(0.5 * turn[k]);
      total_turn += turn[k];
    }
    if (std::abs(total_turn - kTwoPi) > 1e-9) throw InvalidArgumentError("polygon is not simple (winds more than once)");

    arcs_.resize(m);
    edges_.resize(m);
    double edge_total = 0.0, arc_total = 0.0;
    for (int k = 0; k < m; ++k) {
      Arc& a = arcs_[k];
      const Vec2 start = vertices[k] - dir_in[k] * tangent_len[k];
      a.center = start + perp(dir_in[k]) * radius;
      a.start_angle = std::atan2(start.y - a.center.y, start.x - a.center.x);
      a.sweep = turn[k];
      arc_total += radius * turn[k];
    }
    for (int k = 0; k < m; ++k) {
      const int k1 = (k + 1) % m;
      Edge& e = edges_[k];
      e.start = vertices[k] + dir_out[k] * tangent_len[k];
      e.dir = dir_out[k];
      e.length = norm(vertices[k1] - vertices[k]) - tangent_len[k] - tangent_len[k1];
      if (!(e.length > 0.0)) throw InvalidArgumentError("rounding arcs overlap: rounding radius too large for the polygon");
      edge_total += e.length;
    }

    if (!allocate(0.25, edge_total)) {
      // Arcs too long for graded allocation: fall back to arc-length speed.
      const bool ok = allocate(arc_total / (arc_total + edge_total), edge_total);
      if (!ok) throw InvalidArgumentError("rounded polygon parametrization failed");
    }
  }

  CurveSample sample(double t) const override {
    t = wrap_parameter(t);
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    std::size_t piece = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    piece = piece == 0 ? 0 : piece - 1;
    piece = std::min(piece, 2 * arcs_.size() - 1);
    const double local = t - breaks_[piece];
    const std::size_t k = piece / 2;
    if (piece % 2 == 0) {
      const Arc& a = arcs_[k];
      const double phi = a.start_angle + a.speed * local / radius_;
      const Vec2 u{std::cos(phi), std::sin(phi)};
      return {a.center + u * radius_, perp(u) * a.speed, u * (-(a.speed * a.speed) / radius_)};
    }
    const Edge& e = edges_[k];
    const double a0 = arcs_[k].speed, a1 = arcs_[(k + 1) % arcs_.size()].speed;
    const double u = local / e.span;
    const double w = kTwoPi * u;
    const double h_int = 0.5 * u * u + (std::cos(w) - 1.0) / (4.0 * kPi * kPi);
    const double s = e.span * (a0 * u + (a1 - a0) * h_int + e.bump * (0.5 * u - std::sin(w) / (4.0 * kPi)));
    const double speed = a0 + (a1 - a0) * (u - std::sin(w) / kTwoPi) + e.bump * 0.5 * (1.0 - std::cos(w));
    const double dspeed = ((a1 - a0) * (1.0 - std::cos(w)) + e.bump * kPi * std::sin(w)) / e.span;
    return {e.start + e.dir * s, e.dir * speed, e.dir * dspeed};
  }
  std::string kind() const override { return "rounded-polygon"; }

 private:
  struct Arc {
    Vec2 center;
    double start_angle = 0.0, sweep = 0.0, span = 0.0, speed = 0.0;
  };
  struct Edge {
    Vec2 start, dir;
    double length = 0.0, span = 0.0, bump = 0.0;
  };

  bool allocate(double arc_share, double edge_total) {
    for (Arc& a : arcs_) {
      a.span = arc_share * a.sweep;  // sweeps add up to 2*pi
      a.speed = radius_ * a.sweep / a.span;
    }
    const std::size_t m = arcs_.size();
    for (std::size_t k = 0; k < m; ++k) {
      Edge& e = edges_[k];
      e.span = kTwoPi * (1.0 - arc_share) * e.length / edge_total;
      e.bump = 2.0 * e.length / e.span - arcs_[k].speed - arcs_[(k + 1) % m].speed;
      if (e.bump < -1e-12) return false;
      e.bump = std::max(e.bump, 0.0);
    }
    breaks_.clear();
    double t = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      breaks_.push_back(t);
      t += arcs_[k].span;
      breaks_.push_back(t);
      t += edges_[k].span;
    }
    return true;
  }

  double radius_;
  std::vector<Arc> arcs_;
  std::vector<Edge> edges_;
  std::vector<double> breaks_;
};

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

Vec2 Placement::apply(Vec2 p) const { return center + apply_direction(p); }

Vec2 Placement::apply_direction(Vec2 v) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  return Vec2{c * v.x - s * v.y, s * v.x + c * v.y} * scale;
}

void EllipticFrame::validate() const {
  if (!(focal > 0.0) || !std::isfinite(focal)) throw InvalidArgumentError("elliptic frame needs focal half-distance l > 0");
}

double EllipticFrame::metric(double xi, double eta) const {
  const double sh = std::sinh(xi), s = std::sin(eta);
  return focal * std::sqrt(sh * sh + s * s);
}

Vec2 EllipticFrame::to_cartesian(double xi, double eta) const {
  return {focal * std::cosh(xi) * std::cos(eta), focal * std::sinh(xi) * std::sin(eta)};
}

EllipticCoords cartesian_to_elliptic(const EllipticFrame& frame, Vec2 point) {
  frame.validate();
  const std::complex<double> w = std::acosh(std::complex<double>(point.x, point.y) / frame.focal);
  // Principal branch gives Re w >= 0; cosh is even so flip both parts if needed.
  double xi = w.real(), eta = w.imag();
  if (xi < 0.0) {
    xi = -xi;
    eta = -eta;
  }
  if (eta < 0.0) eta += kTwoPi;
  if (eta >= kTwoPi) eta -= kTwoPi;
  return {xi, eta};
}

RadiusFunctionPtr fourier_radius(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
  if (cos_coeffs.empty()) throw InvalidArgumentError("radius function needs at least a constant term");
  return std::make_shared<FourierRadius>(std::move(cos_coeffs), std::move(sin_coeffs));
}

RadiusFunctionPtr elliptic_radius(double ax, double ay) {
  if (!(ax > 0.0) || !(ay > 0.0)) throw InvalidArgumentError("elliptic radius needs positive semi-axes");
  return std::make_shared<EllipticRadius>(ax, ay);
}

RadiusFunctionPtr flower_radius() { return fourier_radius({1.0, 0.0, 0.0, 0.0, 0.0, -0.1}); }
RadiusFunctionPtr peanut_radius() { return elliptic_radius(1.0, 0.5); }

CurvePtr make_circle_curve(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgumentError("circle radius must be positive");
  return std::make_shared<CircleCurve>(radius);
}

CurvePtr make_ellipse_curve(const EllipticFrame& frame, double xi) {
  frame.validate();
  if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgumentError("elliptic radius xi must be positive");
  return std::make_shared<EllipseCurve>(frame.focal * std::cosh(xi), frame.focal * std::sinh(xi));
}

CurvePtr make_ellipse_axes_curve(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidArgumentError("ellipse semi-axes must be positive");
  return std::make_shared<EllipseCurve>(a, b);
}

CurvePtr make_polar_curve(RadiusFunctionPtr radius) {
  if (!radius) throw InvalidArgumentError("missing radius function");
  constexpr int kChecks = 8192;
  for (int j = 0; j < kChecks; ++j) {
    double r, dr, ddr;
    radius->evaluate(kTwoPi * j / kChecks, r, dr, ddr);
    if (!(r > 0.0)) throw InvalidArgumentError("radius function must be strictly positive on [0, 2pi)");
  }
  return std::make_shared<PolarCurve>(std::move(radius));
}

CurvePtr make_trig_curve(std::vector<double> x_cos, std::vector<double> x_sin, std::vector<double> y_cos,
                         std::vector<double> y_sin) {
  return std::make_shared<TrigCurve>(std::move(x_cos), std::move(x_sin), std::move(y_cos), std::move(y_sin),
                                     "trigonometric");
}

CurvePtr make_kite_curve() {
  return std::make_shared<TrigCurve>(std::vector<double>{0.01, 0.6, 0.39}, std::vector<double>{},
                                     std::vector<double>{}, std::vector<double>{0.0, 0.9}, "kite");
}

CurvePtr make_point_list_curve(std::span<const Vec2> points) {
  const std::size_t m = points.size();
  if (m < 8) throw InvalidArgumentError("point-list curve needs at least 8 points");
  const std::size_t kmax = m / 2;
  std::vector<double> xc(kmax + 1), xs(kmax + 1), yc(kmax + 1), ys(kmax + 1);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const bool nyquist = (m % 2 == 0) && k == kmax;
    const double scale = (k == 0 || nyquist) ? 1.0 / m : 2.0 / m;
    for (std::size_t j = 0; j < m; ++j) {
      const double t = kTwoPi * static_cast<double>(j) / m;
      const double c = std::cos(k * t), s = std::sin(k * t);
      xc[k] += scale * points[j].x * c;
      yc[k] += scale * points[j].y * c;
      if (!nyquist) {
        xs[k] += scale * points[j].x * s;
        ys[k] += scale * points[j].y * s;
      }
    }
  }
  return std::make_shared<TrigCurve>(std::move(xc), std::move(xs), std::move(yc), std::move(ys), "point-list");
}

CurvePtr make_rounded_polygon_curve(std::span<const Vec2> vertices, double rounding_radius) {
  return std::make_shared<RoundedPolygonCurve>(vertices, rounding_radius);
}

std::vector<Vec2> regular_polygon_vertices(int sides, double circumradius, double rotation) {
  if (sides < 3) throw InvalidArgumentError("regular polygon needs at least 3 sides");
  if (!(circumradius > 0.0)) throw InvalidArgumentError("circumradius must be positive");
  std::vector<Vec2> v(sides);
  for (int k = 0; k < sides; ++k) {
    const double a = rotation + kTwoPi * k / sides;
    v[k] = {circumradius * std::cos(a), circumradius * std::sin(a)};
  }
  return v;
}

double default_rounding_radius(std::span<const Vec2> vertices) {
  Vec2 c{};
  for (Vec2 v : vertices) c += v;
  c = c / static_cast<double>(vertices.size());
  double r = 0.0;
  for (Vec2 v : vertices) r = std::max(r, norm(v - c));
  return 1e-2 * r;
}

void validate_node_count(int nodes) {
  if (nodes < 4 || nodes % 2 != 0) {
    std::ostringstream os;
    os << "node count must be an even integer >= 4 (got " << nodes << ")";
    throw InvalidArgumentError(os.str());
  }
}

QuadratureMesh QuadratureMesh::sample(const ParametricCurve& curve, int nodes, const Placement& placement,
                                      std::string label) {
  validate_node_count(nodes);
  if (!(placement.scale > 0.0)) throw InvalidArgumentError("placement scale must be positive");
  QuadratureMesh mesh;
  mesh.label_ = label.empty() ? curve.kind() : std::move(label);
  const double h = kTwoPi / nodes;
  mesh.nodes_.resize(nodes);
  mesh.normals_.resize(nodes);
  mesh.params_.resize(nodes);
  mesh.weights_.resize(nodes);
  mesh.jacobians_.resize(nodes);
  mesh.curvatures_.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double t = h * j;
    const CurveSample s = curve.sample(t);
    const Vec2 x = placement.apply(s.position);
    const Vec2 dx = placement.apply_direction(s.velocity);
    const Vec2 ddx = placement.apply_direction(s.acceleration);
    const double jac = norm(dx);
    if (!(jac > 1e-14 * placement.scale) || !std::isfinite(jac))
      throw InvalidArgumentError("curve has a zero-Jacobian node (degenerate parametrization)");
    mesh.nodes_[j] = x;
    mesh.params_[j] = t;
    mesh.jacobians_[j] = jac;
    mesh.weights_[j] = h * jac;
    mesh.normals_[j] = Vec2{dx.y, -dx.x} / jac;
    mesh.curvatures_[j] = cross(dx, ddx) / (jac * jac * jac);
  }
  const int fine = kEvaluationRefinement * nodes;
  const double hf = kTwoPi / fine;
  mesh.fine_nodes_.resize(fine);
  mesh.fine_weights_.resize(fine);
  for (int j = 0; j < fine; ++j) {
    const CurveSample s = curve.sample(hf * j);
    mesh.fine_nodes_[j] = placement.apply(s.position);
    mesh.fine_weights_[j] = hf * norm(placement.apply_direction(s.velocity));
  }
  if (!(mesh.signed_area() > 0.0)) throw InvalidArgumentError("curve must be oriented counterclockwise");
  if (mesh.self_intersects()) throw InvalidArgumentError("curve self-intersects at sampling resolution");
  return mesh;
}

double QuadratureMesh::perimeter() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double QuadratureMesh::signed_area() const {
  double a = 0.0;
  const int n = size();
  for (int j = 0; j < n; ++j) a += cross(nodes_[j], nodes_[(j + 1) % n]);
  return 0.5 * a;
}

Vec2 QuadratureMesh::centroid() const {
  // Area centroid of the node polygon.
  double a = 0.0;
  Vec2 c{};
  const int n = size();
  for (int j = 0; j < n; ++j) {
    const Vec2 p = nodes_[j], q = nodes_[(j + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  return c / (3.0 * a);
}

double QuadratureMesh::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) d = std::max(d, norm2(nodes_[i] - nodes_[j]));
  return std::sqrt(d);
}

bool QuadratureMesh::contains(Vec2 p) const {
  bool inside = false;
  const int n = size();
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = nodes_[i], b = nodes_[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

int QuadratureMesh::nearest_node(Vec2 p) const {
  int best = 0;
  double dbest = std::numeric_limits<double>::infinity();
  for (int j = 0; j < size(); ++j) {
    const double d = norm2(nodes_[j] - p);
    if (d < dbest) {
      dbest = d;
      best = j;
    }
  }
  return best;
}

bool QuadratureMesh::in_near_field(Vec2 p) const {
  const int j = nearest_node(p);
  return norm(nodes_[j] - p) < kNearFieldFactor * weights_[j];
}

bool QuadratureMesh::self_intersects() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Vec2 a = nodes_[i], b = nodes_[(i + 1) % n];
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(a, b, nodes_[j], nodes_[(j + 1) % n])) return true;
    }
  }
  return false;
}

MeshPtr build_mesh(const ParametricCurve& curve, int nodes, const Placement& placement, std::string label) {
  return std::make_shared<const QuadratureMesh>(QuadratureMesh::sample(curve, nodes, placement, std::move(label)));
}

MeshPtr build_circle(double radius, Vec2 center, int nodes) {
  return build_mesh(*make_circle_curve(radius), nodes, Placement{center, 0.0, 1.0});
}

MeshPtr build_confocal_ellipse(const EllipticFrame& frame, double xi, int nodes, Vec2 center) {
  return build_mesh(*make_ellipse_curve(frame, xi), nodes, Placement{center, 0.0, 1.0});
}

MeshPtr build_polar_shape(RadiusFunctionPtr radius, int nodes, const Placement& placement) {
  return build_mesh(*make_polar_curve(std::move(radius)), nodes, placement);
}

MeshPtr build_kite(int nodes, const Placement& placement) { return build_mesh(*make_kite_curve(), nodes, placement); }

MeshPtr build_rounded_polygon(std::span<const Vec2> vertices, double rounding_radius, int nodes,
                              const Placement& placement) {
  return build_mesh(*make_rounded_polygon_curve(vertices, rounding_radius), nodes, placement);
}

MeshPtr build_point_list(std::span<const Vec2> points, int nodes, const Placement& placement) {
  return build_mesh(*make_point_list_curve(points), nodes, placement);
}

}  // namespace helecloak
