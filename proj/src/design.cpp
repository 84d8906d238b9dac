#include "helecloak/design.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "helecloak/parallel.hpp"

namespace helecloak {

namespace {

constexpr int kProbeGrid = 41;
// Probes keep this many local node spacings away from every curve.
constexpr double kProbeClearance = 6.0;

bool clear_of(const QuadratureMesh& m, Vec2 x) {
  const int j = m.nearest_node(x);
  return norm(m.nodes()[j] - x) >= kProbeClearance * m.weights()[j];
}

double inner(const std::vector<ControlProfile>& profiles, bool flux_flux) {
  double s = 0.0;
  for (const auto& pr : profiles)
    s += weighted_dot(*pr.control, flux_flux ? pr.flux : pr.residual, pr.flux);
  return s;
}

}  // namespace

void PhysicalParams::validate() const {
  const double values[] = {gap, length, width, density, viscosity, permittivity, field, velocity};
  const char* names[] = {"gap", "length", "width", "density", "viscosity", "permittivity", "field", "velocity"};
  for (std::size_t k = 0; k < 8; ++k)
    if (!(values[k] > 0.0) || !std::isfinite(values[k]))
      throw InvalidArgumentError(std::string("physical parameter '") + names[k] + "' must be positive");
}

double PhysicalParams::zeta_scale() const {
  validate();
  return -(viscosity * velocity) / (permittivity * field);
}

double dimensionalize_zeta(const PhysicalParams& params, double zeta0) {
  if (!std::isfinite(zeta0)) throw InvalidArgumentError("zeta0 must be finite");
  return params.zeta_scale() * zeta0;
}

double nondimensionalize_zeta(const PhysicalParams& params, double volts) {
  if (!std::isfinite(volts)) throw InvalidArgumentError("voltage must be finite");
  return volts / params.zeta_scale();
}

double optimal_zeta(const std::vector<ControlProfile>& profiles) {
  double scale = 0.0, perimeter = 0.0;
  for (const auto& pr : profiles) {
    scale = std::max(scale, pr.residual.cwiseAbs().maxCoeff());
    perimeter += pr.control->perimeter();
  }
  const double ss = inner(profiles, true);
  if (!(ss > 1e-24 * perimeter * std::max(scale * scale, 1e-300)) || ss == 0.0)
    throw DegenerateDesignError(
        "electrostatic normal derivative vanishes on the control curve; zeta0 has no control authority");
  return inner(profiles, false) / (12.0 * ss);
}

double profile_cost(const std::vector<ControlProfile>& profiles, double zeta0) {
  double c = 0.0;
  for (const auto& pr : profiles) {
    const Vector d = pr.residual - 12.0 * zeta0 * pr.flux;
    c += weighted_dot(*pr.control, d, d);
  }
  return c;
}

DesignProblem::DesignProblem(const CloakConfig& geometry, const BackgroundField& bg, DesignMode mode)
    : geometry_(geometry), bg_(bg), mode_(mode) {
  geometry_.zeta0 = 0.0;
  geometry_.validate();
  bg_.validate();
  const std::vector<int> cell = geometry_.cell_of_object();
  electro_ = std::make_shared<const ElectrostaticSolution>(solve_electrostatic(geometry_.objects, bg_));

  if (mode_ == DesignMode::Cloak) {
    for (std::size_t c = 0; c < geometry_.controls.size(); ++c) {
      std::vector<MeshPtr> inside;
      for (std::size_t k = 0; k < geometry_.objects.size(); ++k)
        if (cell[k] == static_cast<int>(c)) inside.push_back(geometry_.objects[k]);
      const MeshPtr& control = geometry_.controls[c];
      if (inside.empty()) throw InvalidArgumentError("control curve " + std::to_string(c) + " encloses no object");
      const MixedSolution mixed = solve_interior_mixed(inside, control, bg_);
      ControlProfile pr;
      pr.control = control;
      pr.residual = bg_.amplitude_p * bg_.mode_normal_derivative(*control) - mixed.control_normal_derivative;
      pr.flux = electro_->normal_derivative(*control);
      profiles_.push_back(std::move(pr));
    }
  } else {
    const ExteriorSolution ext = solve_exterior_dirichlet(geometry_.controls, bg_);
    for (std::size_t c = 0; c < geometry_.controls.size(); ++c) {
      ControlProfile pr;
      pr.control = geometry_.controls[c];
      pr.residual = ext.control_normal_derivatives[c];
      pr.flux = electro_->normal_derivative(*pr.control);
      profiles_.push_back(std::move(pr));
    }
    if (geometry_.objects.size() > 1)
      warnings_.push_back(
          "shielding is not claimed for multi-object configurations; the reported zeta0 only minimizes the cost");
  }
  build_probes();
}

DesignResult DesignProblem::optimize(double a, double b) const {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw InvalidArgumentError("optimization interval must satisfy a < b");
  DesignResult r;
  r.mode = mode_;
  r.interval_min = a;
  r.interval_max = b;
  r.warnings = warnings_;
  r.unconstrained = optimal_zeta(profiles_);
  r.zeta0_opt = std::clamp(r.unconstrained, a, b);
  r.clipped = r.zeta0_opt != r.unconstrained;
  r.cost = std::max(0.0, cost(r.zeta0_opt));

  // Golden-section search driven by the exact cost difference
  //   F(x) - F(y) = 12 (y - x) (2 <r,s> - 12 (x + y) <s,s>),
  // which avoids cancellation near the minimum.
  const double rs = inner(profiles_, false), ss = inner(profiles_, true);
  auto less = [&](double x, double y) { return 12.0 * (y - x) * (2.0 * rs - 12.0 * (x + y) * ss) < 0.0; };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = a, hi = b;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  const double tol = 1e-13 * std::max(1.0, hi - lo);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    if (less(x1, x2)) {
      hi = x2;
      x2 = x1;
      x1 = hi - g * (hi - lo);
    } else {
      lo = x1;
      x1 = x2;
      x2 = lo + g * (hi - lo);
    }
  }
  r.golden_section = 0.5 * (lo + hi);
  if (std::abs(r.golden_section - r.zeta0_opt) > 1e-10 * std::max(1.0, std::abs(r.zeta0_opt))) {
    std::ostringstream os;
    os.precision(17);
    os << "golden-section verification failed: " << r.golden_section << " vs " << r.zeta0_opt;
    throw NumericalError(os.str());
  }
  for (const auto& pr : profiles_) r.residual_profile.push_back(pr.residual - 12.0 * r.zeta0_opt * pr.flux);
  return r;
}

void DesignProblem::build_probes() {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& c : geometry_.controls)
    for (Vec2 p : c->nodes()) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  const Vec2 center{0.5 * (xmin + xmax), 0.5 * (ymin + ymax)};
  const double half = 0.5 * std::max(xmax - xmin, ymax - ymin);
  const double extent = mode_ == DesignMode::Cloak ? 3.0 * half : half;
  auto clear = [&](Vec2 x) {
    for (const auto& m : geometry_.objects)
      if (!clear_of(*m, x)) return false;
    for (const auto& m : geometry_.controls)
      if (!clear_of(*m, x)) return false;
    return true;
  };
  for (int j = 0; j < kProbeGrid; ++j)
    for (int i = 0; i < kProbeGrid; ++i) {
      const Vec2 x{center.x - extent + 2.0 * extent * i / (kProbeGrid - 1),
                   center.y - extent + 2.0 * extent * j / (kProbeGrid - 1)};
      const bool in_control = geometry_.inside_control(x);
      const bool keep = mode_ == DesignMode::Cloak ? !in_control : (in_control && !geometry_.inside_object(x));
      if (keep && clear(x)) probes_.push_back(x);
    }
}

Certificate DesignProblem::certify(double cost_value) const {
  Certificate c;
  c.sqrt_cost = std::sqrt(std::max(0.0, cost_value));
  c.probes = probes_.size();
  std::vector<double> norms(probes_.size());
  parallel_for(probes_.size(), [&](std::size_t k) {
    double s = 0.0;
    for (const auto& m : geometry_.controls) {
      const auto y = m->nodes();
      const auto w = m->weights();
      for (int j = 0; j < m->size(); ++j) {
        const double g = green(probes_[k], y[j]);
        s += w[j] * g * g;
      }
    }
    norms[k] = std::sqrt(s);
  });
  for (double v : norms) c.constant = std::max(c.constant, v);
  c.bound = c.constant * c.sqrt_cost;
  return c;
}

double DesignProblem::sampled_error(double zeta0) const {
  CloakConfig cfg = geometry_;
  cfg.zeta0 = zeta0;
  const CoupledSolution sol = solve_coupled(cfg, bg_, electro_);
  std::vector<double> err(probes_.size());
  parallel_for(probes_.size(), [&](std::size_t k) {
    const double p = sol.pressure->p(probes_[k]);
    err[k] = mode_ == DesignMode::Cloak ? std::abs(p - bg_.P(probes_[k])) : std::abs(p);
  });
  double e = 0.0;
  for (double v : err) e = std::max(e, v);
  return e;
}

}  // namespace helecloak
