#pragma once

#include <string>
#include <vector>

#include "helecloak/solver.hpp"

namespace helecloak {

// Dimensional parameters of the Hele-Shaw cell, SI units.
struct PhysicalParams {
  double gap = 15e-6;
  double length = 2e-3;
  double width = 2e-3;
  double density = 1e3;
  double viscosity = 1e-3;
  double permittivity = 7.08e-10;
  double field = 300.0;
  double velocity = 51e-6;

  void validate() const;
  // Volts per unit dimensionless zeta: -mu u_ext / (eps E).
  double zeta_scale() const;
};

double dimensionalize_zeta(const PhysicalParams& params, double zeta0);
double nondimensionalize_zeta(const PhysicalParams& params, double volts);

enum class DesignMode { Cloak, Shield };

// Residual r and electrostatic flux s = dphi/dnu on one control curve. The
// cost is sum over controls of ||r - 12 zeta s||^2.
struct ControlProfile {
  MeshPtr control;
  Vector residual;
  Vector flux;
};

inline constexpr double kDefaultIntervalMin = -100.0;
inline constexpr double kDefaultIntervalMax = 100.0;

struct DesignResult {
  DesignMode mode = DesignMode::Cloak;
  double zeta0_opt = 0.0;
  double unconstrained = 0.0;
  bool clipped = false;
  double cost = 0.0;
  double interval_min = kDefaultIntervalMin;
  double interval_max = kDefaultIntervalMax;
  // r - 12 zeta0_opt s on each control.
  std::vector<Vector> residual_profile;
  // Minimizer found by golden-section search on the cost.
  double golden_section = 0.0;
  std::vector<std::string> warnings;
};

// Error estimate |p - P| <= C sqrt(cost) (cloak, outside the controls) or
// |p| <= C sqrt(cost) (shield, in the shells). C is the largest L2 norm of the
// Green kernel over the controls along a probe set; it is an estimate, not a
// certificate.
struct Certificate {
  double sqrt_cost = 0.0;
  double constant = 0.0;
  double bound = 0.0;
  std::size_t probes = 0;
};

// Unconstrained minimizer <r, s> / (12 <s, s>). Throws DegenerateDesignError
// when s vanishes on the controls.
double optimal_zeta(const std::vector<ControlProfile>& profiles);
double profile_cost(const std::vector<ControlProfile>& profiles, double zeta0);

// The two zeta-independent boundary value problems and the electrostatic
// solve, performed once.
class DesignProblem {
 public:
  // geometry.zeta0 is ignored.
  DesignProblem(const CloakConfig& geometry, const BackgroundField& bg, DesignMode mode);

  DesignMode mode() const { return mode_; }
  const CloakConfig& geometry() const { return geometry_; }
  const BackgroundField& background() const { return bg_; }
  const std::vector<ControlProfile>& profiles() const { return profiles_; }
  const std::shared_ptr<const ElectrostaticSolution>& electro() const { return electro_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double cost(double zeta0) const { return profile_cost(profiles_, zeta0); }
  DesignResult optimize(double a = kDefaultIntervalMin, double b = kDefaultIntervalMax) const;

  // Sample points: outside all controls (cloak) or inside the shells (shield).
  const std::vector<Vec2>& probes() const { return probes_; }
  Certificate certify(double cost) const;
  // Sup over the probes of |p - P| (cloak) or |p| (shield) from the full
  // coupled solution at zeta0.
  double sampled_error(double zeta0) const;

 private:
  void build_probes();

  CloakConfig geometry_;
  BackgroundField bg_;
  DesignMode mode_;
  std::shared_ptr<const ElectrostaticSolution> electro_;
  std::vector<ControlProfile> profiles_;
  std::vector<Vec2> probes_;
  std::vector<std::string> warnings_;
};

}  // namespace helecloak
