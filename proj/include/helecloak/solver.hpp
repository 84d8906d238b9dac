#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "helecloak/background.hpp"
#include "helecloak/linalg.hpp"

namespace helecloak {

// Objects D_k and control curves. Each object lies inside exactly one
// control; the region between a control and its objects is a shell carrying
// the zeta potential zeta0.
struct CloakConfig {
  std::vector<MeshPtr> objects;
  std::vector<MeshPtr> controls;
  double zeta0 = 0.0;

  // Checks nesting and disjointness; throws InvalidArgumentError.
  void validate() const;
  // Index of the control enclosing each object.
  std::vector<int> cell_of_object() const;
  bool inside_object(Vec2 x) const;
  bool inside_control(Vec2 x) const;
  // zeta0 in the shells, 0 elsewhere.
  double zeta_mean(Vec2 x) const;
  // True when x is within the near-field band of any curve.
  bool near_any_curve(Vec2 x) const;
};

struct Layer {
  MeshPtr mesh;
  Vector density;
};

enum class BackgroundPart { None, H, P };

// Background plus a sum of single layers plus a constant.
class LayerField {
 public:
  LayerField() = default;
  LayerField(BackgroundField bg, BackgroundPart part, std::vector<Layer> layers, double constant = 0.0);

  double value(Vec2 x) const;
  Vec2 gradient(Vec2 x) const;
  const std::vector<Layer>& layers() const { return layers_; }
  double constant() const { return constant_; }
  const BackgroundField& background() const { return bg_; }
  BackgroundPart part() const { return part_; }

 private:
  BackgroundField bg_;
  BackgroundPart part_ = BackgroundPart::None;
  std::vector<Layer> layers_;
  // Layer densities on the refined nodes.
  std::vector<Vector> fine_;
  double constant_ = 0.0;
};

// Block Nystrom system for the exterior Neumann problem on a set of disjoint
// objects, (1/2 I + K*) on each diagonal block and cross normal derivatives
// off the diagonal, with one mean-zero row and multiplier per object. The
// factorization is shared by the electrostatic and pressure solves.
class ObjectSystem {
 public:
  explicit ObjectSystem(std::vector<MeshPtr> objects);

  const std::vector<MeshPtr>& objects() const { return objects_; }
  // rhs[k] holds the prescribed exterior normal derivative on object k.
  std::vector<Vector> solve(const std::vector<Vector>& rhs) const;
  double condition() const { return lu_->condition(); }
  // Continuous on-curve value of sum_j S_j[density_j] at the nodes of object k.
  Vector trace(int k, const std::vector<Vector>& densities) const;
  // Exterior normal derivative of sum_j S_j[density_j] on object k.
  Vector normal_derivative(int k, const std::vector<Vector>& densities) const;

 private:
  std::vector<MeshPtr> objects_;
  std::vector<Eigen::Index> offsets_;
  std::vector<Matrix> self_single_;
  std::vector<Matrix> np_star_;
  // Indexed [target][source]; diagonal entries are empty.
  std::vector<std::vector<Matrix>> cross_single_;
  std::vector<std::vector<Matrix>> cross_normal_;
  std::unique_ptr<DenseLU> lu_;
};

class ElectrostaticSolution {
 public:
  ElectrostaticSolution(std::shared_ptr<const ObjectSystem> system, const BackgroundField& bg);

  const std::vector<Vector>& densities() const { return densities_; }
  const LayerField& field() const { return field_; }
  const std::shared_ptr<const ObjectSystem>& system() const { return system_; }
  double phi(Vec2 x) const { return field_.value(x); }
  Vec2 grad_phi(Vec2 x) const { return field_.gradient(x); }
  // d(phi)/d(nu) at the nodes of a curve disjoint from the objects.
  Vector normal_derivative(const QuadratureMesh& curve) const;
  // Exterior normal derivative on object k (zero up to discretization error).
  Vector object_normal_derivative(int k) const;

 private:
  std::shared_ptr<const ObjectSystem> system_;
  std::vector<Vector> densities_;
  LayerField field_;
};

// phi = H + sum S_i[phi_i] with (1/2 I + K*) phi_i = -dH/dnu, block-coupled.
ElectrostaticSolution solve_electrostatic(const std::vector<MeshPtr>& objects, const BackgroundField& bg);

class PressureSolution {
 public:
  PressureSolution(const CloakConfig& config, const BackgroundField& bg, const ElectrostaticSolution& electro);

  const std::vector<Vector>& object_densities() const { return psi_i_; }
  const std::vector<Vector>& control_densities() const { return psi_e_; }
  const LayerField& field() const { return field_; }
  double p(Vec2 x) const { return field_.value(x); }
  Vec2 grad_p(Vec2 x) const { return field_.gradient(x); }
  // On-curve pressure at the nodes of object k.
  Vector object_trace(int k) const;
  Vector object_normal_derivative(int k) const;

 private:
  std::shared_ptr<const ObjectSystem> system_;
  std::vector<MeshPtr> controls_;
  BackgroundField bg_;
  std::vector<Vector> psi_i_;
  std::vector<Vector> psi_e_;
  LayerField field_;
};

// p = P + sum S_i[psi_i] + sum S_e[psi_e], psi_e = 12 zeta0 dphi/dnu on each
// control (weighted mean removed), psi_i from the Neumann condition on the
// objects.
PressureSolution solve_pressure(const CloakConfig& config, const BackgroundField& bg,
                                const ElectrostaticSolution& electro);

// Harmonic p between a control curve and its objects with dp/dnu = 0 on the
// objects and p = P on the control.
struct MixedSolution {
  LayerField field;
  MeshPtr control;
  // Interior-side normal derivative of p on the control nodes.
  Vector control_normal_derivative;
  double condition = 0.0;
};

MixedSolution solve_interior_mixed(const std::vector<MeshPtr>& objects, const MeshPtr& control,
                                   const BackgroundField& bg);

// Harmonic p outside all controls with p = 0 on every control and p - P
// bounded at infinity. p - P tends to the constant `at_infinity`, which
// vanishes whenever the geometry is symmetric with respect to the background.
struct ExteriorSolution {
  LayerField field;
  std::vector<MeshPtr> controls;
  // Exterior-side normal derivative of p on each control.
  std::vector<Vector> control_normal_derivatives;
  double at_infinity = 0.0;
  double condition = 0.0;
};

ExteriorSolution solve_exterior_dirichlet(const std::vector<MeshPtr>& controls, const BackgroundField& bg);

struct CoupledSolution {
  CloakConfig config;
  BackgroundField background;
  std::shared_ptr<const ElectrostaticSolution> electro;
  std::shared_ptr<const PressureSolution> pressure;

  // u = -grad p / 12 - zeta_mean grad phi.
  Vec2 velocity(Vec2 x) const;
};

CoupledSolution solve_coupled(const CloakConfig& config, const BackgroundField& bg);
// Reuses an electrostatic solution computed on the same objects.
CoupledSolution solve_coupled(const CloakConfig& config, const BackgroundField& bg,
                              std::shared_ptr<const ElectrostaticSolution> electro);

struct Window {
  double x1_min = -1.0, x1_max = 1.0, x2_min = -1.0, x2_max = 1.0;
};

struct FieldRow {
  double x1, x2, phi, p, u1, u2;
  bool masked;
};

// Row-major samples over the window (x1 fastest). Samples inside an object or
// inside any near-field band are masked with NaN values.
std::vector<FieldRow> field_grid(const CoupledSolution& solution, const Window& window, int nx, int ny);

// F = -sum w p nu over object k with on-curve pressure.
Vec2 object_force(const CoupledSolution& solution, int object_index);

}  // namespace helecloak
