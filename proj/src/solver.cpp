#include "helecloak/solver.hpp"

#include <limits>
#include <sstream>

#include "helecloak/parallel.hpp"

namespace helecloak {

namespace {

bool all_nodes_inside(const QuadratureMesh& inner, const QuadratureMesh& outer) {
  for (Vec2 p : inner.nodes())
    if (!outer.contains(p)) return false;
  return true;
}

bool any_node_inside(const QuadratureMesh& a, const QuadratureMesh& b) {
  for (Vec2 p : a.nodes())
    if (b.contains(p)) return true;
  return false;
}

bool too_close(const QuadratureMesh& a, const QuadratureMesh& b) {
  for (Vec2 p : a.nodes())
    if (b.in_near_field(p)) return true;
  for (Vec2 p : b.nodes())
    if (a.in_near_field(p)) return true;
  return false;
}

std::string name_of(const QuadratureMesh& m, const char* role, std::size_t k) {
  std::ostringstream os;
  os << role << ' ' << k << " ('" << m.label() << "')";
  return os.str();
}

double weighted_mean(const QuadratureMesh& mesh, const Vector& v) {
  const auto w = mesh.weights();
  double s = 0.0;
  for (int j = 0; j < mesh.size(); ++j) s += w[j] * v[j];
  return s / mesh.perimeter();
}

Vector node_values(const QuadratureMesh& mesh, const BackgroundField& bg, double amplitude) {
  return amplitude * bg.mode_values(mesh);
}

Vector node_normal_derivative(const QuadratureMesh& mesh, const BackgroundField& bg, double amplitude) {
  return amplitude * bg.mode_normal_derivative(mesh);
}

void require_meshes(const std::vector<MeshPtr>& meshes, const char* role) {
  if (meshes.empty()) {
    std::ostringstream os;
    os << "at least one " << role << " curve is required";
    throw InvalidArgumentError(os.str());
  }
  for (const auto& m : meshes)
    if (!m) throw InvalidArgumentError(std::string("null ") + role + " mesh");
}

void check_disjoint(const std::vector<MeshPtr>& meshes, const char* role) {
  for (std::size_t a = 0; a < meshes.size(); ++a)
    for (std::size_t b = a + 1; b < meshes.size(); ++b) {
      if (any_node_inside(*meshes[a], *meshes[b]) || any_node_inside(*meshes[b], *meshes[a]))
        throw InvalidArgumentError(name_of(*meshes[a], role, a) + " and " + name_of(*meshes[b], role, b) +
                                   " overlap or are nested");
      if (too_close(*meshes[a], *meshes[b]))
        throw InvalidArgumentError(name_of(*meshes[a], role, a) + " and " + name_of(*meshes[b], role, b) +
                                   " are closer than the near-field threshold");
    }
}

}  // namespace

void CloakConfig::validate() const {
  require_meshes(objects, "object");
  require_meshes(controls, "control");
  if (!std::isfinite(zeta0)) throw InvalidArgumentError("zeta0 must be finite");
  check_disjoint(objects, "object");
  check_disjoint(controls, "control");
  (void)cell_of_object();
}

std::vector<int> CloakConfig::cell_of_object() const {
  std::vector<int> cell(objects.size(), -1);
  for (std::size_t k = 0; k < objects.size(); ++k) {
    for (std::size_t c = 0; c < controls.size(); ++c) {
      if (all_nodes_inside(*objects[k], *controls[c])) {
        cell[k] = static_cast<int>(c);
        break;
      }
    }
    if (cell[k] < 0)
      throw InvalidArgumentError(name_of(*objects[k], "object", k) + " is not strictly inside any control curve");
    if (too_close(*objects[k], *controls[cell[k]]))
      throw InvalidArgumentError(name_of(*objects[k], "object", k) +
                                 " is closer to its control curve than the near-field threshold");
  }
  return cell;
}

bool CloakConfig::inside_object(Vec2 x) const {
  for (const auto& m : objects)
    if (m->contains(x)) return true;
  return false;
}

bool CloakConfig::inside_control(Vec2 x) const {
  for (const auto& m : controls)
    if (m->contains(x)) return true;
  return false;
}

double CloakConfig::zeta_mean(Vec2 x) const { return inside_control(x) && !inside_object(x) ? zeta0 : 0.0; }

bool CloakConfig::near_any_curve(Vec2 x) const {
  for (const auto& m : objects)
    if (m->in_near_field(x)) return true;
  for (const auto& m : controls)
    if (m->in_near_field(x)) return true;
  return false;
}

LayerField::LayerField(BackgroundField bg, BackgroundPart part, std::vector<Layer> layers, double constant)
    : bg_(bg), part_(part), layers_(std::move(layers)), constant_(constant) {
  for (const Layer& l : layers_) fine_.push_back(refine_density(*l.mesh, l.density));
}

double LayerField::value(Vec2 x) const {
  double v = constant_;
  if (part_ == BackgroundPart::H) v += bg_.H(x);
  if (part_ == BackgroundPart::P) v += bg_.P(x);
  for (std::size_t k = 0; k < layers_.size(); ++k) v += refined_single_layer_value(*layers_[k].mesh, fine_[k], x);
  return v;
}

Vec2 LayerField::gradient(Vec2 x) const {
  Vec2 g{};
  if (part_ == BackgroundPart::H) g += bg_.grad_H(x);
  if (part_ == BackgroundPart::P) g += bg_.grad_P(x);
  for (std::size_t k = 0; k < layers_.size(); ++k) g += refined_single_layer_gradient(*layers_[k].mesh, fine_[k], x);
  return g;
}

ObjectSystem::ObjectSystem(std::vector<MeshPtr> objects) : objects_(std::move(objects)) {
  require_meshes(objects_, "object");
  check_disjoint(objects_, "object");
  const std::size_t m = objects_.size();
  Eigen::Index total = 0;
  for (const auto& o : objects_) {
    offsets_.push_back(total);
    total += o->size() + 1;
  }
  self_single_.resize(m);
  np_star_.resize(m);
  cross_single_.assign(m, std::vector<Matrix>(m));
  cross_normal_.assign(m, std::vector<Matrix>(m));
  for (std::size_t k = 0; k < m; ++k) {
    self_single_[k] = assemble_single_layer(*objects_[k]);
    np_star_[k] = assemble_np_star(*objects_[k]);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k) continue;
      cross_single_[k][j] = assemble_single_layer(*objects_[j], *objects_[k]);
      cross_normal_[k][j] = assemble_single_layer_normal_derivative(*objects_[j], *objects_[k]);
    }
  }

  Matrix a = Matrix::Zero(total, total);
  for (std::size_t k = 0; k < m; ++k) {
    const Eigen::Index ok = offsets_[k], nk = objects_[k]->size();
    a.block(ok, ok, nk, nk) = np_star_[k];
    a.block(ok, ok, nk, nk).diagonal().array() += 0.5;
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) a.block(ok, offsets_[j], nk, objects_[j]->size()) = cross_normal_[k][j];
    a.block(ok, ok + nk, nk, 1).setOnes();
    const auto w = objects_[k]->weights();
    for (Eigen::Index i = 0; i < nk; ++i) a(ok + nk, ok + i) = w[i];
  }
  lu_ = std::make_unique<DenseLU>(a, "object Neumann system");
}

std::vector<Vector> ObjectSystem::solve(const std::vector<Vector>& rhs) const {
  if (rhs.size() != objects_.size()) throw InvalidArgumentError("one right-hand side per object is required");
  Vector b = Vector::Zero(lu_->size());
  for (std::size_t k = 0; k < objects_.size(); ++k) {
    if (rhs[k].size() != objects_[k]->size()) throw InvalidArgumentError("right-hand side length mismatch");
    b.segment(offsets_[k], rhs[k].size()) = rhs[k];
  }
  const Vector x = lu_->solve(b);
  std::vector<Vector> out(objects_.size());
  for (std::size_t k = 0; k < objects_.size(); ++k) out[k] = x.segment(offsets_[k], objects_[k]->size());
  return out;
}

Vector ObjectSystem::trace(int k, const std::vector<Vector>& densities) const {
  if (k < 0 || k >= static_cast<int>(objects_.size())) throw InvalidArgumentError("object index out of range");
  Vector v = self_single_[k] * densities[k];
  for (std::size_t j = 0; j < objects_.size(); ++j)
    if (static_cast<int>(j) != k) v += cross_single_[k][j] * densities[j];
  return v;
}

Vector ObjectSystem::normal_derivative(int k, const std::vector<Vector>& densities) const {
  if (k < 0 || k >= static_cast<int>(objects_.size())) throw InvalidArgumentError("object index out of range");
  Vector v = jump_normal_derivative(np_star_[k], densities[k], Side::Exterior);
  for (std::size_t j = 0; j < objects_.size(); ++j)
    if (static_cast<int>(j) != k) v += cross_normal_[k][j] * densities[j];
  return v;
}

ElectrostaticSolution::ElectrostaticSolution(std::shared_ptr<const ObjectSystem> system, const BackgroundField& bg)
    : system_(std::move(system)) {
  bg.validate();
  const auto& objects = system_->objects();
  std::vector<Vector> rhs;
  for (const auto& o : objects) rhs.push_back(-node_normal_derivative(*o, bg, bg.amplitude_h));
  densities_ = system_->solve(rhs);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < objects.size(); ++k) layers.push_back({objects[k], densities_[k]});
  field_ = LayerField(bg, BackgroundPart::H, std::move(layers));
}

Vector ElectrostaticSolution::normal_derivative(const QuadratureMesh& curve) const {
  const BackgroundField& bg = field_.background();
  Vector v = node_normal_derivative(curve, bg, bg.amplitude_h);
  const auto& objects = system_->objects();
  for (std::size_t k = 0; k < objects.size(); ++k)
    v += assemble_single_layer_normal_derivative(*objects[k], curve) * densities_[k];
  return v;
}

Vector ElectrostaticSolution::object_normal_derivative(int k) const {
  const BackgroundField& bg = field_.background();
  return node_normal_derivative(*system_->objects().at(k), bg, bg.amplitude_h) +
         system_->normal_derivative(k, densities_);
}

ElectrostaticSolution solve_electrostatic(const std::vector<MeshPtr>& objects, const BackgroundField& bg) {
  bg.validate();
  return ElectrostaticSolution(std::make_shared<const ObjectSystem>(objects), bg);
}

PressureSolution::PressureSolution(const CloakConfig& config, const BackgroundField& bg,
                                   const ElectrostaticSolution& electro)
    : system_(electro.system()), controls_(config.controls), bg_(bg) {
  config.validate();
  bg.validate();
  if (system_->objects() != config.objects)
    throw InvalidArgumentError("electrostatic solution was computed on different objects");
  const auto& objects = config.objects;

  for (const auto& c : controls_) {
    const Vector s = electro.normal_derivative(*c);
    psi_e_.push_back(12.0 * config.zeta0 * (s.array() - weighted_mean(*c, s)).matrix());
  }
  std::vector<Vector> rhs;
  for (const auto& o : objects) {
    Vector r = -node_normal_derivative(*o, bg, bg.amplitude_p);
    for (std::size_t c = 0; c < controls_.size(); ++c)
      r -= assemble_single_layer_normal_derivative(*controls_[c], *o) * psi_e_[c];
    rhs.push_back(std::move(r));
  }
  psi_i_ = system_->solve(rhs);

  std::vector<Layer> layers;
  for (std::size_t k = 0; k < objects.size(); ++k) layers.push_back({objects[k], psi_i_[k]});
  for (std::size_t c = 0; c < controls_.size(); ++c) layers.push_back({controls_[c], psi_e_[c]});
  field_ = LayerField(bg, BackgroundPart::P, std::move(layers));
}

Vector PressureSolution::object_trace(int k) const {
  const auto& o = *system_->objects().at(k);
  Vector v = node_values(o, bg_, bg_.amplitude_p) + system_->trace(k, psi_i_);
  for (std::size_t c = 0; c < controls_.size(); ++c) v += assemble_single_layer(*controls_[c], o) * psi_e_[c];
  return v;
}

Vector PressureSolution::object_normal_derivative(int k) const {
  const auto& o = *system_->objects().at(k);
  Vector v = node_normal_derivative(o, bg_, bg_.amplitude_p) + system_->normal_derivative(k, psi_i_);
  for (std::size_t c = 0; c < controls_.size(); ++c)
    v += assemble_single_layer_normal_derivative(*controls_[c], o) * psi_e_[c];
  return v;
}

PressureSolution solve_pressure(const CloakConfig& config, const BackgroundField& bg,
                                const ElectrostaticSolution& electro) {
  return PressureSolution(config, bg, electro);
}

MixedSolution solve_interior_mixed(const std::vector<MeshPtr>& objects, const MeshPtr& control,
                                   const BackgroundField& bg) {
  bg.validate();
  require_meshes(objects, "object");
  require_meshes({control}, "control");
  CloakConfig geometry{objects, {control}, 0.0};
  geometry.validate();

  // Unknowns: [mu_1, lambda_1, ..., mu_m, lambda_m, mu_e, c].
  const std::size_t m = objects.size();
  std::vector<Eigen::Index> off;
  Eigen::Index total = 0;
  for (const auto& o : objects) {
    off.push_back(total);
    total += o->size() + 1;
  }
  const Eigen::Index oe = total, ne = control->size();
  total += ne + 1;

  Matrix a = Matrix::Zero(total, total);
  Vector b = Vector::Zero(total);
  std::vector<Matrix> obj_to_control_normal(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& ok = *objects[k];
    const Eigen::Index o = off[k], n = ok.size();
    a.block(o, o, n, n) = assemble_np_star(ok);
    a.block(o, o, n, n).diagonal().array() += 0.5;
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) a.block(o, off[j], n, objects[j]->size()) = assemble_single_layer_normal_derivative(*objects[j], ok);
    a.block(o, oe, n, ne) = assemble_single_layer_normal_derivative(*control, ok);
    a.block(o, o + n, n, 1).setOnes();
    const auto w = ok.weights();
    for (Eigen::Index i = 0; i < n; ++i) a(o + n, o + i) = w[i];
    b.segment(o, n) = -node_normal_derivative(ok, bg, bg.amplitude_p);

    a.block(oe, o, ne, n) = assemble_single_layer(ok, *control);
    obj_to_control_normal[k] = assemble_single_layer_normal_derivative(ok, *control);
  }
  a.block(oe, oe, ne, ne) = assemble_single_layer(*control);
  a.block(oe, oe + ne, ne, 1).setOnes();
  const auto we = control->weights();
  for (Eigen::Index i = 0; i < ne; ++i) a(oe + ne, oe + i) = we[i];

  const DenseLU lu(a, "interior mixed system");
  const Vector x = lu.solve(b);

  MixedSolution out;
  out.control = control;
  out.condition = lu.condition();
  std::vector<Layer> layers;
  const Vector mu_e = x.segment(oe, ne);
  out.control_normal_derivative =
      node_normal_derivative(*control, bg, bg.amplitude_p) +
      jump_normal_derivative(assemble_np_star(*control), mu_e, Side::Interior);
  for (std::size_t k = 0; k < m; ++k) {
    const Vector mu = x.segment(off[k], objects[k]->size());
    out.control_normal_derivative += obj_to_control_normal[k] * mu;
    layers.push_back({objects[k], mu});
  }
  layers.push_back({control, mu_e});
  out.field = LayerField(bg, BackgroundPart::P, std::move(layers), x[oe + ne]);
  return out;
}

ExteriorSolution solve_exterior_dirichlet(const std::vector<MeshPtr>& controls, const BackgroundField& bg) {
  bg.validate();
  require_meshes(controls, "control");
  check_disjoint(controls, "control");
  const std::size_t m = controls.size();
  std::vector<Eigen::Index> off;
  Eigen::Index total = 0;
  for (const auto& c : controls) {
    off.push_back(total);
    total += c->size();
  }
  const Eigen::Index lambda = total++;

  Matrix a = Matrix::Zero(total, total);
  Vector b = Vector::Zero(total);
  std::vector<std::vector<Matrix>> cross_normal(m, std::vector<Matrix>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const auto& ck = *controls[k];
    const Eigen::Index o = off[k], n = ck.size();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == k) {
        a.block(o, o, n, n) = assemble_single_layer(ck);
      } else {
        a.block(o, off[j], n, controls[j]->size()) = assemble_single_layer(*controls[j], ck);
        cross_normal[k][j] = assemble_single_layer_normal_derivative(*controls[j], ck);
      }
    }
    a.block(o, lambda, n, 1).setOnes();
    const auto w = ck.weights();
    for (Eigen::Index i = 0; i < n; ++i) a(lambda, o + i) = w[i];
    b.segment(o, n) = -node_values(ck, bg, bg.amplitude_p);
  }

  const DenseLU lu(a, "exterior Dirichlet system");
  const Vector x = lu.solve(b);

  ExteriorSolution out;
  out.controls = controls;
  out.condition = lu.condition();
  out.at_infinity = x[lambda];
  std::vector<Vector> mu(m);
  for (std::size_t k = 0; k < m; ++k) mu[k] = x.segment(off[k], controls[k]->size());
  std::vector<Layer> layers;
  for (std::size_t k = 0; k < m; ++k) {
    Vector d = node_normal_derivative(*controls[k], bg, bg.amplitude_p) +
               jump_normal_derivative(assemble_np_star(*controls[k]), mu[k], Side::Exterior);
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) d += cross_normal[k][j] * mu[j];
    out.control_normal_derivatives.push_back(std::move(d));
    layers.push_back({controls[k], mu[k]});
  }
  out.field = LayerField(bg, BackgroundPart::P, std::move(layers), x[lambda]);
  return out;
}

Vec2 CoupledSolution::velocity(Vec2 x) const {
  return pressure->grad_p(x) * (-1.0 / 12.0) - electro->grad_phi(x) * config.zeta_mean(x);
}

CoupledSolution solve_coupled(const CloakConfig& config, const BackgroundField& bg,
                              std::shared_ptr<const ElectrostaticSolution> electro) {
  if (!electro) throw InvalidArgumentError("missing electrostatic solution");
  CoupledSolution s;
  s.config = config;
  s.background = bg;
  s.electro = std::move(electro);
  s.pressure = std::make_shared<const PressureSolution>(config, bg, *s.electro);
  return s;
}

CoupledSolution solve_coupled(const CloakConfig& config, const BackgroundField& bg) {
  config.validate();
  return solve_coupled(config, bg, std::make_shared<const ElectrostaticSolution>(solve_electrostatic(config.objects, bg)));
}

std::vector<FieldRow> field_grid(const CoupledSolution& solution, const Window& window, int nx, int ny) {
  if (!(window.x1_max > window.x1_min) || !(window.x2_max > window.x2_min) || !std::isfinite(window.x1_min) ||
      !std::isfinite(window.x1_max) || !std::isfinite(window.x2_min) || !std::isfinite(window.x2_max))
    throw InvalidArgumentError("field window is empty");
  if (nx < 1 || ny < 1) throw InvalidArgumentError("grid resolution must be at least 1x1");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<FieldRow> rows(static_cast<std::size_t>(nx) * ny);
  auto coord = [](double lo, double hi, int i, int n) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
  parallel_for(rows.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx % nx), j = static_cast<int>(idx / nx);
    const Vec2 x{coord(window.x1_min, window.x1_max, i, nx), coord(window.x2_min, window.x2_max, j, ny)};
    FieldRow& r = rows[idx];
    r.x1 = x.x;
    r.x2 = x.y;
    if (solution.config.inside_object(x) || solution.config.near_any_curve(x)) {
      r.phi = r.p = r.u1 = r.u2 = nan;
      r.masked = true;
      return;
    }
    r.phi = solution.electro->phi(x);
    r.p = solution.pressure->p(x);
    const Vec2 u = solution.velocity(x);
    r.u1 = u.x;
    r.u2 = u.y;
    r.masked = false;
  });
  return rows;
}

Vec2 object_force(const CoupledSolution& solution, int object_index) {
  const auto& objects = solution.config.objects;
  if (object_index < 0 || object_index >= static_cast<int>(objects.size()))
    throw InvalidArgumentError("object index out of range");
  const auto& o = *objects[object_index];
  const Vector p = solution.pressure->object_trace(object_index);
  const auto w = o.weights();
  const auto nu = o.normals();
  Vec2 f{};
  for (int j = 0; j < o.size(); ++j) f -= nu[j] * (w[j] * p[j]);
  return f;
}

}  // namespace helecloak
