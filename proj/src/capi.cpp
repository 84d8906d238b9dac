#include "helecloak/helecloak.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "helecloak/analytic.hpp"
#include "helecloak/design.hpp"
#include "helecloak/parallel.hpp"

namespace hc = helecloak;

struct hc_mesh {
  hc::MeshPtr mesh;
};

struct hc_config {
  hc::CloakConfig config;
};

struct hc_solution {
  hc::CoupledSolution solution;
};

struct hc_design {
  std::unique_ptr<hc::DesignProblem> problem;
};

namespace {

thread_local std::string g_last_error;

hc_status fail(hc_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
hc_status guard(F&& body) {
  try {
    body();
    return HC_OK;
  } catch (const hc::NearFieldError& e) {
    return fail(HC_ERR_NEAR_FIELD, e.what());
  } catch (const hc::DegenerateDesignError& e) {
    return fail(HC_ERR_DEGENERATE, e.what());
  } catch (const hc::NumericalError& e) {
    return fail(HC_ERR_NUMERICAL, e.what());
  } catch (const hc::InvalidArgumentError& e) {
    return fail(HC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HC_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw hc::InvalidArgumentError(std::string(what) + " must not be NULL");
}

hc::Placement to_placement(const hc_placement* p) {
  if (!p) return {};
  return hc::Placement{{p->center_x1, p->center_x2}, p->rotation, p->scale};
}

hc::BackgroundField to_background(const hc_background* b) {
  require(b, "background");
  hc::BackgroundField bg;
  if (b->frame != HC_FRAME_POLAR && b->frame != HC_FRAME_ELLIPTIC) throw hc::InvalidArgumentError("unknown frame");
  if (b->parity != HC_PARITY_COS && b->parity != HC_PARITY_SIN) throw hc::InvalidArgumentError("unknown parity");
  bg.frame = b->frame == HC_FRAME_POLAR ? hc::Frame::Polar : hc::Frame::Elliptic;
  bg.focal = b->focal;
  bg.n = b->n;
  bg.parity = b->parity == HC_PARITY_COS ? hc::Parity::Cos : hc::Parity::Sin;
  bg.amplitude_h = b->amplitude_h;
  bg.amplitude_p = b->amplitude_p;
  bg.validate();
  return bg;
}

hc::PhysicalParams to_physical(const hc_physical* p) {
  require(p, "physical parameters");
  hc::PhysicalParams q;
  q.gap = p->gap;
  q.length = p->length;
  q.width = p->width;
  q.density = p->density;
  q.viscosity = p->viscosity;
  q.permittivity = p->permittivity;
  q.field = p->field;
  q.velocity = p->velocity;
  q.validate();
  return q;
}

hc::DesignMode to_mode(hc_mode m) {
  if (m == HC_MODE_CLOAK) return hc::DesignMode::Cloak;
  if (m == HC_MODE_SHIELD) return hc::DesignMode::Shield;
  throw hc::InvalidArgumentError("unknown design mode");
}

hc::Parity to_parity(hc_parity p) {
  if (p == HC_PARITY_COS) return hc::Parity::Cos;
  if (p == HC_PARITY_SIN) return hc::Parity::Sin;
  throw hc::InvalidArgumentError("unknown parity");
}

hc::Window to_window(const hc_window* w) {
  require(w, "window");
  return hc::Window{w->x1_min, w->x1_max, w->x2_min, w->x2_max};
}

template <class Build>
hc_status make_mesh(hc_mesh** out, Build&& build) {
  return guard([&] {
    require(out, "output handle");
    *out = nullptr;
    *out = new hc_mesh{build()};
  });
}

std::vector<hc::Vec2> to_points(const hc_point* p, size_t count) {
  if (count > 0) require(p, "point array");
  std::vector<hc::Vec2> v(count);
  for (size_t k = 0; k < count; ++k) v[k] = {p[k].x1, p[k].x2};
  return v;
}

double resolve_rounding(double r, const std::vector<hc::Vec2>& vertices) {
  return r < 0.0 ? hc::default_rounding_radius(vertices) : r;
}

void fill_row(const hc::FieldRow& r, hc_field_row* out) {
  *out = hc_field_row{r.x1, r.x2, r.phi, r.p, r.u1, r.u2, r.masked ? 1 : 0};
}

}  // namespace

extern "C" {

const char* hc_version(void) { return "0.1.0"; }
const char* hc_last_error(void) { return g_last_error.c_str(); }

const char* hc_status_string(hc_status status) {
  switch (status) {
    case HC_OK: return "ok";
    case HC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HC_ERR_NUMERICAL: return "numerical failure";
    case HC_ERR_DEGENERATE: return "degenerate design";
    case HC_ERR_NEAR_FIELD: return "near-field evaluation";
    case HC_ERR_IO: return "i/o error";
    case HC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int hc_worker_count(void) { return hc::worker_count(); }

void hc_placement_default(hc_placement* out) {
  if (out) *out = hc_placement{0.0, 0.0, 0.0, 1.0};
}

void hc_background_default(hc_background* out) {
  if (out) *out = hc_background{HC_FRAME_POLAR, 1.0, 1, HC_PARITY_COS, 1.0, 12.0};
}

void hc_physical_defaults(hc_physical* out) {
  if (!out) return;
  const hc::PhysicalParams p;
  *out = hc_physical{p.gap, p.length, p.width, p.density, p.viscosity, p.permittivity, p.field, p.velocity};
}

hc_status hc_mesh_circle(double radius, double center_x1, double center_x2, int nodes, hc_mesh** out) {
  return make_mesh(out, [&] { return hc::build_circle(radius, {center_x1, center_x2}, nodes); });
}

hc_status hc_mesh_confocal_ellipse(double focal, double xi, int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] {
    return hc::build_mesh(*hc::make_ellipse_curve(hc::EllipticFrame{focal}, xi), nodes, to_placement(placement));
  });
}

hc_status hc_mesh_ellipse(double semi_x1, double semi_x2, int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] {
    return hc::build_mesh(*hc::make_ellipse_axes_curve(semi_x1, semi_x2), nodes, to_placement(placement));
  });
}

hc_status hc_mesh_polar(const double* cos_coeffs, size_t n_cos, const double* sin_coeffs, size_t n_sin, int nodes,
                        const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] {
    if (n_cos > 0) require(cos_coeffs, "cosine coefficients");
    if (n_sin > 0) require(sin_coeffs, "sine coefficients");
    std::vector<double> a(cos_coeffs, cos_coeffs + n_cos), b(sin_coeffs, sin_coeffs + n_sin);
    return hc::build_polar_shape(hc::fourier_radius(std::move(a), std::move(b)), nodes, to_placement(placement));
  });
}

hc_status hc_mesh_flower(int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] { return hc::build_polar_shape(hc::flower_radius(), nodes, to_placement(placement)); });
}

hc_status hc_mesh_peanut(int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] { return hc::build_polar_shape(hc::peanut_radius(), nodes, to_placement(placement)); });
}

hc_status hc_mesh_kite(int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] { return hc::build_kite(nodes, to_placement(placement)); });
}

hc_status hc_mesh_rounded_polygon(const hc_point* vertices, size_t count, double rounding_radius, int nodes,
                                  const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] {
    const auto v = to_points(vertices, count);
    if (v.size() < 3) throw hc::InvalidArgumentError("rounded polygon needs at least 3 vertices");
    return hc::build_rounded_polygon(v, resolve_rounding(rounding_radius, v), nodes, to_placement(placement));
  });
}

hc_status hc_mesh_regular_polygon(int sides, double circumradius, double vertex_angle, double rounding_radius,
                                  int nodes, const hc_placement* placement, hc_mesh** out) {
  return make_mesh(out, [&] {
    const auto v = hc::regular_polygon_vertices(sides, circumradius, vertex_angle);
    return hc::build_rounded_polygon(v, resolve_rounding(rounding_radius, v), nodes, to_placement(placement));
  });
}

hc_status hc_mesh_points(const hc_point* points, size_t count, int nodes, const hc_placement* placement,
                         hc_mesh** out) {
  return make_mesh(out, [&] { return hc::build_point_list(to_points(points, count), nodes, to_placement(placement)); });
}

void hc_mesh_free(hc_mesh* mesh) { delete mesh; }

int hc_mesh_size(const hc_mesh* mesh) { return mesh ? mesh->mesh->size() : 0; }
const char* hc_mesh_label(const hc_mesh* mesh) { return mesh ? mesh->mesh->label().c_str() : ""; }

hc_status hc_mesh_nodes(const hc_mesh* mesh, hc_point* out) {
  return guard([&] {
    require(mesh, "mesh");
    require(out, "output buffer");
    const auto x = mesh->mesh->nodes();
    for (size_t k = 0; k < x.size(); ++k) out[k] = {x[k].x, x[k].y};
  });
}

hc_status hc_mesh_normals(const hc_mesh* mesh, hc_point* out) {
  return guard([&] {
    require(mesh, "mesh");
    require(out, "output buffer");
    const auto x = mesh->mesh->normals();
    for (size_t k = 0; k < x.size(); ++k) out[k] = {x[k].x, x[k].y};
  });
}

#define HC_COPY_SCALARS(name, accessor)                      \
  hc_status name(const hc_mesh* mesh, double* out) {         \
    return guard([&] {                                       \
      require(mesh, "mesh");                                 \
      require(out, "output buffer");                         \
      const auto v = mesh->mesh->accessor();                 \
      for (size_t k = 0; k < v.size(); ++k) out[k] = v[k];   \
    });                                                      \
  }

HC_COPY_SCALARS(hc_mesh_weights, weights)
HC_COPY_SCALARS(hc_mesh_curvatures, curvatures)
HC_COPY_SCALARS(hc_mesh_jacobians, jacobians)
#undef HC_COPY_SCALARS

hc_status hc_mesh_perimeter(const hc_mesh* mesh, double* out) {
  return guard([&] {
    require(mesh, "mesh");
    require(out, "output");
    *out = mesh->mesh->perimeter();
  });
}

hc_status hc_config_create(hc_config** out) {
  return guard([&] {
    require(out, "output handle");
    *out = new hc_config{};
  });
}

void hc_config_free(hc_config* config) { delete config; }

hc_status hc_config_add_object(hc_config* config, const hc_mesh* mesh) {
  return guard([&] {
    require(config, "config");
    require(mesh, "mesh");
    config->config.objects.push_back(mesh->mesh);
  });
}

hc_status hc_config_add_control(hc_config* config, const hc_mesh* mesh) {
  return guard([&] {
    require(config, "config");
    require(mesh, "mesh");
    config->config.controls.push_back(mesh->mesh);
  });
}

hc_status hc_config_validate(const hc_config* config) {
  return guard([&] {
    require(config, "config");
    config->config.validate();
  });
}

int hc_config_object_count(const hc_config* config) {
  return config ? static_cast<int>(config->config.objects.size()) : 0;
}

hc_status hc_solve(const hc_config* config, const hc_background* background, double zeta0, hc_solution** out) {
  return guard([&] {
    require(config, "config");
    require(out, "output handle");
    *out = nullptr;
    hc::CloakConfig cfg = config->config;
    cfg.zeta0 = zeta0;
    *out = new hc_solution{hc::solve_coupled(cfg, to_background(background))};
  });
}

void hc_solution_free(hc_solution* solution) { delete solution; }

hc_status hc_solution_eval(const hc_solution* solution, double x1, double x2, hc_field_row* out) {
  return guard([&] {
    require(solution, "solution");
    require(out, "output");
    // A degenerate 1x1 grid reuses the masking logic.
    const auto rows = hc::field_grid(solution->solution, hc::Window{x1, x1 + 1.0, x2, x2 + 1.0}, 1, 1);
    fill_row(rows[0], out);
  });
}

hc_status hc_solution_grid(const hc_solution* solution, const hc_window* window, int nx, int ny,
                           hc_field_row* out) {
  return guard([&] {
    require(solution, "solution");
    require(out, "output buffer");
    const auto rows = hc::field_grid(solution->solution, to_window(window), nx, ny);
    for (size_t k = 0; k < rows.size(); ++k) fill_row(rows[k], &out[k]);
  });
}

hc_status hc_solution_write_csv(const hc_solution* solution, const hc_window* window, int nx, int ny,
                                const char* path) {
  hc_status io = HC_OK;
  const hc_status st = guard([&] {
    require(solution, "solution");
    require(path, "path");
    const auto rows = hc::field_grid(solution->solution, to_window(window), nx, ny);
    std::FILE* f = std::fopen(path, "wb");
    if (!f) {
      io = fail(HC_ERR_IO, std::string("cannot open '") + path + "' for writing");
      return;
    }
    std::fputs("x1,x2,phi,p,u1,u2,mask\n", f);
    for (const auto& r : rows) {
      if (r.masked)
        std::fprintf(f, "%.17g,%.17g,nan,nan,nan,nan,1\n", r.x1, r.x2);
      else
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,0\n", r.x1, r.x2, r.phi, r.p, r.u1, r.u2);
    }
    if (std::fclose(f) != 0) io = fail(HC_ERR_IO, std::string("failed writing '") + path + "'");
  });
  return st != HC_OK ? st : io;
}

hc_status hc_solution_force(const hc_solution* solution, int object_index, double* f1, double* f2) {
  return guard([&] {
    require(solution, "solution");
    require(f1, "output");
    require(f2, "output");
    const hc::Vec2 f = hc::object_force(solution->solution, object_index);
    *f1 = f.x;
    *f2 = f.y;
  });
}

hc_status hc_design_create(const hc_config* config, const hc_background* background, hc_mode mode,
                           hc_design** out) {
  return guard([&] {
    require(config, "config");
    require(out, "output handle");
    *out = nullptr;
    auto problem = std::make_unique<hc::DesignProblem>(config->config, to_background(background), to_mode(mode));
    *out = new hc_design{std::move(problem)};
  });
}

void hc_design_free(hc_design* design) { delete design; }

hc_status hc_design_cost(const hc_design* design, double zeta0, double* out) {
  return guard([&] {
    require(design, "design");
    require(out, "output");
    if (!std::isfinite(zeta0)) throw hc::InvalidArgumentError("zeta0 must be finite");
    *out = design->problem->cost(zeta0);
  });
}

hc_status hc_design_optimize(const hc_design* design, double interval_min, double interval_max,
                             hc_design_result* out) {
  return guard([&] {
    require(design, "design");
    require(out, "output");
    const hc::DesignResult r = design->problem->optimize(interval_min, interval_max);
    const hc::Certificate c = design->problem->certify(r.cost);
    *out = hc_design_result{r.zeta0_opt, r.unconstrained, r.clipped ? 1 : 0, r.cost, r.interval_min,
                            r.interval_max, r.golden_section, c.sqrt_cost, c.constant, c.bound, c.probes};
  });
}

hc_status hc_design_certify(const hc_design* design, double cost, double* constant, double* bound) {
  return guard([&] {
    require(design, "design");
    require(constant, "output");
    require(bound, "output");
    const hc::Certificate c = design->problem->certify(cost);
    *constant = c.constant;
    *bound = c.bound;
  });
}

hc_status hc_design_sampled_error(const hc_design* design, double zeta0, double* out) {
  return guard([&] {
    require(design, "design");
    require(out, "output");
    *out = design->problem->sampled_error(zeta0);
  });
}

int hc_design_warning_count(const hc_design* design) {
  return design ? static_cast<int>(design->problem->warnings().size()) : 0;
}

const char* hc_design_warning(const hc_design* design, int index) {
  if (!design || index < 0 || index >= hc_design_warning_count(design)) return nullptr;
  return design->problem->warnings()[static_cast<size_t>(index)].c_str();
}

hc_status hc_annulus_zeta(double r_i, double r_e, int n, hc_mode mode, double* out) {
  return guard([&] {
    require(out, "output");
    const hc::AnnulusSpec spec{r_i, r_e, n};
    *out = to_mode(mode) == hc::DesignMode::Cloak ? hc::annulus_cloak_zeta(spec) : hc::annulus_shield_zeta(spec);
  });
}

hc_status hc_ellipse_zeta(double xi_i, double xi_e, double focal, int n, hc_parity parity, hc_mode mode,
                          double* out) {
  return guard([&] {
    require(out, "output");
    const hc::ConfocalSpec spec{xi_i, xi_e, focal, n, to_parity(parity)};
    *out = to_mode(mode) == hc::DesignMode::Cloak ? hc::ellipse_cloak_zeta(spec) : hc::ellipse_shield_zeta(spec);
  });
}

hc_status hc_annulus_fields(double r_i, double r_e, int n, hc_parity parity, double zeta0, double x1, double x2,
                            double* phi, double* p) {
  return guard([&] {
    require(phi, "output");
    require(p, "output");
    const hc::FieldSample s = hc::annulus_fields(hc::AnnulusSpec{r_i, r_e, n}, zeta0, {x1, x2}, to_parity(parity));
    *phi = s.phi;
    *p = s.p;
  });
}

hc_status hc_ellipse_fields(double xi_i, double xi_e, double focal, int n, hc_parity parity, double zeta0, double x1,
                            double x2, double* phi, double* p) {
  return guard([&] {
    require(phi, "output");
    require(p, "output");
    const hc::FieldSample s =
        hc::ellipse_fields(hc::ConfocalSpec{xi_i, xi_e, focal, n, to_parity(parity)}, zeta0, {x1, x2});
    *phi = s.phi;
    *p = s.p;
  });
}

hc_status hc_dimensionalize(const hc_physical* params, double zeta0, double* volts) {
  return guard([&] {
    require(volts, "output");
    *volts = hc::dimensionalize_zeta(to_physical(params), zeta0);
  });
}

hc_status hc_nondimensionalize(const hc_physical* params, double volts, double* zeta0) {
  return guard([&] {
    require(zeta0, "output");
    *zeta0 = hc::nondimensionalize_zeta(to_physical(params), volts);
  });
}

hc_status hc_cartesian_to_elliptic(double focal, double x1, double x2, double* xi, double* eta) {
  return guard([&] {
    require(xi, "output");
    require(eta, "output");
    const hc::EllipticCoords e = hc::cartesian_to_elliptic(hc::EllipticFrame{focal}, {x1, x2});
    *xi = e.xi;
    *eta = e.eta;
  });
}

}  // extern "C"
