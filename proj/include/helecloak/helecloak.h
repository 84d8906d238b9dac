/* C interface to the helecloak boundary-integral solver.
 *
 * All handles are opaque. Every function returning hc_status leaves a message
 * retrievable with hc_last_error() on failure; the message is per thread and
 * stays valid until the next failing call on that thread. */
#ifndef HELECLOAK_H
#define HELECLOAK_H

#include <stddef.h>

#if defined(_WIN32)
#define HC_API __declspec(dllexport)
#else
#define HC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hc_status {
  HC_OK = 0,
  HC_ERR_INVALID_ARGUMENT = 1,
  HC_ERR_NUMERICAL = 2,
  HC_ERR_DEGENERATE = 3,
  HC_ERR_NEAR_FIELD = 4,
  HC_ERR_IO = 5,
  HC_ERR_INTERNAL = 6
} hc_status;

typedef enum hc_frame { HC_FRAME_POLAR = 0, HC_FRAME_ELLIPTIC = 1 } hc_frame;
typedef enum hc_parity { HC_PARITY_COS = 0, HC_PARITY_SIN = 1 } hc_parity;
typedef enum hc_mode { HC_MODE_CLOAK = 0, HC_MODE_SHIELD = 1 } hc_mode;

typedef struct hc_mesh hc_mesh;
typedef struct hc_config hc_config;
typedef struct hc_solution hc_solution;
typedef struct hc_design hc_design;

typedef struct hc_point {
  double x1;
  double x2;
} hc_point;

/* Applied to a preset curve: scale, then rotate (radians), then translate. */
typedef struct hc_placement {
  double center_x1;
  double center_x2;
  double rotation;
  double scale;
} hc_placement;

/* H = amplitude_h * f, P = amplitude_p * f with f = Re or Im of z^n (polar)
 * or of T_n(z / focal) (elliptic). */
typedef struct hc_background {
  hc_frame frame;
  double focal;
  int n;
  hc_parity parity;
  double amplitude_h;
  double amplitude_p;
} hc_background;

/* SI units. */
typedef struct hc_physical {
  double gap;
  double length;
  double width;
  double density;
  double viscosity;
  double permittivity;
  double field;
  double velocity;
} hc_physical;

typedef struct hc_window {
  double x1_min;
  double x1_max;
  double x2_min;
  double x2_max;
} hc_window;

typedef struct hc_field_row {
  double x1;
  double x2;
  double phi;
  double p;
  double u1;
  double u2;
  int masked;
} hc_field_row;

typedef struct hc_design_result {
  double zeta0_opt;
  double unconstrained;
  int clipped;
  double cost;
  double interval_min;
  double interval_max;
  double golden_section;
  double sqrt_cost;
  double constant;
  double bound;
  size_t probes;
} hc_design_result;

HC_API const char* hc_version(void);
HC_API const char* hc_last_error(void);
HC_API const char* hc_status_string(hc_status status);
HC_API int hc_worker_count(void);

HC_API void hc_placement_default(hc_placement* out);
HC_API void hc_background_default(hc_background* out);
HC_API void hc_physical_defaults(hc_physical* out);

/* Meshes. `placement` may be NULL for the identity. */
HC_API hc_status hc_mesh_circle(double radius, double center_x1, double center_x2, int nodes, hc_mesh** out);
HC_API hc_status hc_mesh_confocal_ellipse(double focal, double xi, int nodes, const hc_placement* placement,
                                          hc_mesh** out);
HC_API hc_status hc_mesh_ellipse(double semi_x1, double semi_x2, int nodes, const hc_placement* placement,
                                 hc_mesh** out);
/* r(t) = c[0] + sum_k (c[k] cos kt + s[k] sin kt); s[0] is ignored. */
HC_API hc_status hc_mesh_polar(const double* cos_coeffs, size_t n_cos, const double* sin_coeffs, size_t n_sin,
                               int nodes, const hc_placement* placement, hc_mesh** out);
HC_API hc_status hc_mesh_flower(int nodes, const hc_placement* placement, hc_mesh** out);
HC_API hc_status hc_mesh_peanut(int nodes, const hc_placement* placement, hc_mesh** out);
HC_API hc_status hc_mesh_kite(int nodes, const hc_placement* placement, hc_mesh** out);
HC_API hc_status hc_mesh_rounded_polygon(const hc_point* vertices, size_t count, double rounding_radius, int nodes,
                                         const hc_placement* placement, hc_mesh** out);
/* Regular polygon inscribed in `circumradius`, first vertex at angle
 * `vertex_angle`. A negative rounding radius selects the default, 1e-2 of the
 * circumradius; zero is rejected. hc_mesh_rounded_polygon treats the rounding
 * radius the same way. */
HC_API hc_status hc_mesh_regular_polygon(int sides, double circumradius, double vertex_angle, double rounding_radius,
                                         int nodes, const hc_placement* placement, hc_mesh** out);
/* Trigonometric interpolant through counterclockwise points. */
HC_API hc_status hc_mesh_points(const hc_point* points, size_t count, int nodes, const hc_placement* placement,
                                hc_mesh** out);
HC_API void hc_mesh_free(hc_mesh* mesh);

HC_API int hc_mesh_size(const hc_mesh* mesh);
HC_API const char* hc_mesh_label(const hc_mesh* mesh);
/* Copy per-node data into caller buffers of at least hc_mesh_size entries. */
HC_API hc_status hc_mesh_nodes(const hc_mesh* mesh, hc_point* out);
HC_API hc_status hc_mesh_normals(const hc_mesh* mesh, hc_point* out);
HC_API hc_status hc_mesh_weights(const hc_mesh* mesh, double* out);
HC_API hc_status hc_mesh_curvatures(const hc_mesh* mesh, double* out);
HC_API hc_status hc_mesh_jacobians(const hc_mesh* mesh, double* out);
HC_API hc_status hc_mesh_perimeter(const hc_mesh* mesh, double* out);

/* Geometry of a cloaking device. Meshes are shared, not copied; the caller
 * may free its mesh handles after adding them. */
HC_API hc_status hc_config_create(hc_config** out);
HC_API void hc_config_free(hc_config* config);
HC_API hc_status hc_config_add_object(hc_config* config, const hc_mesh* mesh);
HC_API hc_status hc_config_add_control(hc_config* config, const hc_mesh* mesh);
HC_API hc_status hc_config_validate(const hc_config* config);
HC_API int hc_config_object_count(const hc_config* config);

/* Coupled electrostatic and pressure solve at a fixed zeta0. */
HC_API hc_status hc_solve(const hc_config* config, const hc_background* background, double zeta0,
                          hc_solution** out);
HC_API void hc_solution_free(hc_solution* solution);
/* Samples inside an object or within the near-field band come back masked. */
HC_API hc_status hc_solution_eval(const hc_solution* solution, double x1, double x2, hc_field_row* out);
/* Fills nx * ny rows, x1 varying fastest. */
HC_API hc_status hc_solution_grid(const hc_solution* solution, const hc_window* window, int nx, int ny,
                                  hc_field_row* out);
HC_API hc_status hc_solution_write_csv(const hc_solution* solution, const hc_window* window, int nx, int ny,
                                       const char* path);
HC_API hc_status hc_solution_force(const hc_solution* solution, int object_index, double* f1, double* f2);

/* Zeta-independent design problem; the boundary value problems are solved
 * once at creation. */
HC_API hc_status hc_design_create(const hc_config* config, const hc_background* background, hc_mode mode,
                                  hc_design** out);
HC_API void hc_design_free(hc_design* design);
HC_API hc_status hc_design_cost(const hc_design* design, double zeta0, double* out);
HC_API hc_status hc_design_optimize(const hc_design* design, double interval_min, double interval_max,
                                    hc_design_result* out);
HC_API hc_status hc_design_certify(const hc_design* design, double cost, double* constant, double* bound);
HC_API hc_status hc_design_sampled_error(const hc_design* design, double zeta0, double* out);
HC_API int hc_design_warning_count(const hc_design* design);
HC_API const char* hc_design_warning(const hc_design* design, int index);

/* Closed forms for concentric disks and confocal ellipses. */
HC_API hc_status hc_annulus_zeta(double r_i, double r_e, int n, hc_mode mode, double* out);
HC_API hc_status hc_ellipse_zeta(double xi_i, double xi_e, double focal, int n, hc_parity parity, hc_mode mode,
                                 double* out);
HC_API hc_status hc_annulus_fields(double r_i, double r_e, int n, hc_parity parity, double zeta0, double x1,
                                   double x2, double* phi, double* p);
HC_API hc_status hc_ellipse_fields(double xi_i, double xi_e, double focal, int n, hc_parity parity, double zeta0,
                                   double x1, double x2, double* phi, double* p);

HC_API hc_status hc_dimensionalize(const hc_physical* params, double zeta0, double* volts);
HC_API hc_status hc_nondimensionalize(const hc_physical* params, double volts, double* zeta0);
HC_API hc_status hc_cartesian_to_elliptic(double focal, double x1, double x2, double* xi, double* eta);

#ifdef __cplusplus
}
#endif

#endif /* HELECLOAK_H */
