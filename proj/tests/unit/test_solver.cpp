#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "helecloak/analytic.hpp"
#include "helecloak/solver.hpp"

using namespace helecloak;

namespace {

Vec2 polar(double r, double t) { return {r * std::cos(t), r * std::sin(t)}; }

CloakConfig disks(double ri, double re, double zeta, int n = 256) {
  CloakConfig c;
  c.objects = {build_circle(ri, {0.0, 0.0}, n)};
  c.controls = {build_circle(re, {0.0, 0.0}, n)};
  c.zeta0 = zeta;
  return c;
}

CloakConfig confocal(double xi_i, double xi_e, double zeta, int n = 256) {
  const EllipticFrame f{1.0};
  CloakConfig c;
  c.objects = {build_confocal_ellipse(f, xi_i, n)};
  c.controls = {build_confocal_ellipse(f, xi_e, n)};
  c.zeta0 = zeta;
  return c;
}

BackgroundField elliptic_bg(Parity parity) {
  BackgroundField bg;
  bg.frame = Frame::Elliptic;
  bg.focal = 1.0;
  bg.parity = parity;
  return bg;
}

// On-curve value of a layer field at the nodes of mesh `at` (one of its source curves).
Vector trace_on(const LayerField& field, const MeshPtr& at) {
  Vector v(at->size());
  for (int j = 0; j < at->size(); ++j)
    v[j] = field.background().amplitude_p * field.background().mode(at->nodes()[j]) + field.constant();
  for (const auto& layer : field.layers()) {
    if (layer.mesh == at)
      v += assemble_single_layer(*at) * layer.density;
    else
      v += assemble_single_layer(*layer.mesh, *at) * layer.density;
  }
  return v;
}

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("config validation") {
  CloakConfig c = disks(1.0, 2.0, 0.0, 64);
  CHECK_NOTHROW(c.validate());
  CloakConfig outside = c;
  outside.objects = {build_circle(1.0, {5.0, 0.0}, 64)};
  CHECK_THROWS_AS(outside.validate(), InvalidArgumentError);
  CloakConfig overlap = c;
  overlap.controls = {build_circle(4.0, {0.0, 0.0}, 64)};
  overlap.objects = {build_circle(1.0, {-0.5, 0.0}, 64), build_circle(1.0, {0.5, 0.0}, 64)};
  CHECK_THROWS_AS(overlap.validate(), InvalidArgumentError);
  CloakConfig crossing = c;
  crossing.objects = {build_circle(1.5, {0.8, 0.0}, 64)};
  CHECK_THROWS_AS(crossing.validate(), InvalidArgumentError);
  CloakConfig bad_zeta = c;
  bad_zeta.zeta0 = std::nan("");
  CHECK_THROWS_AS(bad_zeta.validate(), InvalidArgumentError);
  CHECK(c.zeta_mean({1.5, 0.0}) == 0.0);
  c.zeta0 = 0.7;
  CHECK(c.zeta_mean({1.5, 0.0}) == 0.7);
  CHECK(c.zeta_mean({2.5, 0.0}) == 0.0);
  CHECK(c.zeta_mean({0.5, 0.0}) == 0.0);
}

TEST_CASE("electrostatics around the unit disk") {
  const auto obj = build_circle(1.0, {0.0, 0.0}, 256);
  const auto e = solve_electrostatic({obj}, BackgroundField{});
  for (int j = 0; j < obj->size(); ++j)
    CHECK(e.densities()[0][j] == doctest::Approx(-2.0 * std::cos(obj->parameters()[j])).epsilon(1e-12).scale(1.0));
  CHECK(e.phi({2.0, 0.0}) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(max_abs(e.object_normal_derivative(0)) <= 1e-10);
  const Vector w = Vector::Map(obj->weights().data(), obj->size());
  CHECK(std::abs(w.dot(e.densities()[0])) <= 1e-10);
}

TEST_CASE("electrostatics around a confocal ellipse") {
  const EllipticFrame f{1.0};
  const auto obj = build_confocal_ellipse(f, 0.5, 256);
  const auto e = solve_electrostatic({obj}, elliptic_bg(Parity::Cos));
  const Vector beta = elliptic_basis(f, 0.5, 1, Parity::Cos, *obj);
  const double c = -std::exp(0.5) * std::tanh(0.5);
  CHECK(c == doctest::Approx(-0.761902).epsilon(1e-6));
  CHECK(max_abs(e.densities()[0] - c * beta) <= 1e-10);
}

TEST_CASE("pressure for concentric disks") {
  SUBCASE("perfect cloak") {
    const auto sol = solve_coupled(disks(1.0, 2.0, 8.0 / 15.0), BackgroundField{});
    CHECK(sol.pressure->p({3.0, 0.0}) == doctest::Approx(36.0).epsilon(1e-10));
    const Vec2 u = sol.velocity({3.0, 1.0});
    CHECK(norm(u - Vec2{-1.0, 0.0}) <= 1e-10);
  }
  SUBCASE("perfect shield") {
    const auto sol = solve_coupled(disks(1.0, 2.0, 8.0 / 3.0), BackgroundField{});
    CHECK(std::abs(sol.pressure->p({1.5, 0.0})) <= 1e-10);
    CHECK(norm(sol.pressure->grad_p({1.5, 0.2})) <= 1e-9);
    CHECK(max_abs(sol.pressure->object_trace(0)) <= 1e-8);
  }
  SUBCASE("no zeta potential") {
    const auto sol = solve_coupled(disks(1.0, 2.0, 0.0), BackgroundField{});
    CHECK(sol.pressure->p({3.0, 0.0}) == doctest::Approx(40.0).epsilon(1e-10));
    const Vec2 far = sol.velocity({400.0, 300.0});
    CHECK(norm(far - Vec2{-1.0, 0.0}) <= 1e-4);
  }
}

TEST_CASE("boundary conditions of the pressure representation") {
  const CloakConfig c = disks(1.0, 2.0, 0.77);
  const auto sol = solve_coupled(c, BackgroundField{});
  const double scale = 12.0 * 2.0;
  CHECK(max_abs(sol.pressure->object_normal_derivative(0)) <= 1e-8 * scale);
  // Control density is 12 zeta dphi/dnu with the weighted mean removed.
  const auto& ctrl = c.controls[0];
  const Vector flux = sol.electro->normal_derivative(*ctrl);
  const Vector w = Vector::Map(ctrl->weights().data(), ctrl->size());
  const Vector psi_e = sol.pressure->control_densities()[0];
  CHECK(std::abs(w.dot(psi_e)) <= 1e-10 * scale);
  CHECK(max_abs(psi_e - 12.0 * 0.77 * (flux.array() - w.dot(flux) / w.sum()).matrix()) <= 1e-12 * scale);
  // Jump of the radial derivative across the control against the analytic one.
  const AnnulusSpec spec{1.0, 2.0, 1};
  for (double t : {0.3, 2.0}) {
    const double dr = 0.25;
    const Vec2 nu = polar(1.0, t);
    const double jump = dot(sol.pressure->grad_p(polar(2.0 + dr, t)) - sol.pressure->grad_p(polar(2.0 - dr, t)), nu);
    const double exact =
        dot(annulus_fields(spec, 0.77, polar(2.0 + dr, t)).grad_p - annulus_fields(spec, 0.77, polar(2.0 - dr, t)).grad_p, nu);
    CHECK(jump == doctest::Approx(exact).epsilon(1e-8).scale(scale));
  }
}

TEST_CASE("solver matches the annulus oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> z(-3.0, 3.0), ang(0.0, kTwoPi), rad(1.15, 4.0);
  const AnnulusSpec spec{1.0, 2.0, 1};
  std::vector<double> zetas{annulus_cloak_zeta(spec), annulus_shield_zeta(spec)};
  for (int k = 0; k < 5; ++k) zetas.push_back(z(rng));
  for (double zeta : zetas) {
    const CloakConfig cfg = disks(1.0, 2.0, zeta);
    const auto sol = solve_coupled(cfg, BackgroundField{});
    int tested = 0;
    while (tested < 20) {
      const Vec2 x = polar(rad(rng), ang(rng));
      if (cfg.near_any_curve(x)) continue;
      ++tested;
      const FieldSample ref = annulus_fields(spec, zeta, x);
      // Relative to the background scale on the control where p itself vanishes.
      const double pscale = std::max(std::abs(ref.p), 24.0);
      CHECK(sol.pressure->p(x) == doctest::Approx(ref.p).epsilon(1e-6).scale(pscale));
      CHECK(sol.electro->phi(x) == doctest::Approx(ref.phi).epsilon(1e-6).scale(std::max(std::abs(ref.phi), 1e-2)));
    }
  }
}

TEST_CASE("solver matches the confocal oracle") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> z(-3.0, 3.0), ang(0.0, kTwoPi), xi(0.6, 1.8);
  const EllipticFrame f{1.0};
  for (Parity parity : {Parity::Cos, Parity::Sin}) {
    const ConfocalSpec spec{0.5, 1.0, 1.0, 1, parity};
    std::vector<double> zetas{ellipse_cloak_zeta(spec), ellipse_shield_zeta(spec)};
    for (int k = 0; k < 5; ++k) zetas.push_back(z(rng));
    for (double zeta : zetas) {
      const CloakConfig cfg = confocal(0.5, 1.0, zeta);
      const auto sol = solve_coupled(cfg, elliptic_bg(parity));
      int tested = 0;
      while (tested < 20) {
        const Vec2 x = f.to_cartesian(xi(rng), ang(rng));
        if (cfg.near_any_curve(x)) continue;
        ++tested;
        const FieldSample ref = ellipse_fields(spec, zeta, x);
        const double pscale = std::max(std::abs(ref.p), 12.0 * std::cosh(1.0));
        CHECK(sol.pressure->p(x) == doctest::Approx(ref.p).epsilon(1e-6).scale(pscale));
      }
    }
  }
}

TEST_CASE("spectral convergence on the unit disk") {
  const AnnulusSpec spec{1.0, 2.0, 1};
  const double zeta = 0.4;
  auto error = [&](int n) {
    const auto sol = solve_coupled(disks(1.0, 2.0, zeta, n), BackgroundField{});
    double e = 0.0;
    for (double r : {2.8, 3.2})
      for (double t : {0.1, 0.9, 2.3, 4.0}) {
        const Vec2 x = polar(r, t);
        e = std::max(e, std::abs(sol.pressure->p(x) - annulus_fields(spec, zeta, x).p));
      }
    return e;
  };
  const double e32 = error(32), e128 = error(128);
  INFO("e32 = " << e32 << ", e128 = " << e128);
  CHECK(e128 <= 1e-2 * e32);
  CHECK(e128 <= 1e-12);
}

TEST_CASE("linearity in the background amplitude") {
  const auto kite = build_kite(128);
  CloakConfig c;
  c.objects = {kite};
  c.controls = {build_circle(2.0, {0.0, 0.0}, 128)};
  c.zeta0 = 0.3;
  BackgroundField one, two;
  two.amplitude_h = 2.0;
  two.amplitude_p = 24.0;
  const auto a = solve_coupled(c, one), b = solve_coupled(c, two);
  CHECK(max_abs(b.electro->densities()[0] - 2.0 * a.electro->densities()[0]) <=
        1e-10 * max_abs(a.electro->densities()[0]));
  CHECK(max_abs(b.pressure->object_densities()[0] - 2.0 * a.pressure->object_densities()[0]) <=
        1e-10 * max_abs(a.pressure->object_densities()[0]));
  CHECK(max_abs(b.pressure->control_densities()[0] - 2.0 * a.pressure->control_densities()[0]) <=
        1e-10 * max_abs(a.pressure->control_densities()[0]));

  // Perturbing H (and P = 12 H) by delta in sup norm over the sample region.
  const double delta = 1e-6;
  BackgroundField pert = one;
  pert.amplitude_h = 1.0 + delta / 3.0;
  pert.amplitude_p = 12.0 * pert.amplitude_h;
  const auto d = solve_coupled(c, pert);
  double change = 0.0;
  for (double t = 0.0; t < kTwoPi; t += 0.5) change = std::max(change, std::abs(d.pressure->p(polar(2.5, t)) - a.pressure->p(polar(2.5, t))));
  const double C = change / delta;
  MESSAGE("stability constant estimate: |dp| / |dH| = " << C);
  CHECK(C < 100.0);
}

TEST_CASE("interior mixed problem on concentric disks") {
  const auto obj = build_circle(1.0, {0.0, 0.0}, 256);
  const auto ctrl = build_circle(2.0, {0.0, 0.0}, 256);
  const auto m = solve_interior_mixed({obj}, ctrl, BackgroundField{});
  const Vector on_obj = trace_on(m.field, obj);
  CHECK(on_obj[0] == doctest::Approx(19.2).epsilon(1e-10));
  for (int j = 0; j < obj->size(); j += 13)
    CHECK(on_obj[j] == doctest::Approx(19.2 * std::cos(obj->parameters()[j])).epsilon(1e-10).scale(19.2));
  const double oracle = 12.0 * 4.0 / 5.0 * (1.05 + 1.0 / 1.05);
  CHECK(m.field.value({1.05, 0.0}) == doctest::Approx(oracle).epsilon(1e-6));
  for (int j = 0; j < ctrl->size(); ++j)
    CHECK(m.control_normal_derivative[j] == doctest::Approx(7.2 * std::cos(ctrl->parameters()[j])).epsilon(1e-10).scale(7.2));
  // Dirichlet data reproduced on the control.
  const Vector on_ctrl = trace_on(m.field, ctrl);
  CHECK(max_abs(on_ctrl - 12.0 * BackgroundField{}.mode_values(*ctrl)) <= 1e-10 * 24.0);

  BackgroundField zero;
  zero.amplitude_p = 0.0;
  const auto z = solve_interior_mixed({obj}, ctrl, zero);
  CHECK(std::abs(z.field.value({1.5, 0.3})) <= 1e-14);
  CHECK(max_abs(z.control_normal_derivative) <= 1e-14);
}

TEST_CASE("exterior Dirichlet problem on a disk") {
  const auto ctrl = build_circle(2.0, {0.0, 0.0}, 256);
  const auto ext = solve_exterior_dirichlet({ctrl}, BackgroundField{});
  CHECK(ext.field.value({4.0, 0.0}) == doctest::Approx(36.0).epsilon(1e-10));
  for (int j = 0; j < ctrl->size(); ++j)
    CHECK(ext.control_normal_derivatives[0][j] ==
          doctest::Approx(24.0 * std::cos(ctrl->parameters()[j])).epsilon(1e-10).scale(24.0));
  CHECK(std::abs(ext.at_infinity) <= 1e-12);
  CHECK(max_abs(trace_on(ext.field, ctrl)) <= 1e-10 * 24.0);
  BackgroundField zero;
  zero.amplitude_p = 0.0;
  const auto z = solve_exterior_dirichlet({ctrl}, zero);
  CHECK(std::abs(z.field.value({4.0, 1.0})) <= 1e-14);
}

TEST_CASE("exterior Dirichlet problem stays bounded for asymmetric controls") {
  // Off-centre kite: p - P tends to a constant, and p vanishes on the curve.
  Placement pl;
  pl.center = {0.4, -0.3};
  const auto ctrl = build_kite(256, pl);
  const auto ext = solve_exterior_dirichlet({ctrl}, BackgroundField{});
  CHECK(max_abs(trace_on(ext.field, ctrl)) <= 1e-9 * 12.0);
  const Vec2 far{3e4, 4e4};
  const double dev = ext.field.value(far) - BackgroundField{}.P(far);
  CHECK(dev == doctest::Approx(ext.at_infinity).epsilon(1e-3).scale(1.0));
}

TEST_CASE("two objects in one control") {
  CloakConfig c;
  c.objects = {build_circle(0.5, {-0.8, 0.0}, 256), build_circle(0.5, {0.8, 0.0}, 256)};
  c.controls = {build_circle(2.0, {0.0, 0.0}, 256)};
  c.zeta0 = 8.0 / 15.0;
  const auto sol = solve_coupled(c, BackgroundField{});
  CHECK(max_abs(sol.electro->object_normal_derivative(0)) <= 1e-6);
  CHECK(max_abs(sol.electro->object_normal_derivative(1)) <= 1e-6);
  CHECK(max_abs(sol.pressure->object_normal_derivative(0)) <= 1e-6 * 12.0);
  CHECK(max_abs(sol.pressure->object_normal_derivative(1)) <= 1e-6 * 12.0);
  const Vec2 f0 = object_force(sol, 0), f1 = object_force(sol, 1);
  // Mirror symmetry x1 -> -x1 flips p, so F1 agrees and F2 vanishes.
  CHECK(std::abs(f0.x - f1.x) <= 1e-8);
  CHECK(std::abs(f0.y) <= 1e-8);
  CHECK(std::abs(f1.y) <= 1e-8);
  CHECK_THROWS_AS(object_force(sol, 2), InvalidArgumentError);
}

TEST_CASE("forces on a disk") {
  SUBCASE("shielded disk feels no force") {
    const auto sol = solve_coupled(disks(1.0, 2.0, 8.0 / 3.0), BackgroundField{});
    const Vec2 f = object_force(sol, 0);
    CHECK(norm(f) <= 1e-8);
  }
  SUBCASE("uncloaked disk against a reference quadrature of the shell solution") {
    const auto sol = solve_coupled(disks(1.0, 2.0, 0.0), BackgroundField{});
    const AnnulusSpec spec{1.0, 2.0, 1};
    const double fx = -oracle::integrate(
        [&](double t) { return annulus_fields(spec, 0.0, polar(1.0, t)).p * std::cos(t); }, 0.0, kTwoPi);
    const double fy = -oracle::integrate(
        [&](double t) { return annulus_fields(spec, 0.0, polar(1.0, t)).p * std::sin(t); }, 0.0, kTwoPi);
    const Vec2 f = object_force(sol, 0);
    CHECK(fx < 0.0);
    CHECK(f.x == doctest::Approx(fx).epsilon(1e-10));
    CHECK(std::abs(f.y - fy) <= 1e-10);
  }
}

TEST_CASE("field grid") {
  const CloakConfig cfg = disks(1.0, 2.0, 8.0 / 15.0);
  const auto sol = solve_coupled(cfg, BackgroundField{});
  const Window w{-4.0, 4.0, -4.0, 4.0};
  const auto rows = field_grid(sol, w, 41, 33);
  REQUIRE(rows.size() == 41u * 33u);
  CHECK(rows[1].x1 > rows[0].x1);
  CHECK(rows[1].x2 == rows[0].x2);
  double err = 0.0, pmax = 0.0;
  int masked = 0, expected_masked = 0;
  for (const auto& r : rows) {
    const Vec2 x{r.x1, r.x2};
    if (cfg.inside_object(x) || cfg.near_any_curve(x)) ++expected_masked;
    if (r.masked) {
      ++masked;
      CHECK(std::isnan(r.p));
      CHECK(std::isnan(r.u1));
      continue;
    }
    if (!cfg.inside_control(x)) {
      err = std::max(err, std::abs(r.p - BackgroundField{}.P(x)));
      pmax = std::max(pmax, std::abs(BackgroundField{}.P(x)));
    }
  }
  CHECK(masked == expected_masked);
  CHECK(masked > 0);
  CHECK(err <= 1e-6 * pmax);

  BackgroundField zero;
  zero.amplitude_h = 0.0;
  zero.amplitude_p = 0.0;
  const auto flat = solve_coupled(disks(1.0, 2.0, 0.5, 64), zero);
  for (const auto& r : field_grid(flat, w, 9, 9))
    if (!r.masked) {
      CHECK(r.p == 0.0);
      CHECK(r.phi == 0.0);
    }
  CHECK_THROWS_AS(field_grid(sol, Window{1.0, 1.0, 0.0, 1.0}, 4, 4), InvalidArgumentError);
  CHECK_THROWS_AS(field_grid(sol, w, 0, 4), InvalidArgumentError);
}

TEST_CASE("evaluation inside the near-field band is refused") {
  const auto sol = solve_coupled(disks(1.0, 2.0, 0.5, 64), BackgroundField{});
  CHECK_THROWS_AS(sol.pressure->p({2.0 + 1e-3, 0.0}), NearFieldError);
  CHECK_THROWS_AS(sol.velocity({1.0 + 1e-3, 0.0}), NearFieldError);
}

TEST_CASE("solver results are reproducible across worker counts") {
  const CloakConfig cfg = disks(1.0, 2.0, 0.4, 128);
  ::setenv("HELECLOAK_THREADS", "1", 1);
  const auto a = field_grid(solve_coupled(cfg, BackgroundField{}), Window{-3, 3, -3, 3}, 17, 17);
  ::setenv("HELECLOAK_THREADS", "3", 1);
  const auto b = field_grid(solve_coupled(cfg, BackgroundField{}), Window{-3, 3, -3, 3}, 17, 17);
  ::unsetenv("HELECLOAK_THREADS");
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].masked) continue;
    CHECK(std::abs(a[k].p - b[k].p) <= 1e-13 * 40.0);
  }
}
