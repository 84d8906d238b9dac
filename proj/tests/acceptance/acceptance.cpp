// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helecloak/analytic.hpp"
#include "helecloak/design.hpp"

using namespace helecloak;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct CliRun {
  int code = -1;
  std::string out;
  double seconds = 0.0;
};

CliRun cli(const std::string& args) {
  CliRun r;
  const auto t0 = Clock::now();
  const std::string cmd = std::string("'") + HELECLOAK_CLI + "' " + args + " 2>&1";
  std::FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.seconds = seconds_since(t0);
  return r;
}

double parse_voltage(const std::string& out) {
  const auto pos = out.find("voltage ");
  return pos == std::string::npos ? std::nan("") : std::stod(out.substr(pos + 8));
}

// Runs `analytic` and compares the printed voltage with a reference value.
void expect_voltage(Outcome& o, const std::string& args, double target, double rel) {
  const CliRun r = cli("analytic " + args);
  const double v = parse_voltage(r.out);
  const double err = std::abs(v - target) / std::abs(target);
  char line[160];
  std::snprintf(line, sizeof line, " %.4f V vs %.4f V (%.3f%%, %.3f s);", v, target, 100.0 * err, r.seconds);
  o.detail << line;
  o.require(r.code == 0, "exit code for " + args);
  o.require(err <= rel, "tolerance for " + args);
  o.require(r.seconds < 1.0, "runtime for " + args);
}

CloakConfig cell(MeshPtr object, MeshPtr control, double zeta = 0.0) {
  CloakConfig c;
  c.objects = {std::move(object)};
  c.controls = {std::move(control)};
  c.zeta0 = zeta;
  return c;
}

BackgroundField elliptic(Parity parity) {
  BackgroundField bg;
  bg.frame = Frame::Elliptic;
  bg.parity = parity;
  return bg;
}

struct Preset {
  const char* name;
  MeshPtr mesh;
};

std::vector<Preset> presets() {
  const auto tri = regular_polygon_vertices(3, 1.0, kPi / 2.0);
  return {{"flower", build_polar_shape(flower_radius(), 256)},
          {"kite", build_kite(256)},
          {"peanut", build_polar_shape(peanut_radius(), 256)},
          {"rounded-triangle", build_rounded_polygon(tri, default_rounding_radius(tri), 256)}};
}

Outcome criterion1() {
  Outcome o;
  expect_voltage(o, "--shape annulus --mode shield --ri 100e-6 --re 200e-6", -0.64, 0.01);
  expect_voltage(o, "--shape annulus --mode cloak --ri 100e-6 --re 200e-6", -0.128, 0.01);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const std::string g = "--shape confocal-ellipse --xi-i 0.5 --xi-e 1.0 ";
  expect_voltage(o, g + "--mode shield --parity x", -0.7593, 0.005);
  expect_voltage(o, g + "--mode shield --parity y", -0.7593, 0.005);
  expect_voltage(o, g + "--mode cloak --parity x", -0.1291, 0.005);
  expect_voltage(o, g + "--mode cloak --parity y", -0.2793, 0.005);
  return o;
}

Outcome criterion3() {
  Outcome o;
  expect_voltage(o, "--shape annulus --mode cloak --ri 100e-6 --re 110e-6", -1.2515, 0.001);
  const std::string g = "--shape confocal-ellipse --xi-i 0.5 --xi-e 0.7 --mode cloak ";
  expect_voltage(o, g + "--parity x", -0.3693, 0.002);
  expect_voltage(o, g + "--parity y", -0.7992, 0.002);
  return o;
}

// Largest relative deviation over 20 random points for cloak, shield and five
// random zeta values. Errors are scaled by max(|p|, max |P| on the control).
double oracle_sweep(const std::function<CloakConfig(double)>& make, const BackgroundField& bg,
                    const std::function<double(double, Vec2)>& exact_p, const std::function<Vec2(std::mt19937_64&)>& point,
                    const std::vector<double>& special, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> zd(-3.0, 3.0);
  std::vector<double> zetas = special;
  for (int k = 0; k < 5; ++k) zetas.push_back(zd(rng));
  double worst = 0.0;
  for (double z : zetas) {
    const CloakConfig cfg = make(z);
    const auto sol = solve_coupled(cfg, bg);
    for (int tested = 0; tested < 20;) {
      const Vec2 x = point(rng);
      if (cfg.near_any_curve(x)) continue;
      ++tested;
      const double ref = exact_p(z, x);
      worst = std::max(worst, std::abs(sol.pressure->p(x) - ref) / std::max(std::abs(ref), scale));
    }
  }
  return worst;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(2024);
  {
    const auto t0 = Clock::now();
    const AnnulusSpec spec{1.0, 2.0, 1};
    const double e = oracle_sweep(
        [](double z) { return cell(build_circle(1.0, {0, 0}, 256), build_circle(2.0, {0, 0}, 256), z); },
        BackgroundField{}, [&](double z, Vec2 x) { return annulus_fields(spec, z, x).p; },
        [](std::mt19937_64& g) {
          std::uniform_real_distribution<double> r(1.0, 4.0), t(0.0, kTwoPi);
          const double rr = r(g), tt = t(g);
          return Vec2{rr * std::cos(tt), rr * std::sin(tt)};
        },
        {annulus_cloak_zeta(spec), annulus_shield_zeta(spec)}, 24.0, rng);
    const double s = seconds_since(t0);
    o.detail << " annulus max rel " << e << " (" << s << " s);";
    o.require(e <= 1e-6, "annulus accuracy");
    o.require(s < 10.0, "annulus runtime");
  }
  const EllipticFrame f{1.0};
  for (Parity parity : {Parity::Cos, Parity::Sin}) {
    const auto t0 = Clock::now();
    const ConfocalSpec spec{0.5, 1.0, 1.0, 1, parity};
    const double e = oracle_sweep(
        [&](double z) { return cell(build_confocal_ellipse(f, 0.5, 256), build_confocal_ellipse(f, 1.0, 256), z); },
        elliptic(parity), [&](double z, Vec2 x) { return ellipse_fields(spec, z, x).p; },
        [&](std::mt19937_64& g) {
          std::uniform_real_distribution<double> xi(0.5, 1.8), eta(0.0, kTwoPi);
          return f.to_cartesian(xi(g), eta(g));
        },
        {ellipse_cloak_zeta(spec), ellipse_shield_zeta(spec)}, 12.0 * std::cosh(1.0), rng);
    const double s = seconds_since(t0);
    o.detail << " ellipse-" << (parity == Parity::Cos ? "x" : "y") << " max rel " << e << " (" << s << " s);";
    o.require(e <= 1e-6, "ellipse accuracy");
    o.require(s < 10.0, "ellipse runtime");
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  const AnnulusSpec spec{1.0, 2.0, 1};
  // Hand chain: residual amplitude / (12 x flux amplitude) on r_e = 2.
  const double chain_cloak = 4.8 / (12.0 * 0.75), chain_shield = 24.0 / (12.0 * 0.75);
  o.require(std::abs(chain_cloak - annulus_cloak_zeta(spec)) <= 1e-14, "8/15 chain");
  o.require(std::abs(chain_shield - annulus_shield_zeta(spec)) <= 1e-14, "8/3 chain");

  auto check = [&](const char* name, const CloakConfig& c, const BackgroundField& bg, DesignMode mode, double exact) {
    const DesignResult r = DesignProblem(c, bg, mode).optimize();
    const double rel = std::abs(r.zeta0_opt - exact) / std::abs(exact);
    o.detail << " " << name << " rel " << rel << " cost " << r.cost << ";";
    o.require(rel <= 1e-6, std::string(name) + " recovery");
    o.require(r.cost <= 1e-10, std::string(name) + " cost");
  };
  const CloakConfig disk = cell(build_circle(1.0, {0, 0}, 256), build_circle(2.0, {0, 0}, 256));
  check("disk-cloak", disk, BackgroundField{}, DesignMode::Cloak, chain_cloak);
  check("disk-shield", disk, BackgroundField{}, DesignMode::Shield, chain_shield);
  const EllipticFrame f{1.0};
  const CloakConfig ell = cell(build_confocal_ellipse(f, 0.5, 256), build_confocal_ellipse(f, 1.0, 256));
  for (Parity parity : {Parity::Cos, Parity::Sin}) {
    const ConfocalSpec spec_e{0.5, 1.0, 1.0, 1, parity};
    const bool x = parity == Parity::Cos;
    check(x ? "ellipse-x-cloak" : "ellipse-y-cloak", ell, elliptic(parity), DesignMode::Cloak,
          ellipse_cloak_zeta(spec_e));
    check(x ? "ellipse-x-shield" : "ellipse-y-shield", ell, elliptic(parity), DesignMode::Shield,
          ellipse_shield_zeta(spec_e));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto circle = build_circle(1.0, {0, 0}, 256);
  const Matrix K = assemble_np_star(*circle);
  const Matrix S = assemble_single_layer(*circle);
  Vector c(circle->size()), s(circle->size());
  for (int j = 0; j < circle->size(); ++j) {
    c[j] = std::cos(circle->parameters()[j]);
    s[j] = std::sin(circle->parameters()[j]);
  }
  const double knorm = std::max((K * c).cwiseAbs().maxCoeff(), (K * s).cwiseAbs().maxCoeff());
  // S[e^{i theta}] = -r/2 e^{i theta} inside, -1/(2r) e^{i theta} outside.
  double serr = std::max((S * c + 0.5 * c).cwiseAbs().maxCoeff(), (S * s + 0.5 * s).cwiseAbs().maxCoeff());
  for (double r : {0.5, 0.8, 1.3, 2.0})
    for (double t : {0.3, 1.9, 4.4}) {
      const Vec2 x{r * std::cos(t), r * std::sin(t)};
      const double exact = r < 1.0 ? -0.5 * r : -0.5 / r;
      serr = std::max(serr, std::abs(single_layer_value(*circle, c, x) - exact * std::cos(t)));
      serr = std::max(serr, std::abs(single_layer_value(*circle, s, x) - exact * std::sin(t)));
    }
  o.detail << " |K*[e^it]| " << knorm << "; S error " << serr << ";";
  o.require(knorm <= 1e-8, "K* on circle");
  o.require(serr <= 1e-8, "S on circle");

  const EllipticFrame f{1.0};
  const auto ell = build_confocal_ellipse(f, 0.5, 256);
  const Matrix Ke = assemble_np_star(*ell);
  double eerr = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const double lam = 0.5 * std::exp(-2.0 * n * 0.5);
    const Vector bc = elliptic_basis(f, 0.5, n, Parity::Cos, *ell);
    const Vector bs = elliptic_basis(f, 0.5, n, Parity::Sin, *ell);
    eerr = std::max(eerr, (Ke * bc - lam * bc).cwiseAbs().maxCoeff());
    eerr = std::max(eerr, (Ke * bs + lam * bs).cwiseAbs().maxCoeff());
  }
  o.detail << " ellipse eigen error " << eerr << ";";
  o.require(eerr <= 1e-8, "ellipse eigenvalues");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto object = build_circle(1.0, {0, 0}, 256);
  const CloakConfig cfg = cell(object, build_circle(2.0, {0, 0}, 256), annulus_shield_zeta({1.0, 2.0, 1}));
  const auto sol = solve_coupled(cfg, BackgroundField{});
  const Vec2 F = object_force(sol, 0);
  const double limit = 1e-8 * 12.0 * object->perimeter();
  double shell = 0.0;
  int samples = 0;
  for (int i = 0; i < 41; ++i)
    for (int j = 0; j < 41; ++j) {
      const Vec2 x{-2.0 + 0.1 * i, -2.0 + 0.1 * j};
      if (!cfg.inside_control(x) || cfg.inside_object(x) || cfg.near_any_curve(x)) continue;
      ++samples;
      shell = std::max(shell, std::abs(sol.pressure->p(x)));
    }
  o.detail << " |F| " << norm(F) << " (limit " << limit << "); shell sup |p| " << shell << " over " << samples
           << " points;";
  o.require(norm(F) <= limit, "force");
  o.require(shell <= 1e-8, "shell pressure");
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (const auto& preset : presets()) {
    const DesignProblem dp(cell(preset.mesh, build_circle(2.0, {0, 0}, 256)), BackgroundField{}, DesignMode::Cloak);
    const DesignResult r = dp.optimize();
    const Certificate cert = dp.certify(r.cost);
    const double e = dp.sampled_error(r.zeta0_opt), e0 = dp.sampled_error(0.0);
    char line[200];
    std::snprintf(line, sizeof line, " %s: err %.3e <= bound %.3e, drop %.1fx;", preset.name, e, cert.bound, e0 / e);
    o.detail << line;
    o.require(e <= cert.bound, std::string(preset.name) + " bound");
    o.require(e0 >= 10.0 * e, std::string(preset.name) + " 10x drop");
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  // Two disk cells r_i = 1, r_e = 2 side by side, each at the single-disk cloak.
  CloakConfig c;
  c.objects = {build_circle(1.0, {-2.5, 0.0}, 256), build_circle(1.0, {2.5, 0.0}, 256)};
  c.controls = {build_circle(2.0, {-2.5, 0.0}, 256), build_circle(2.0, {2.5, 0.0}, 256)};
  const double zeta = annulus_cloak_zeta({1.0, 2.0, 1});
  const BackgroundField bg;
  auto deviation = [&](double z) {
    c.zeta0 = z;
    const auto sol = solve_coupled(c, bg);
    double m = 0.0;
    for (int k = 0; k < 720; ++k) {
      const double t = kTwoPi * k / 720;
      const Vec2 x{6.0 * std::cos(t), 6.0 * std::sin(t)};
      m = std::max(m, std::abs(sol.pressure->p(x) - bg.P(x)));
    }
    return m;
  };
  const double d = deviation(zeta), d0 = deviation(0.0);
  o.detail << " probe circle r=6: sup|p-P| " << d << " at zeta0 " << zeta << " vs " << d0 << " at 0 (" << d0 / d
           << "x);";
  o.require(d0 >= 10.0 * d, "10x reduction");
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::vector<std::pair<std::string, CloakConfig>> geos;
  for (const auto& p : presets()) geos.emplace_back(p.name, cell(p.mesh, build_circle(2.0, {0, 0}, 256)));
  geos.emplace_back("disk", cell(build_circle(1.0, {0, 0}, 256), build_circle(2.0, {0, 0}, 256)));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_fit = 0.0, worst_move = 0.0;
  for (const auto& [name, cfg] : geos)
    for (DesignMode mode : {DesignMode::Cloak, DesignMode::Shield}) {
      const DesignProblem dp(cfg, BackgroundField{}, mode);
      const double z = optimal_zeta(dp.profiles());
      const std::array<double, 5> xs{z - 2.0, z - 0.5, z, z + 1.0, z + 3.0};
      std::array<double, 5> fs{};
      double fmax = 0.0;
      for (int k = 0; k < 5; ++k) fmax = std::max(fmax, fs[k] = dp.cost(xs[k]));
      // Parabola through samples 0, 2, 4 evaluated at 1 and 3.
      auto lagrange = [&](double x) {
        const int idx[3] = {0, 2, 4};
        double s = 0.0;
        for (int a : idx) {
          double l = 1.0;
          for (int b : idx)
            if (a != b) l *= (x - xs[b]) / (xs[a] - xs[b]);
          s += fs[a] * l;
        }
        return s;
      };
      worst_fit = std::max({worst_fit, std::abs(lagrange(xs[1]) - fs[1]) / fmax,
                            std::abs(lagrange(xs[3]) - fs[3]) / fmax});
      std::vector<ControlProfile> pert = dp.profiles();
      for (auto& pr : pert) {
        const double rs = pr.residual.cwiseAbs().maxCoeff(), ss = pr.flux.cwiseAbs().maxCoeff();
        for (Eigen::Index j = 0; j < pr.residual.size(); ++j) {
          pr.residual[j] += 1e-6 * rs * u(rng);
          pr.flux[j] += 1e-6 * ss * u(rng);
        }
      }
      worst_move = std::max(worst_move, std::abs(optimal_zeta(pert) - z) / std::abs(z));
    }
  o.detail << " parabola residual " << worst_fit << " of max cost; zeta* moved " << worst_move << " relative;";
  o.require(worst_fit <= 1e-9, "parabola fit");
  o.require(worst_move <= 1e-4, "stability");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8,
                                                          criterion9, criterion10};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu: %s%s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
