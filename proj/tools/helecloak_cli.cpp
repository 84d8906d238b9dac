// helecloak command-line driver. Links only the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "helecloak/helecloak.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDegenerate = 4;

constexpr int kDefaultNodes = 256;
constexpr int kDefaultGrid = 81;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void user_error(const std::string& msg) { throw CliError{kExitUser, msg}; }

void check(hc_status st) {
  if (st == HC_OK) return;
  int code = kExitNumerical;
  switch (st) {
    case HC_ERR_INVALID_ARGUMENT:
    case HC_ERR_NEAR_FIELD:
    case HC_ERR_IO: code = kExitUser; break;
    case HC_ERR_DEGENERATE: code = kExitDegenerate; break;
    default: code = kExitNumerical; break;
  }
  throw CliError{code, std::string(hc_status_string(st)) + ": " + hc_last_error()};
}

using MeshHandle = std::unique_ptr<hc_mesh, decltype(&hc_mesh_free)>;
using ConfigHandle = std::unique_ptr<hc_config, decltype(&hc_config_free)>;
using SolutionHandle = std::unique_ptr<hc_solution, decltype(&hc_solution_free)>;
using DesignHandle = std::unique_ptr<hc_design, decltype(&hc_design_free)>;

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- config resolution -----------------------------------------------------

const json& require_key(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) user_error(where + ": missing '" + key + "'");
  return obj.at(key);
}

double get_number(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    user_error(where + ": missing '" + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) user_error(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where, std::optional<int> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    user_error(where + ": missing '" + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) user_error(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       std::optional<std::string> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    user_error(where + ": missing '" + key + "'");
  }
  const json& v = obj.at(key);
  if (!v.is_string()) user_error(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& where, std::size_t expected = 0) {
  if (!v.is_array()) user_error(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) user_error(where + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  if (expected && out.size() != expected) user_error(where + " must have " + std::to_string(expected) + " entries");
  return out;
}

std::vector<std::pair<double, double>> read_points_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) user_error("cannot read point-list file '" + path.string() + "'");
  std::vector<std::pair<double, double>> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (lineno == 1) continue;  // header row
      user_error(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    pts.emplace_back(a, b);
  }
  return pts;
}

// Fills defaults for one shape entry; returns the canonical form.
json resolve_shape(const json& in, const std::string& where, const fs::path& base) {
  if (!in.is_object()) user_error(where + " must be an object");
  json out = json::object();
  const std::string shape = get_string(in, "shape", where);
  out["shape"] = shape;
  const auto center = in.contains("center") ? get_numbers(in.at("center"), where + ".center", 2)
                                            : std::vector<double>{0.0, 0.0};
  out["center"] = center;
  out["rotation"] = get_number(in, "rotation", where, 0.0);
  out["scale"] = get_number(in, "scale", where, 1.0);
  if (shape == "circle") {
    out["radius"] = get_number(in, "radius", where);
  } else if (shape == "ellipse") {
    if (in.contains("semi_axes")) {
      out["semi_axes"] = get_numbers(in.at("semi_axes"), where + ".semi_axes", 2);
    } else {
      out["focal"] = get_number(in, "focal", where, 1.0);
      out["xi"] = get_number(in, "xi", where);
    }
  } else if (shape == "flower" || shape == "kite" || shape == "peanut") {
  } else if (shape == "polar") {
    out["cos"] = get_numbers(require_key(in, "cos", where), where + ".cos");
    out["sin"] = in.contains("sin") ? json(get_numbers(in.at("sin"), where + ".sin")) : json::array();
  } else if (shape == "polygon") {
    if (in.contains("vertices")) {
      json verts = json::array();
      for (const json& v : in.at("vertices")) verts.push_back(get_numbers(v, where + ".vertices[]", 2));
      out["vertices"] = verts;
    } else {
      out["sides"] = get_int(in, "sides", where);
      out["circumradius"] = get_number(in, "circumradius", where, 1.0);
      out["vertex_angle"] = get_number(in, "vertex_angle", where, M_PI / 2);
    }
    out["rounding"] = in.contains("rounding") ? json(get_number(in, "rounding", where)) : json(nullptr);
  } else if (shape == "points") {
    fs::path file = get_string(in, "file", where);
    if (file.is_relative()) file = base / file;
    std::error_code ec;
    const fs::path abs = fs::weakly_canonical(file, ec);
    out["file"] = (ec ? file : abs).string();
  } else {
    user_error(where + ": unknown shape '" + shape +
               "' (expected circle, ellipse, flower, kite, peanut, polar, polygon or points)");
  }
  return out;
}

struct Overrides {
  std::optional<int> nodes;
  std::optional<std::string> out_dir;
  std::optional<std::vector<int>> grid;
  std::optional<std::vector<double>> window;
};

json resolve_physical(const json& in) {
  hc_physical d;
  hc_physical_defaults(&d);
  json out;
  const json src = in.is_null() ? json::object() : in;
  if (!src.is_object()) user_error("physical must be an object");
  out["gap"] = get_number(src, "gap", "physical", d.gap);
  out["length"] = get_number(src, "length", "physical", d.length);
  out["width"] = get_number(src, "width", "physical", d.width);
  out["density"] = get_number(src, "density", "physical", d.density);
  out["viscosity"] = get_number(src, "viscosity", "physical", d.viscosity);
  out["permittivity"] = get_number(src, "permittivity", "physical", d.permittivity);
  out["field"] = get_number(src, "field", "physical", d.field);
  out["velocity"] = get_number(src, "velocity", "physical", d.velocity);
  return out;
}

hc_physical to_physical(const json& p) {
  return hc_physical{p.at("gap").get<double>(),       p.at("length").get<double>(),
                     p.at("width").get<double>(),     p.at("density").get<double>(),
                     p.at("viscosity").get<double>(), p.at("permittivity").get<double>(),
                     p.at("field").get<double>(),     p.at("velocity").get<double>()};
}

json resolve_config(const json& raw, const Overrides& ov, const fs::path& base) {
  if (!raw.is_object()) user_error("config must be a JSON object");
  json cfg;

  const json& g = require_key(raw, "geometry", "config");
  json geom;
  geom["nodes"] = ov.nodes ? *ov.nodes : get_int(g, "nodes", "geometry", kDefaultNodes);
  const json& objs = require_key(g, "objects", "geometry");
  if (!objs.is_array() || objs.empty()) user_error("geometry.objects must be a non-empty array");
  geom["objects"] = json::array();
  for (std::size_t k = 0; k < objs.size(); ++k)
    geom["objects"].push_back(resolve_shape(objs[k], "geometry.objects[" + std::to_string(k) + "]", base));
  if (g.contains("control") == g.contains("controls"))
    user_error("geometry needs exactly one of 'control' or 'controls'");
  geom["controls"] = json::array();
  if (g.contains("control")) {
    geom["controls"].push_back(resolve_shape(g.at("control"), "geometry.control", base));
  } else {
    const json& cs = g.at("controls");
    if (!cs.is_array() || cs.empty()) user_error("geometry.controls must be a non-empty array");
    for (std::size_t k = 0; k < cs.size(); ++k)
      geom["controls"].push_back(resolve_shape(cs[k], "geometry.controls[" + std::to_string(k) + "]", base));
  }
  cfg["geometry"] = geom;

  const json b = raw.contains("background") ? raw.at("background") : json::object();
  json bg;
  bg["frame"] = get_string(b, "frame", "background", "polar");
  if (bg["frame"] != "polar" && bg["frame"] != "elliptic") user_error("background.frame must be polar or elliptic");
  bg["focal"] = get_number(b, "focal", "background", 1.0);
  bg["n"] = get_int(b, "n", "background", 1);
  bg["parity"] = get_string(b, "parity", "background", "cos");
  if (bg["parity"] != "cos" && bg["parity"] != "sin") user_error("background.parity must be cos or sin");
  const double ah = get_number(b, "amplitude_h", "background", 1.0);
  bg["amplitude_h"] = ah;
  bg["amplitude_p"] = get_number(b, "amplitude_p", "background", 12.0 * ah);
  cfg["background"] = bg;

  const json& z = require_key(raw, "zeta", "config");
  if (!z.is_object()) user_error("zeta must be an object");
  const int sources = int(z.contains("value")) + int(z.contains("analytic")) + int(z.contains("optimize"));
  if (sources != 1) user_error("zeta needs exactly one of 'value', 'analytic' or 'optimize'");
  json zeta;
  if (z.contains("value")) {
    zeta["value"] = get_number(z, "value", "zeta");
  } else {
    const char* key = z.contains("analytic") ? "analytic" : "optimize";
    const std::string mode = get_string(z, key, "zeta");
    if (mode != "cloak" && mode != "shield") user_error(std::string("zeta.") + key + " must be cloak or shield");
    zeta[key] = mode;
    if (z.contains("optimize")) {
      const auto iv = z.contains("interval") ? get_numbers(z.at("interval"), "zeta.interval", 2)
                                             : std::vector<double>{-100.0, 100.0};
      zeta["interval"] = iv;
    }
  }
  cfg["zeta"] = zeta;

  cfg["physical"] = resolve_physical(raw.contains("physical") ? raw.at("physical") : json());

  const json o = raw.contains("output") ? raw.at("output") : json::object();
  json out;
  out["dir"] = ov.out_dir ? *ov.out_dir : get_string(o, "dir", "output", "out");
  if (ov.window) {
    out["window"] = *ov.window;
  } else if (o.contains("window")) {
    out["window"] = get_numbers(o.at("window"), "output.window", 4);
  } else {
    out["window"] = nullptr;
  }
  if (ov.grid) {
    out["grid"] = *ov.grid;
  } else if (o.contains("grid")) {
    const auto gr = get_numbers(o.at("grid"), "output.grid", 2);
    out["grid"] = {static_cast<int>(gr[0]), static_cast<int>(gr[1])};
  } else {
    out["grid"] = {kDefaultGrid, kDefaultGrid};
  }
  cfg["output"] = out;
  return cfg;
}

// ---- construction through the C API ----------------------------------------

MeshHandle build_shape(const json& s, int nodes) {
  hc_mesh* m = nullptr;
  const auto c = s.at("center").get<std::vector<double>>();
  const hc_placement pl{c[0], c[1], s.at("rotation").get<double>(), s.at("scale").get<double>()};
  const std::string shape = s.at("shape");
  if (shape == "circle") {
    const double r = s.at("radius").get<double>() * pl.scale;
    hc_placement rotated = pl;
    rotated.scale = 1.0;
    if (!(r > 0.0)) user_error("circle radius must be positive");
    check(hc_mesh_ellipse(r, r, nodes, &rotated, &m));
  } else if (shape == "ellipse") {
    if (s.contains("semi_axes")) {
      const auto ax = s.at("semi_axes").get<std::vector<double>>();
      check(hc_mesh_ellipse(ax[0], ax[1], nodes, &pl, &m));
    } else {
      check(hc_mesh_confocal_ellipse(s.at("focal").get<double>(), s.at("xi").get<double>(), nodes, &pl, &m));
    }
  } else if (shape == "flower") {
    check(hc_mesh_flower(nodes, &pl, &m));
  } else if (shape == "kite") {
    check(hc_mesh_kite(nodes, &pl, &m));
  } else if (shape == "peanut") {
    check(hc_mesh_peanut(nodes, &pl, &m));
  } else if (shape == "polar") {
    const auto a = s.at("cos").get<std::vector<double>>();
    const auto b = s.at("sin").get<std::vector<double>>();
    check(hc_mesh_polar(a.data(), a.size(), b.data(), b.size(), nodes, &pl, &m));
  } else if (shape == "polygon") {
    const double rounding = s.at("rounding").is_null() ? -1.0 : s.at("rounding").get<double>();
    if (s.contains("vertices")) {
      std::vector<hc_point> v;
      for (const auto& p : s.at("vertices")) v.push_back({p[0].get<double>(), p[1].get<double>()});
      check(hc_mesh_rounded_polygon(v.data(), v.size(), rounding, nodes, &pl, &m));
    } else {
      check(hc_mesh_regular_polygon(s.at("sides").get<int>(), s.at("circumradius").get<double>(),
                                    s.at("vertex_angle").get<double>(), rounding, nodes, &pl, &m));
    }
  } else if (shape == "points") {
    const auto pts = read_points_csv(s.at("file").get<std::string>());
    std::vector<hc_point> v;
    for (const auto& [a, b] : pts) v.push_back({a, b});
    check(hc_mesh_points(v.data(), v.size(), nodes, &pl, &m));
  }
  return MeshHandle(m, hc_mesh_free);
}

ConfigHandle build_config(const json& cfg) {
  hc_config* c = nullptr;
  check(hc_config_create(&c));
  ConfigHandle handle(c, hc_config_free);
  const int nodes = cfg.at("geometry").at("nodes").get<int>();
  for (const auto& s : cfg.at("geometry").at("objects")) check(hc_config_add_object(c, build_shape(s, nodes).get()));
  for (const auto& s : cfg.at("geometry").at("controls")) check(hc_config_add_control(c, build_shape(s, nodes).get()));
  check(hc_config_validate(c));
  return handle;
}

hc_background build_background(const json& cfg) {
  const json& b = cfg.at("background");
  hc_background bg;
  hc_background_default(&bg);
  bg.frame = b.at("frame") == "polar" ? HC_FRAME_POLAR : HC_FRAME_ELLIPTIC;
  bg.focal = b.at("focal").get<double>();
  bg.n = b.at("n").get<int>();
  bg.parity = b.at("parity") == "cos" ? HC_PARITY_COS : HC_PARITY_SIN;
  bg.amplitude_h = b.at("amplitude_h").get<double>();
  bg.amplitude_p = b.at("amplitude_p").get<double>();
  return bg;
}

bool at_origin_unrotated(const json& s) {
  const auto c = s.at("center").get<std::vector<double>>();
  return c[0] == 0.0 && c[1] == 0.0 && s.at("rotation").get<double>() == 0.0;
}

// Closed-form zeta for concentric disks or confocal ellipses centred on the
// background origin.
double analytic_zeta(const json& cfg) {
  const json& g = cfg.at("geometry");
  const std::string mode_name = cfg.at("zeta").at("analytic");
  const hc_mode mode = mode_name == "cloak" ? HC_MODE_CLOAK : HC_MODE_SHIELD;
  const std::string hint = "the closed form needs one circle in a concentric circle (polar background) or "
                           "one confocal ellipse in another (elliptic background) centred at the origin; use "
                           "zeta.optimize for other geometry";
  if (g.at("objects").size() != 1 || g.at("controls").size() != 1) user_error(hint);
  const json& o = g.at("objects")[0];
  const json& c = g.at("controls")[0];
  if (!at_origin_unrotated(o) || !at_origin_unrotated(c)) user_error(hint);
  const hc_background bg = build_background(cfg);
  double zeta = 0.0;
  if (o.at("shape") == "circle" && c.at("shape") == "circle" && bg.frame == HC_FRAME_POLAR) {
    check(hc_annulus_zeta(o.at("radius").get<double>() * o.at("scale").get<double>(),
                          c.at("radius").get<double>() * c.at("scale").get<double>(), bg.n, mode, &zeta));
  } else if (o.at("shape") == "ellipse" && c.at("shape") == "ellipse" && o.contains("xi") && c.contains("xi") &&
             bg.frame == HC_FRAME_ELLIPTIC && o.at("scale") == 1.0 && c.at("scale") == 1.0 &&
             o.at("focal") == c.at("focal") && o.at("focal").get<double>() == bg.focal) {
    check(hc_ellipse_zeta(o.at("xi").get<double>(), c.at("xi").get<double>(), bg.focal, bg.n, bg.parity, mode,
                          &zeta));
  } else {
    user_error(hint);
  }
  // Conditions are linear in P / (12 H).
  if (bg.amplitude_h == 0.0) throw CliError{kExitDegenerate, "amplitude_h = 0: zeta0 has no effect"};
  return zeta * bg.amplitude_p / (12.0 * bg.amplitude_h);
}

hc_window resolve_window(const json& cfg, const hc_config* config) {
  (void)config;
  const json& w = cfg.at("output").at("window");
  if (!w.is_null()) {
    const auto v = w.get<std::vector<double>>();
    return hc_window{v[0], v[1], v[2], v[3]};
  }
  // Default: twice the bounding box of the control curves.
  double x1a = 1e300, x1b = -1e300, x2a = 1e300, x2b = -1e300;
  const int nodes = cfg.at("geometry").at("nodes").get<int>();
  for (const auto& s : cfg.at("geometry").at("controls")) {
    MeshHandle m = build_shape(s, nodes);
    std::vector<hc_point> pts(static_cast<std::size_t>(hc_mesh_size(m.get())));
    check(hc_mesh_nodes(m.get(), pts.data()));
    for (const auto& p : pts) {
      x1a = std::min(x1a, p.x1);
      x1b = std::max(x1b, p.x1);
      x2a = std::min(x2a, p.x2);
      x2b = std::max(x2b, p.x2);
    }
  }
  const double c1 = 0.5 * (x1a + x1b), c2 = 0.5 * (x2a + x2b);
  const double h = std::max(x1b - x1a, x2b - x2a);
  return hc_window{c1 - h, c1 + h, c2 - h, c2 + h};
}

// ---- outputs ---------------------------------------------------------------

fs::path prepare_out_dir(const json& cfg) {
  const fs::path dir = cfg.at("output").at("dir").get<std::string>();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) user_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) user_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) user_error("failed writing '" + path.string() + "'");
}

std::vector<int> mesh_sizes(const json& cfg) {
  const int n = cfg.at("geometry").at("nodes").get<int>();
  std::vector<int> sizes;
  for (std::size_t k = 0; k < cfg.at("geometry").at("objects").size() + cfg.at("geometry").at("controls").size(); ++k)
    sizes.push_back(n);
  return sizes;
}

void write_manifest(const fs::path& dir, const json& cfg, const std::string& command, double zeta0) {
  json m = cfg;
  m["run"] = {{"command", command},
              {"version", hc_version()},
              {"mesh_sizes", mesh_sizes(cfg)},
              {"zeta0", zeta0},
              {"geometry_digest", fnv1a64(cfg.at("geometry").dump())}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void write_fields(const fs::path& dir, const json& cfg, const hc_config* config, const hc_background& bg,
                  double zeta0, std::size_t& rows) {
  hc_solution* s = nullptr;
  check(hc_solve(config, &bg, zeta0, &s));
  SolutionHandle sol(s, hc_solution_free);
  const hc_window w = resolve_window(cfg, config);
  const auto grid = cfg.at("output").at("grid").get<std::vector<int>>();
  check(hc_solution_write_csv(sol.get(), &w, grid[0], grid[1], (dir / "fields.csv").string().c_str()));
  rows = static_cast<std::size_t>(grid[0]) * static_cast<std::size_t>(grid[1]);
}

std::string volts_string(double v) { return format_double("%.4f", v); }

// ---- commands --------------------------------------------------------------

struct Common {
  std::string config_path;
  std::optional<int> nodes;
  std::optional<std::string> out_dir;
  std::string grid;
  std::string window;
};

std::vector<int> parse_grid(const std::string& s) {
  std::string t = s;
  const std::string times = "\xC3\x97";  // U+00D7
  for (std::size_t pos; (pos = t.find(times)) != std::string::npos;) t.replace(pos, times.size(), "x");
  std::replace(t.begin(), t.end(), 'X', 'x');
  const auto x = t.find('x');
  if (x == std::string::npos) user_error("--grid expects WxH, got '" + s + "'");
  try {
    std::size_t a = 0, b = 0;
    const int w = std::stoi(t.substr(0, x), &a), h = std::stoi(t.substr(x + 1), &b);
    if (a != x || b != t.size() - x - 1 || w < 1 || h < 1) throw std::invalid_argument("grid");
    return {w, h};
  } catch (const std::exception&) {
    user_error("--grid expects WxH with positive integers, got '" + s + "'");
  }
}

std::vector<double> parse_window(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("window");
    } catch (const std::exception&) {
      user_error("--window expects x1min,x1max,x2min,x2max, got '" + s + "'");
    }
  }
  if (v.size() != 4) user_error("--window expects four comma-separated numbers");
  return v;
}

json load_config(const Common& c) {
  if (c.config_path.empty()) user_error("--config is required");
  std::ifstream in(c.config_path);
  if (!in) user_error("cannot open config file '" + c.config_path + "'");
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    user_error("config parse error in '" + c.config_path + "': " + e.what());
  }
  Overrides ov;
  ov.nodes = c.nodes;
  ov.out_dir = c.out_dir;
  if (!c.grid.empty()) ov.grid = parse_grid(c.grid);
  if (!c.window.empty()) ov.window = parse_window(c.window);
  const fs::path base = fs::path(c.config_path).parent_path();
  try {
    return resolve_config(raw, ov, base.empty() ? fs::path(".") : base);
  } catch (const json::exception& e) {
    user_error(std::string("invalid config: ") + e.what());
  }
}

struct DesignOutcome {
  hc_design_result result;
  std::vector<std::string> warnings;
};

DesignOutcome run_design(const hc_config* config, const hc_background& bg, const std::string& mode_name,
                         const std::vector<double>& interval) {
  hc_design* d = nullptr;
  check(hc_design_create(config, &bg, mode_name == "cloak" ? HC_MODE_CLOAK : HC_MODE_SHIELD, &d));
  DesignHandle design(d, hc_design_free);
  DesignOutcome out{};
  check(hc_design_optimize(design.get(), interval[0], interval[1], &out.result));
  for (int k = 0; k < hc_design_warning_count(design.get()); ++k) out.warnings.push_back(hc_design_warning(design.get(), k));
  return out;
}

// Resolves zeta0 from the config's zeta block, running the optimizer when asked.
double resolve_zeta(const json& cfg, const hc_config* config, const hc_background& bg,
                    std::optional<DesignOutcome>* design = nullptr) {
  const json& z = cfg.at("zeta");
  if (z.contains("value")) return z.at("value").get<double>();
  if (z.contains("analytic")) return analytic_zeta(cfg);
  DesignOutcome d = run_design(config, bg, z.at("optimize"), z.at("interval").get<std::vector<double>>());
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
  const double zeta = d.result.zeta0_opt;
  if (design) *design = std::move(d);
  return zeta;
}

int cmd_solve(const Common& c) {
  const json cfg = load_config(c);
  ConfigHandle config = build_config(cfg);
  const hc_background bg = build_background(cfg);
  const double zeta = resolve_zeta(cfg, config.get(), bg);
  const fs::path dir = prepare_out_dir(cfg);
  std::size_t rows = 0;
  write_fields(dir, cfg, config.get(), bg, zeta, rows);
  write_manifest(dir, cfg, "solve", zeta);
  hc_physical phys = to_physical(cfg.at("physical"));
  double volts = 0.0;
  check(hc_dimensionalize(&phys, zeta, &volts));
  std::cout << "zeta0 " << format_double("%.15g", zeta) << "\n";
  std::cout << "voltage " << volts_string(volts) << " V\n";
  std::cout << "wrote " << (dir / "fields.csv").string() << " (" << rows << " rows)\n";
  return kExitOk;
}

int cmd_optimize(const Common& c) {
  const json cfg = load_config(c);
  if (!cfg.at("zeta").contains("optimize")) user_error("optimize needs a zeta block of the form {\"optimize\": ...}");
  ConfigHandle config = build_config(cfg);
  const hc_background bg = build_background(cfg);
  std::optional<DesignOutcome> design;
  const double zeta = resolve_zeta(cfg, config.get(), bg, &design);
  const hc_design_result& r = design->result;
  hc_physical phys = to_physical(cfg.at("physical"));
  double volts = 0.0;
  check(hc_dimensionalize(&phys, zeta, &volts));

  json out;
  out["mode"] = cfg.at("zeta").at("optimize");
  out["zeta0_opt"] = r.zeta0_opt;
  out["zeta0_volts"] = volts;
  out["unconstrained"] = r.unconstrained;
  out["clipped"] = r.clipped != 0;
  out["golden_section"] = r.golden_section;
  out["cost"] = r.cost;
  out["sqrt_cost"] = r.sqrt_cost;
  out["constant"] = r.constant;
  out["bound"] = r.bound;
  out["probes"] = r.probes;
  out["interval"] = {r.interval_min, r.interval_max};
  out["geometry_digest"] = fnv1a64(cfg.at("geometry").dump());
  out["params_digest"] = fnv1a64(json{{"background", cfg.at("background")}, {"physical", cfg.at("physical")}}.dump());
  out["warnings"] = design->warnings;

  const fs::path dir = prepare_out_dir(cfg);
  write_text(dir / "design.json", out.dump(2) + "\n");
  std::size_t rows = 0;
  if (!cfg.at("output").at("window").is_null()) write_fields(dir, cfg, config.get(), bg, zeta, rows);
  write_manifest(dir, cfg, "optimize", zeta);

  std::cout << "zeta0_opt " << format_double("%.15g", zeta) << "\n";
  std::cout << "voltage " << volts_string(volts) << " V\n";
  std::cout << "cost " << format_double("%.6e", r.cost) << "\n";
  std::cout << "bound " << format_double("%.6e", r.bound) << " (C = " << format_double("%.6g", r.constant)
            << ", sqrt(cost) = " << format_double("%.6e", r.sqrt_cost) << ")\n";
  if (r.clipped) std::cout << "note: minimizer clipped to the interval\n";
  std::cout << "wrote " << (dir / "design.json").string() << "\n";
  return kExitOk;
}

int cmd_force(const Common& c) {
  const json cfg = load_config(c);
  ConfigHandle config = build_config(cfg);
  const hc_background bg = build_background(cfg);
  const double zeta = resolve_zeta(cfg, config.get(), bg);
  hc_solution* s = nullptr;
  check(hc_solve(config.get(), &bg, zeta, &s));
  SolutionHandle sol(s, hc_solution_free);
  std::cout << "zeta0 " << format_double("%.15g", zeta) << "\n";
  for (int k = 0; k < hc_config_object_count(config.get()); ++k) {
    double f1 = 0.0, f2 = 0.0;
    check(hc_solution_force(sol.get(), k, &f1, &f2));
    std::cout << "object " << k << " force " << format_double("%.17g", f1) << " " << format_double("%.17g", f2)
              << "\n";
  }
  return kExitOk;
}

struct PhysicalFlags {
  std::optional<double> gap, length, width, density, viscosity, permittivity, field, velocity;

  void add(CLI::App* app) {
    app->add_option("--gap", gap, "Cell gap (m)");
    app->add_option("--length", length, "Cell length (m)");
    app->add_option("--width", width, "Cell width (m)");
    app->add_option("--density", density, "Fluid density (kg/m^3)");
    app->add_option("--viscosity", viscosity, "Dynamic viscosity (Pa s)");
    app->add_option("--permittivity", permittivity, "Permittivity (F/m)");
    app->add_option("--field", field, "Applied field (V/m)");
    app->add_option("--velocity", velocity, "External velocity (m/s)");
  }

  hc_physical resolve() const {
    hc_physical p;
    hc_physical_defaults(&p);
    if (gap) p.gap = *gap;
    if (length) p.length = *length;
    if (width) p.width = *width;
    if (density) p.density = *density;
    if (viscosity) p.viscosity = *viscosity;
    if (permittivity) p.permittivity = *permittivity;
    if (field) p.field = *field;
    if (velocity) p.velocity = *velocity;
    return p;
  }
};

struct AnalyticArgs {
  std::string shape = "annulus";
  std::string mode = "cloak";
  double ri = 1.0, re = 2.0, xi_i = 0.5, xi_e = 1.0, focal = 1.0;
  int n = 1;
  std::string parity = "cos";
};

hc_parity parse_parity(const std::string& s) {
  if (s == "cos" || s == "x") return HC_PARITY_COS;
  if (s == "sin" || s == "y") return HC_PARITY_SIN;
  user_error("--parity must be cos (x) or sin (y)");
}

int cmd_analytic(const AnalyticArgs& a, const PhysicalFlags& pf) {
  if (a.mode != "cloak" && a.mode != "shield") user_error("--mode must be cloak or shield");
  const hc_mode mode = a.mode == "cloak" ? HC_MODE_CLOAK : HC_MODE_SHIELD;
  double zeta = 0.0;
  if (a.shape == "annulus") {
    check(hc_annulus_zeta(a.ri, a.re, a.n, mode, &zeta));
  } else if (a.shape == "confocal-ellipse") {
    check(hc_ellipse_zeta(a.xi_i, a.xi_e, a.focal, a.n, parse_parity(a.parity), mode, &zeta));
  } else {
    user_error("no closed form for shape '" + a.shape +
               "' (analytic supports annulus and confocal-ellipse); use `optimize` with a config file");
  }
  const hc_physical phys = pf.resolve();
  double volts = 0.0;
  check(hc_dimensionalize(&phys, zeta, &volts));
  std::cout << "zeta0 " << format_double("%.15g", zeta) << "\n";
  std::cout << "voltage " << volts_string(volts) << " V\n";
  return kExitOk;
}

int cmd_convert(std::optional<double> zeta, std::optional<double> volts, const PhysicalFlags& pf) {
  if (zeta.has_value() == volts.has_value()) user_error("convert needs exactly one of --zeta or --volts");
  const hc_physical phys = pf.resolve();
  if (zeta) {
    double v = 0.0;
    check(hc_dimensionalize(&phys, *zeta, &v));
    std::cout << "voltage " << format_double("%.17g", v) << " V\n";
  } else {
    double z = 0.0;
    check(hc_nondimensionalize(&phys, *volts, &z));
    std::cout << "zeta0 " << format_double("%.17g", z) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-integral design of electro-osmotic hydrodynamic cloaks and shields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hc_version()));

  Common common;
  auto add_common = [&](CLI::App* sub, bool fields) {
    sub->add_option("--config", common.config_path, "Run configuration (JSON)")->required();
    sub->add_option("--nodes", common.nodes, "Nodes per curve (even)");
    sub->add_option("--out", common.out_dir, "Output directory");
    if (fields) {
      sub->add_option("--grid", common.grid, "Field grid resolution WxH");
      sub->add_option("--window", common.window, "Field window x1min,x1max,x2min,x2max");
    }
  };

  AnalyticArgs an;
  PhysicalFlags an_phys, cv_phys;
  auto* analytic = app.add_subcommand("analytic", "Closed-form zeta0 for concentric disks or confocal ellipses");
  analytic->add_option("--shape", an.shape, "annulus | confocal-ellipse")->capture_default_str();
  analytic->add_option("--mode", an.mode, "cloak | shield")->capture_default_str();
  analytic->add_option("--ri", an.ri, "Object radius")->capture_default_str();
  analytic->add_option("--re", an.re, "Control radius")->capture_default_str();
  analytic->add_option("--xi-i", an.xi_i, "Object elliptic radius")->capture_default_str();
  analytic->add_option("--xi-e", an.xi_e, "Control elliptic radius")->capture_default_str();
  analytic->add_option("--focal", an.focal, "Focal half-distance")->capture_default_str();
  analytic->add_option("--n", an.n, "Background mode")->capture_default_str();
  analytic->add_option("--parity", an.parity, "cos (x-mode) | sin (y-mode)")->capture_default_str();
  an_phys.add(analytic);

  auto* solve = app.add_subcommand("solve", "Solve the coupled problem and export fields");
  add_common(solve, true);
  auto* optimize = app.add_subcommand("optimize", "Optimal zeta0 by the least-squares design functional");
  add_common(optimize, true);
  auto* force = app.add_subcommand("force", "Hydrodynamic force on each object");
  add_common(force, false);

  std::optional<double> cv_zeta, cv_volts;
  auto* convert = app.add_subcommand("convert", "Convert between dimensionless zeta0 and volts");
  convert->add_option("--zeta", cv_zeta, "Dimensionless zeta0");
  convert->add_option("--volts", cv_volts, "Zeta potential in volts");
  cv_phys.add(convert);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUser;
  }

  try {
    if (*analytic) return cmd_analytic(an, an_phys);
    if (*solve) return cmd_solve(common);
    if (*optimize) return cmd_optimize(common);
    if (*force) return cmd_force(common);
    if (*convert) return cmd_convert(cv_zeta, cv_volts, cv_phys);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUser;
}
