// qrtrig: command-line front end.
//
//   qrtrig constants --dim 2 --samples 100000 --seed 1
//   qrtrig iterate   --point "0,3" --steps 5
//   qrtrig itinerary --point "0.3,0.7" --steps 8
//   qrtrig endpoint  --itinerary it.json --tol 1e-12 --max-depth 80
//   qrtrig hair      --itinerary it.json --depth 3 --tmax 1000 --samples 2000
//   qrtrig boxdim    --points hair.csv --scales 8
//   qrtrig render    --plane 0,1 --window -1,3,-2,2 --res 256x192 --out slice.ppm
//   qrtrig verify    --suite all --seed 0
//
// Exit codes: 0 success, 1 failed suite or computation, 2 usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrtrig/qrtrig.hpp"
#include "qrtrig/verify.hpp"

using namespace qrtrig;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Common {
  int dim = 2;
  std::string lambda = "auto";
  std::uint64_t seed = 0;
  double cap = kDefaultHeightCap;
  int beta_samples = 100000;
  std::string out;
};

void add_common(CLI::App* sub, Common& c, bool with_lambda = true) {
  sub->add_option("--dim", c.dim, "dimension d >= 2")->capture_default_str();
  if (with_lambda)
    sub->add_option("--lambda", c.lambda, "scale factor, or 'auto' for 1.1/beta_hat")
        ->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for every sampled quantity")->capture_default_str();
  sub->add_option("--out", c.out, "output file (default: stdout)");
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (used != cell.size() && cell.find_first_not_of(' ', used) != std::string::npos) throw 0;
    } catch (...) {
      throw UsageError(std::string(what) + ": cannot parse '" + cell + "' as a number");
    }
  }
  return v;
}

/// Resolves lambda ("auto" -> 1.1/beta_hat) and validates expansion.
MapParams resolve_params(const Common& c) {
  if (c.dim < 2) throw UsageError("--dim must be >= 2");
  const double beta = estimate_beta(c.dim, c.beta_samples, c.seed).beta_hat;
  double lambda = 0.0;
  if (c.lambda == "auto") {
    lambda = kLambdaFactor / beta;
  } else {
    const auto v = parse_list(c.lambda, "--lambda");
    if (v.size() != 1) throw UsageError("--lambda: expected one number or 'auto'");
    lambda = v[0];
  }
  try {
    return validate_params(c.dim, lambda, beta);
  } catch (const NotExpanding& e) {
    throw UsageError(e.what());
  }
}

Point parse_point(const std::string& s, int dim) {
  const auto v = parse_list(s, "--point");
  if (static_cast<int>(v.size()) != dim)
    throw UsageError("--point: expected " + std::to_string(dim) + " coordinates, got " +
                     std::to_string(v.size()));
  Point p(dim);
  for (int j = 0; j < dim; ++j) p[j] = v[static_cast<std::size_t>(j)];
  return p;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out, std::ios::binary);
  if (!os) throw Error("cannot open '" + c.out + "' for writing");
  os << text;
}

json meta(const MapParams& p, std::uint64_t seed) {
  return json{{"dim", p.dim}, {"lambda", p.lambda}, {"seed", seed}, {"version", kVersion}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Itinerary read_itinerary(const std::string& path, int dim) {
  try {
    Itinerary it = load_itinerary(path);
    if (it.dim() != dim)
      throw UsageError("itinerary dimension " + std::to_string(it.dim()) + " does not match --dim " +
                       std::to_string(dim));
    return it;
  } catch (const InvalidItinerary& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamics of a quasiregular analog of the trigonometric functions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // constants
  Common c_const;
  int const_samples = 100000;
  auto* constants = app.add_subcommand("constants", "estimate beta, delta, dilatations and M");
  add_common(constants, c_const);
  constants->add_option("--samples", const_samples, "samples per estimate")->capture_default_str();

  // iterate
  Common c_iter;
  std::string iter_point;
  int iter_steps = 10;
  auto* iterate_cmd = app.add_subcommand("iterate", "forward orbit as CSV");
  add_common(iterate_cmd, c_iter);
  iterate_cmd->add_option("--point", iter_point, "comma-separated coordinates")->required();
  iterate_cmd->add_option("--steps", iter_steps)->capture_default_str();
  iterate_cmd->add_option("--cap", c_iter.cap, "escape height cap")->capture_default_str();

  // itinerary
  Common c_itin;
  std::string itin_point;
  int itin_steps = 10;
  auto* itinerary_cmd = app.add_subcommand("itinerary", "tray symbols along an orbit as JSON");
  add_common(itinerary_cmd, c_itin);
  itinerary_cmd->add_option("--point", itin_point)->required();
  itinerary_cmd->add_option("--steps", itin_steps)->capture_default_str();
  itinerary_cmd->add_option("--cap", c_itin.cap)->capture_default_str();

  // endpoint
  Common c_end;
  std::string end_file;
  double end_tol = 1e-12;
  int end_depth = 80;
  auto* endpoint_cmd = app.add_subcommand("endpoint", "endpoint of the hair with an itinerary");
  add_common(endpoint_cmd, c_end);
  endpoint_cmd->add_option("--itinerary", end_file, "itinerary JSON file")->required();
  endpoint_cmd->add_option("--tol", end_tol)->capture_default_str();
  endpoint_cmd->add_option("--max-depth", end_depth)->capture_default_str();

  // hair
  Common c_hair;
  std::string hair_file;
  int hair_depth = 3;
  double hair_tmax = 1e3;
  int hair_samples = 2000;
  auto* hair_cmd = app.add_subcommand("hair", "sampled hair as CSV");
  add_common(hair_cmd, c_hair);
  hair_cmd->add_option("--itinerary", hair_file, "itinerary JSON file")->required();
  hair_cmd->add_option("--depth", hair_depth)->capture_default_str();
  hair_cmd->add_option("--tmax", hair_tmax)->capture_default_str();
  hair_cmd->add_option("--samples", hair_samples)->capture_default_str();

  // boxdim
  Common c_box;
  std::string box_file;
  int box_scales = 8;
  double box_largest = 0.0;
  bool box_polyline = false;
  auto* boxdim_cmd = app.add_subcommand("boxdim", "box-counting dimension of a point CSV");
  boxdim_cmd->add_option("--points", box_file, "CSV of points (hair/orbit CSV accepted)")->required();
  boxdim_cmd->add_option("--scales", box_scales, "number of dyadic scales")->capture_default_str();
  boxdim_cmd->add_option("--largest", box_largest,
                         "largest box side (default: power of two near extent/8)");
  boxdim_cmd->add_flag("--polyline", box_polyline,
                       "join consecutive rows and resample below the finest scale");
  boxdim_cmd->add_option("--out", c_box.out);

  // render
  Common c_ren;
  std::string ren_plane = "0,1", ren_fix, ren_window = "-1,3,-2,2", ren_res = "256x192";
  std::string ren_palette = "hue", ren_csv;
  int ren_iter = 64;
  auto* render_cmd = app.add_subcommand("render", "escape-time image of a coordinate slice");
  add_common(render_cmd, c_ren);
  render_cmd->add_option("--plane", ren_plane, "axes u,v (0-based)")->capture_default_str();
  render_cmd->add_option("--fix", ren_fix, "values of other coordinates, e.g. \"x1=0.5\"");
  render_cmd->add_option("--window", ren_window, "u_min,u_max,v_min,v_max")->capture_default_str();
  render_cmd->add_option("--res", ren_res, "WxH")->capture_default_str();
  render_cmd->add_option("--max-iter", ren_iter)->capture_default_str();
  render_cmd->add_option("--cap", c_ren.cap)->capture_default_str();
  render_cmd->add_option("--palette", ren_palette, "hue or gray")->capture_default_str();
  render_cmd->add_option("--csv", ren_csv, "also write the grid as CSV");

  // verify
  std::string ver_suite = "all";
  std::uint64_t ver_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run the property suites");
  verify_cmd->add_option("--suite", ver_suite, "all, basemap, dynamics, analysis or render")
      ->capture_default_str();
  verify_cmd->add_option("--seed", ver_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*constants) {
      if (const_samples < 1000) throw UsageError("--samples must be >= 1000");
      c_const.beta_samples = const_samples;
      const MapParams p0 = resolve_params(c_const);
      const auto dil = estimate_dilatation(p0.dim, const_samples, c_const.seed);
      const auto del = estimate_delta(p0, const_samples, c_const.seed);
      const double m = calibrate_M(p0, 1000, 6, c_const.seed);
      ConstantsReport r;
      r.info = {p0.dim, p0.lambda, c_const.seed};
      r.samples = const_samples;
      r.beta_hat = p0.beta_hat;
      r.alpha_hat = p0.alpha_hat;
      r.delta_hat = del.delta_hat;
      r.k_hat = dil.k_hat;
      r.k_o_hat = dil.k_o_hat;
      r.k_i_hat = dil.k_i_hat;
      r.m_hat = with_m_hat(p0, m).m_hat;
      emit(c_const, dump(constants_to_json(r)));
    } else if (*iterate_cmd) {
      const MapParams p = resolve_params(c_iter);
      if (iter_steps < 0) throw UsageError("--steps must be >= 0");
      const OrbitRecord orb = iterate(parse_point(iter_point, p.dim), iter_steps, p, c_iter.cap);
      emit(c_iter, orbit_csv(orb, {p.dim, p.lambda, c_iter.seed}));
    } else if (*itinerary_cmd) {
      const MapParams p = resolve_params(c_itin);
      if (itin_steps < 0) throw UsageError("--steps must be >= 0");
      const auto pre = itinerary_of(parse_point(itin_point, p.dim), itin_steps, p, c_itin.cap);
      json j = meta(p, c_itin.seed);
      j["symbols"] = json::array();
      for (const auto& r : pre.symbols) j["symbols"].push_back(tray_to_json(r));
      j["truncated"] = pre.truncated;
      emit(c_itin, dump(j));
    } else if (*endpoint_cmd) {
      const MapParams p = resolve_params(c_end);
      const Itinerary it = read_itinerary(end_file, p.dim);
      const EndpointResult e = endpoint(it, end_tol, end_depth, p);
      json j = meta(p, c_end.seed);
      j["point"] = point_to_json(e.point);
      j["residual"] = e.residual;
      j["depth"] = e.depth;
      emit(c_end, dump(j));
    } else if (*hair_cmd) {
      const MapParams p = resolve_params(c_hair);
      const Itinerary it = read_itinerary(hair_file, p.dim);
      const HairTrace h = hair_trace(it, hair_depth, hair_tmax, hair_samples, p);
      emit(c_hair, hair_csv(h, {p.dim, p.lambda, c_hair.seed}));
    } else if (*boxdim_cmd) {
      std::ifstream is(box_file);
      if (!is) throw UsageError("cannot open points file '" + box_file + "'");
      auto pts = read_points_csv(is);
      if (pts.empty()) throw UsageError("points file '" + box_file + "' has no points");
      double largest = box_largest;
      if (largest <= 0.0) {
        Point lo = pts.front(), hi = pts.front();
        for (const auto& q : pts) {
          lo = lo.cwiseMin(q);
          hi = hi.cwiseMax(q);
        }
        const double extent = (hi - lo).maxCoeff();
        if (!(extent > 0.0)) throw UsageError("points are all identical");
        largest = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(extent / 8.0))));
      }
      const auto scales = dyadic_scales(largest, box_scales);
      if (box_polyline) pts = densify(pts, scales.back() / 4.0);
      emit(c_box, dump(dimension_to_json(box_count(pts, scales))));
    } else if (*render_cmd) {
      const MapParams p = resolve_params(c_ren);
      SliceSpec spec;
      const auto axes = parse_list(ren_plane, "--plane");
      if (axes.size() != 2) throw UsageError("--plane: expected u,v");
      spec.axis_u = static_cast<int>(axes[0]);
      spec.axis_v = static_cast<int>(axes[1]);
      spec.base = Point::Zero(p.dim);
      if (!ren_fix.empty()) {
        std::stringstream ss(ren_fix);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto eq = item.find('=');
          if (item.size() < 3 || item[0] != 'x' || eq == std::string::npos)
            throw UsageError("--fix: expected entries like x2=0.5, got '" + item + "'");
          int j = -1;
          try {
            j = std::stoi(item.substr(1, eq - 1));
          } catch (...) {
          }
          if (j < 0 || j >= p.dim) throw UsageError("--fix: bad coordinate index in '" + item + "'");
          spec.base[j] = parse_list(item.substr(eq + 1), "--fix").at(0);
        }
      }
      const auto w = parse_list(ren_window, "--window");
      if (w.size() != 4) throw UsageError("--window: expected u_min,u_max,v_min,v_max");
      spec.window = {w[0], w[1], w[2], w[3]};
      const auto x = ren_res.find('x');
      if (x == std::string::npos) throw UsageError("--res: expected WxH");
      try {
        spec.width = std::stoi(ren_res.substr(0, x));
        spec.height = std::stoi(ren_res.substr(x + 1));
      } catch (...) {
        throw UsageError("--res: expected WxH, got '" + ren_res + "'");
      }
      if (c_ren.out.empty()) throw UsageError("render: --out <path.ppm> is required");
      Palette pal;
      try {
        spec.validate();
        pal = palette_from_name(ren_palette);
        if (ren_iter < 1) throw DomainError("--max-iter must be >= 1");
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      const ImageGrid g = render_slice(spec, p, ren_iter, c_ren.cap);
      write_ppm(g, pal, c_ren.out);
      json side = meta(p, c_ren.seed);
      side["plane"] = {spec.axis_u, spec.axis_v};
      side["base"] = point_to_json(spec.base);
      side["window"] = w;
      side["resolution"] = {spec.width, spec.height};
      side["max_iter"] = ren_iter;
      side["height_cap"] = c_ren.cap;
      side["palette"] = ren_palette;
      side["sha256"] = sha256_hex(ppm_bytes(g, pal));
      std::ofstream(c_ren.out + ".json") << dump(side);
      if (!ren_csv.empty()) {
        std::ofstream os(ren_csv);
        if (!os) throw Error("cannot open '" + ren_csv + "' for writing");
        os << grid_csv(g, spec, {p.dim, p.lambda, c_ren.seed}, ren_iter);
      }
    } else if (*verify_cmd) {
      std::vector<Check> checks;
      try {
        checks = run_suite(ver_suite, ver_seed);
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
      int failed = 0;
      for (const auto& c : checks) {
        std::cout << format_check(c) << "\n";
        failed += !c.pass;
      }
      std::cout << (failed ? "FAILED " : "passed ") << checks.size() - failed << "/"
                << checks.size() << "\n";
      return failed ? 1 : 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "qrtrig: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qrtrig: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
