#include "atlas/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

namespace atlas {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json vec_json(Vec2 p) { return ordered_json::array({p.x, p.y}); }

Vec2 vec_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2)
    fail(Error::Kind::Io, "expected a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

ordered_json points_json(const std::vector<Vec2>& pts) {
  ordered_json arr = ordered_json::array();
  for (const Vec2& p : pts) arr.push_back(vec_json(p));
  return arr;
}

std::vector<Vec2> points_from(const ordered_json& j) {
  std::vector<Vec2> out;
  for (const auto& e : j) out.push_back(vec_from(e));
  return out;
}

void require_keys(const ordered_json& j, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
  if (!j.is_object()) fail(Error::Kind::Io, where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(Error::Kind::Io, where + ": unknown field '" + k + "'");
  for (const std::string& k : required)
    if (!j.contains(k)) fail(Error::Kind::Io, where + ": missing field '" + k + "'");
}

// Even path thinning for reports; end points always kept.
std::vector<std::pair<double, Vec2>> thin_path(const std::vector<std::pair<double, Vec2>>& pts,
                                               std::size_t max_n = 160) {
  if (pts.size() <= max_n) return pts;
  std::vector<std::pair<double, Vec2>> out;
  double stride = static_cast<double>(pts.size() - 1) / (max_n - 1);
  for (std::size_t i = 0; i < max_n; ++i)
    out.push_back(pts[static_cast<std::size_t>(std::llround(i * stride))]);
  return out;
}

}  // namespace

PlaneMap map_from_config(const PipelineConfig& config) {
  if (config.builtin && config.expr)
    fail(Error::Kind::Precondition, "give either a builtin tag or an expression, not both");
  if (config.builtin) return PlaneMap::builtin(*config.builtin);
  if (config.expr) return PlaneMap::parse(*config.expr, config.mode);
  fail(Error::Kind::Precondition, "no map specified");
}

Rect default_window(const PlaneMap& map) {
  if (map.name() == "F1") return {-2, -2, 2, 2};
  if (map.name() == "F3") return {-8, -8, 8, 8};
  return {-3, -3, 3, 3};
}

int default_grid(const PlaneMap& map) { return map.name() == "F3" ? 96 : 64; }

double default_step(const Rect& window) { return window.max_dim() / 300.0; }

BaseSpec resolve_base(const PlaneMap& map, Vec2 q_target, const PipelineConfig& config) {
  if (config.seed_base) {
    if (config.base_preimages.empty())
      fail(Error::Kind::Precondition, "--seed-base needs --base-preimages");
    BaseSpec b;
    b.q_alpha = *config.seed_base;
    b.preimages = config.base_preimages;
    b.provenance = "user";
    return b;
  }
  const auto& hint = map.infinity_hint();
  if (!hint)
    fail(Error::Kind::Precondition,
         "map has no infinity hint: supply --seed-base and --base-preimages");
  Rect w = preimage_window_from_hint(map, q_target);
  double Q = std::abs(hint->coefficient) * std::pow(1.6 * w.x1, hint->degree);
  const double theta0 = 0.37;
  BaseSpec b;
  b.q_alpha = Vec2{std::cos(theta0), std::sin(theta0)} * Q;
  b.preimages = seeds_at_infinity(map, b.q_alpha);
  b.provenance = "seeds_at_infinity";
  return b;
}

namespace {

int circle_image_rotation(const PlaneMap& map, double radius) {
  for (int n : {256, 512, 1024, 2048, 4096, 8192}) {
    try {
      return rotation_number(image_of_curve(map, sample_circle({0, 0}, radius, n)));
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::Geometry) throw;
    }
  }
  fail(Error::Kind::Geometry, "circle image stays under-sampled at 8192 points");
}

// Offset distance suited to a closed curve's size.
double annulus_offset_for(const CriticalCurve& c) {
  double area = std::abs(c.points.signed_area());
  return std::max(1e-3, 0.1 * std::sqrt(area / std::acos(-1.0)));
}

void run_checks_stage(const PlaneMap& map, AnalysisReport& report) {
  const auto& curves = report.curves;
  // one annulus identity per closed curve
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!curves[i].points.closed) continue;
    std::vector<CriticalCurve> others;
    for (std::size_t jc = 0; jc < curves.size(); ++jc)
      if (jc != i) others.push_back(curves[jc]);
    try {
      report.checks.push_back(check_annulus(map, curves[i], annulus_offset_for(curves[i]),
                                            others));
    } catch (const Error& e) {
      report.stage_errors.push_back("annulus check on curve " + std::to_string(i) + ": " +
                                    e.what());
    }
  }

  // one polydisk identity around everything, when the map dominates at infinity
  bool all_closed = !curves.empty();
  for (const auto& c : curves) all_closed = all_closed && c.points.closed;
  if (all_closed && map.infinity_hint()) {
    try {
      double extent = 1.0;
      Vec2 center{0, 0};
      for (const auto& c : curves)
        for (const Vec2& p : c.points.points) extent = std::max(extent, p.norm());
      Polyline gamma0 = sample_circle(center, 1.3 * extent, 720);

      std::vector<Polyline> holes;
      for (std::size_t i = 0; i < curves.size(); ++i) {
        bool maximal = true;
        for (std::size_t jc = 0; jc < curves.size() && maximal; ++jc) {
          if (jc == i) continue;
          if (winding_number(curves[jc].points, curves[i].points.points.front()) != 0)
            maximal = false;  // nested inside another curve
        }
        if (maximal)
          holes.push_back(offset_curve(curves[i].points, annulus_offset_for(curves[i]),
                                       Side::Left));
      }
      report.checks.push_back(check_polydisk(map, gamma0, holes, curves));
    } catch (const Error& e) {
      report.stage_errors.push_back(std::string("polydisk check: ") + e.what());
    }
  }
}

}  // namespace

AnalysisReport run_pipeline(const PipelineConfig& config) {
  PlaneMap map = map_from_config(config);
  AnalysisReport report;
  report.generated_at = iso_timestamp();
  report.map_name = map.name();
  report.map_source = map.source();
  report.map_mode = map.uses_fd_derivatives() ? "black-box"
                    : map.mode() == ParseMode::ComplexZ ? "z" : "xy";
  report.fd_derivatives = map.uses_fd_derivatives();
  report.hint = map.infinity_hint();
  report.window = config.window ? *config.window : default_window(map);
  report.grid = config.grid ? *config.grid : default_grid(map);
  report.step = config.step ? *config.step : default_step(report.window);

  try {
    report.curves = trace_critical_set(map, report.window, report.grid, report.step);
  } catch (const Error& e) {
    report.stage_errors.push_back(std::string("trace: ") + e.what());
  }

  if (config.with_images || config.with_flower || !config.targets.empty() ||
      config.with_checks) {
    for (const auto& c : report.curves) report.images.push_back(image_of_curve(map, c.points));
  }

  for (double r : config.circles) {
    try {
      CircleLayer layer;
      layer.radius = r;
      layer.rotation = circle_image_rotation(map, r);
      layer.image = image_of_curve(map, sample_circle({0, 0}, r, 1024));
      report.circles.push_back(std::move(layer));
    } catch (const Error& e) {
      report.stage_errors.push_back("circle radius " + format_double(r) + ": " + e.what());
    }
  }

  if (config.with_flower) {
    try {
      report.flower =
          build_flower(map, report.curves, config.flower_density.value_or(0.0));
    } catch (const Error& e) {
      report.stage_errors.push_back(std::string("flower: ") + e.what());
    }
  }

  for (Vec2 target : config.targets) {
    try {
      BaseSpec base = resolve_base(map, target, config);
      TargetPath route = plan_route(map, report.images, report.curves, base.q_alpha, target);
      PreimageRun run = all_preimages(map, target, base, std::move(route));
      PreimageReport pr;
      pr.target = target;
      pr.base = run.base;
      pr.set = run.result;
      pr.crossings = run.route.crossings;
      pr.gains = run.gains;
      pr.losses = run.losses;
      for (PreimagePath& p : run.paths) {
        p.points = thin_path(p.points);
        pr.paths.push_back(std::move(p));
      }
      report.preimages.push_back(std::move(pr));
    } catch (const Error& e) {
      report.stage_errors.push_back("preimages of (" + format_double(target.x) + ", " +
                                    format_double(target.y) + "): " + e.what());
    }
  }

  if (config.with_checks) run_checks_stage(map, report);
  return report;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json curve_json(const CriticalCurve& c) {
  ordered_json jc;
  jc["closed"] = c.points.closed;
  jc["truncated"] = c.truncated;
  jc["orientation"] = c.orientation;
  jc["det_side_left"] = c.det_side_left;
  jc["step"] = c.step_h;
  jc["cusps"] = c.cusps.size();
  ordered_json details = ordered_json::array();
  for (const Cusp& cu : c.cusps) {
    ordered_json jd;
    jd["location"] = vec_json(cu.location);
    jd["curve_index"] = cu.curve_index;
    jd["side"] = side_name(cu.effective_side);
    jd["kernel"] = vec_json(cu.kernel_dir);
    details.push_back(jd);
  }
  jc["cusp_details"] = details;
  jc["points"] = points_json(c.points.points);
  return jc;
}

CriticalCurve curve_from(const ordered_json& j) {
  require_keys(j, {"closed", "truncated", "orientation", "det_side_left", "step", "cusps",
                   "cusp_details", "points"},
               {"closed", "points", "cusps"}, "critical curve");
  CriticalCurve c;
  c.points = make_polyline(points_from(j["points"]), j["closed"].get<bool>());
  c.truncated = j.value("truncated", false);
  c.orientation = j.value("orientation", 1);
  c.det_side_left = j.value("det_side_left", 0);
  c.step_h = j.value("step", 0.0);
  if (j.contains("cusp_details")) {
    for (const auto& jd : j["cusp_details"]) {
      require_keys(jd, {"location", "curve_index", "side", "kernel"}, {"location", "side"},
                   "cusp");
      Cusp cu;
      cu.location = vec_from(jd["location"]);
      cu.curve_index = jd.value("curve_index", 0.0);
      cu.effective_side = jd["side"].get<std::string>() == "left" ? Side::Left : Side::Right;
      if (jd.contains("kernel")) cu.kernel_dir = vec_from(jd["kernel"]);
      c.cusps.push_back(cu);
    }
  }
  if (c.cusps.size() != j["cusps"].get<std::size_t>())
    fail(Error::Kind::Io, "cusp count does not match cusp details");
  return c;
}

ordered_json polyline_json(const Polyline& p) {
  ordered_json jp;
  jp["closed"] = p.closed;
  jp["points"] = points_json(p.points);
  return jp;
}

Polyline polyline_from(const ordered_json& j) {
  require_keys(j, {"closed", "points"}, {"closed", "points"}, "polyline");
  return make_polyline(points_from(j["points"]), j["closed"].get<bool>());
}

}  // namespace

std::string report_to_json(const AnalysisReport& report) {
  ordered_json j;
  j["tool"] = "atlas";
  j["version"] = report.version;
  j["generated_at"] = report.generated_at;

  ordered_json jm;
  jm["name"] = report.map_name;
  jm["source"] = report.map_source;
  jm["mode"] = report.map_mode;
  jm["fd_derivatives"] = report.fd_derivatives;
  if (report.hint) {
    ordered_json jh;
    jh["degree"] = report.hint->degree;
    jh["coefficient"] =
        ordered_json::array({report.hint->coefficient.real(), report.hint->coefficient.imag()});
    jm["infinity_hint"] = jh;
  } else {
    jm["infinity_hint"] = nullptr;
  }
  j["map"] = jm;

  j["window"] =
      ordered_json::array({report.window.x0, report.window.y0, report.window.x1, report.window.y1});

  ordered_json js;
  js["grid"] = report.grid;
  js["step"] = report.step;
  ordered_json jt;
  jt["tol_trace_scale"] = 1e-9;
  jt["grad_tol"] = 1e-6;
  jt["newton_tol_scale"] = 1e-9;
  jt["dedup_scale"] = 1e-6;
  jt["cusp_guard_scale"] = 1e-3;
  jt["spawn_offset_scale"] = 1e-3;
  js["tolerances"] = jt;
  j["settings"] = js;

  int passed = 0, failed = 0;
  for (const CheckReport& c : report.checks) (c.pass ? passed : failed) += 1;
  ordered_json jsum;
  jsum["curves"] = report.curve_count();
  jsum["cusps_total"] = report.cusp_total();
  jsum["checks_passed"] = passed;
  jsum["checks_failed"] = failed;
  j["summary"] = jsum;

  ordered_json jc = ordered_json::array();
  for (const CriticalCurve& c : report.curves) jc.push_back(curve_json(c));
  j["critical_curves"] = jc;

  ordered_json ji = ordered_json::array();
  for (const Polyline& p : report.images) ji.push_back(polyline_json(p));
  j["image_curves"] = ji;

  ordered_json jf = ordered_json::array();
  for (const FlowerArc& a : report.flower) {
    ordered_json ja = polyline_json(a.polyline);
    ja["critical"] = a.critical;
    ja["image_curve"] = a.image_curve;
    jf.push_back(ja);
  }
  j["flower"] = jf;

  ordered_json jp = ordered_json::array();
  for (const PreimageReport& pr : report.preimages) {
    ordered_json je;
    je["target"] = vec_json(pr.target);
    je["preimage_count"] = pr.set.points.size();
    je["points"] = points_json(pr.set.points);
    ordered_json jres = ordered_json::array();
    for (double r : pr.set.residuals) jres.push_back(r);
    je["residuals"] = jres;
    ordered_json jb;
    jb["point"] = vec_json(pr.base.q_alpha);
    jb["provenance"] = pr.base.provenance;
    jb["preimages"] = points_json(pr.base.preimages);
    je["base"] = jb;
    je["gains"] = pr.gains;
    je["losses"] = pr.losses;
    ordered_json jx = ordered_json::array();
    for (const CrossingRecord& cr : pr.crossings) {
      ordered_json jcr;
      jcr["t"] = cr.t;
      jcr["point"] = vec_json(cr.point);
      jcr["fold_preimage"] = vec_json(cr.fold_preimage);
      jcr["curve"] = cr.curve;
      jcr["direction"] = cr.gain ? "gain" : "loss";
      jx.push_back(jcr);
    }
    je["crossings"] = jx;
    ordered_json jpaths = ordered_json::array();
    for (const PreimagePath& path : pr.paths) {
      ordered_json jpath;
      jpath["id"] = path.id;
      jpath["status"] = path.status();
      jpath["born_at"] = path.born_at ? ordered_json(*path.born_at) : ordered_json(nullptr);
      jpath["died_at"] = path.died_at ? ordered_json(*path.died_at) : ordered_json(nullptr);
      jpath["residual_max"] = path.residual_max;
      ordered_json jpts = ordered_json::array();
      for (const auto& [t, p] : path.points) jpts.push_back(ordered_json::array({t, p.x, p.y}));
      jpath["points"] = jpts;
      jpaths.push_back(jpath);
    }
    je["paths"] = jpaths;
    jp.push_back(je);
  }
  j["preimage_sets"] = jp;

  ordered_json jcir = ordered_json::array();
  for (const CircleLayer& c : report.circles) {
    ordered_json je = polyline_json(c.image);
    je["radius"] = c.radius;
    je["rotation"] = c.rotation;
    jcir.push_back(je);
  }
  j["circles"] = jcir;

  ordered_json jck = ordered_json::array();
  for (const CheckReport& c : report.checks) {
    ordered_json je;
    je["kind"] = check_kind_name(c.kind);
    je["lhs"] = c.lhs;
    je["rhs"] = c.rhs;
    je["pass"] = c.pass;
    je["inputs"] = c.inputs_digest;
    je["note"] = c.note;
    jck.push_back(je);
  }
  j["checks"] = jck;

  ordered_json jerr = ordered_json::array();
  for (const std::string& e : report.stage_errors) jerr.push_back(e);
  j["stage_errors"] = jerr;

  return j.dump(2) + "\n";
}

AnalysisReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(Error::Kind::Io, std::string("report is not valid JSON: ") + e.what());
  }
  require_keys(j,
               {"tool", "version", "generated_at", "map", "window", "settings", "summary",
                "critical_curves", "image_curves", "flower", "preimage_sets", "circles",
                "checks", "stage_errors"},
               {"tool", "version", "map", "window", "settings", "critical_curves"}, "report");
  if (j["tool"].get<std::string>() != "atlas") fail(Error::Kind::Io, "not an atlas report");

  AnalysisReport r;
  r.version = j["version"].get<std::string>();
  r.generated_at = j.value("generated_at", "");

  const auto& jm = j["map"];
  require_keys(jm, {"name", "source", "mode", "fd_derivatives", "infinity_hint"},
               {"name", "source", "mode"}, "map");
  r.map_name = jm["name"].get<std::string>();
  r.map_source = jm["source"].get<std::string>();
  r.map_mode = jm["mode"].get<std::string>();
  r.fd_derivatives = jm.value("fd_derivatives", false);
  if (jm.contains("infinity_hint") && !jm["infinity_hint"].is_null()) {
    const auto& jh = jm["infinity_hint"];
    require_keys(jh, {"degree", "coefficient"}, {"degree", "coefficient"}, "infinity_hint");
    InfinityHint h;
    h.degree = jh["degree"].get<int>();
    h.coefficient = {jh["coefficient"][0].get<double>(), jh["coefficient"][1].get<double>()};
    r.hint = h;
  }

  const auto& jw = j["window"];
  if (!jw.is_array() || jw.size() != 4) fail(Error::Kind::Io, "window must be [x0,y0,x1,y1]");
  r.window = {jw[0].get<double>(), jw[1].get<double>(), jw[2].get<double>(), jw[3].get<double>()};

  const auto& js = j["settings"];
  require_keys(js, {"grid", "step", "tolerances"}, {"grid", "step"}, "settings");
  r.grid = js["grid"].get<int>();
  r.step = js["step"].get<double>();

  for (const auto& jc : j["critical_curves"]) r.curves.push_back(curve_from(jc));
  if (j.contains("image_curves"))
    for (const auto& ji : j["image_curves"]) r.images.push_back(polyline_from(ji));
  if (j.contains("flower")) {
    for (const auto& ja : j["flower"]) {
      require_keys(ja, {"closed", "points", "critical", "image_curve"},
                   {"closed", "points", "critical"}, "flower arc");
      FlowerArc a;
      a.polyline = make_polyline(points_from(ja["points"]), ja["closed"].get<bool>());
      a.critical = ja["critical"].get<bool>();
      a.image_curve = ja.value("image_curve", -1);
      r.flower.push_back(std::move(a));
    }
  }
  if (j.contains("preimage_sets")) {
    for (const auto& je : j["preimage_sets"]) {
      require_keys(je,
                   {"target", "preimage_count", "points", "residuals", "base", "gains", "losses",
                    "crossings", "paths"},
                   {"target", "preimage_count", "points"}, "preimage set");
      PreimageReport pr;
      pr.target = vec_from(je["target"]);
      pr.set.target = pr.target;
      pr.set.points = points_from(je["points"]);
      if (je.contains("residuals"))
        for (const auto& v : je["residuals"]) pr.set.residuals.push_back(v.get<double>());
      if (pr.set.points.size() != je["preimage_count"].get<std::size_t>())
        fail(Error::Kind::Io, "preimage_count does not match the point list");
      if (je.contains("base")) {
        const auto& jb = je["base"];
        require_keys(jb, {"point", "provenance", "preimages"}, {"point"}, "base");
        pr.base.q_alpha = vec_from(jb["point"]);
        pr.base.provenance = jb.value("provenance", "");
        if (jb.contains("preimages")) pr.base.preimages = points_from(jb["preimages"]);
      }
      pr.gains = je.value("gains", 0);
      pr.losses = je.value("losses", 0);
      if (je.contains("crossings")) {
        for (const auto& jcr : je["crossings"]) {
          require_keys(jcr, {"t", "point", "fold_preimage", "curve", "direction"},
                       {"t", "point", "direction"}, "crossing");
          CrossingRecord cr;
          cr.t = jcr["t"].get<double>();
          cr.point = vec_from(jcr["point"]);
          if (jcr.contains("fold_preimage")) cr.fold_preimage = vec_from(jcr["fold_preimage"]);
          cr.curve = jcr.value("curve", -1);
          cr.gain = jcr["direction"].get<std::string>() == "gain";
          pr.crossings.push_back(cr);
        }
      }
      if (je.contains("paths")) {
        for (const auto& jpath : je["paths"]) {
          require_keys(jpath, {"id", "status", "born_at", "died_at", "residual_max", "points"},
                       {"id", "status", "points"}, "path");
          PreimagePath p;
          p.id = jpath["id"].get<int>();
          if (jpath.contains("born_at") && !jpath["born_at"].is_null())
            p.born_at = jpath["born_at"].get<double>();
          if (jpath.contains("died_at") && !jpath["died_at"].is_null())
            p.died_at = jpath["died_at"].get<double>();
          p.residual_max = jpath.value("residual_max", 0.0);
          for (const auto& jpt : jpath["points"]) {
            if (!jpt.is_array() || jpt.size() != 3)
              fail(Error::Kind::Io, "path points must be [t, x, y]");
            p.points.emplace_back(jpt[0].get<double>(),
                                  Vec2{jpt[1].get<double>(), jpt[2].get<double>()});
          }
          if (p.status() != jpath["status"].get<std::string>())
            fail(Error::Kind::Io, "path status does not match its birth/death fields");
          pr.paths.push_back(std::move(p));
        }
      }
      r.preimages.push_back(std::move(pr));
    }
  }
  if (j.contains("circles")) {
    for (const auto& je : j["circles"]) {
      require_keys(je, {"closed", "points", "radius", "rotation"},
                   {"closed", "points", "radius", "rotation"}, "circle layer");
      CircleLayer c;
      c.radius = je["radius"].get<double>();
      c.rotation = je["rotation"].get<int>();
      c.image = make_polyline(points_from(je["points"]), je["closed"].get<bool>());
      r.circles.push_back(std::move(c));
    }
  }
  if (j.contains("checks")) {
    for (const auto& je : j["checks"]) {
      require_keys(je, {"kind", "lhs", "rhs", "pass", "inputs", "note"},
                   {"kind", "lhs", "rhs", "pass"}, "check");
      CheckReport c;
      std::string kind = je["kind"].get<std::string>();
      c.kind = kind == "disk"       ? CheckReport::Kind::Disk
               : kind == "polydisk" ? CheckReport::Kind::Polydisk
               : kind == "annulus"  ? CheckReport::Kind::Annulus
                                    : CheckReport::Kind::Parity;
      c.lhs = je["lhs"].get<long>();
      c.rhs = je["rhs"].get<long>();
      c.pass = je["pass"].get<bool>();
      c.inputs_digest = je.value("inputs", "");
      c.note = je.value("note", "");
      if (c.pass != (c.lhs == c.rhs))
        fail(Error::Kind::Io, "check pass flag contradicts lhs/rhs");
      r.checks.push_back(std::move(c));
    }
  }
  if (j.contains("stage_errors"))
    for (const auto& je : j["stage_errors"]) r.stage_errors.push_back(je.get<std::string>());
  return r;
}

void emit_report(const AnalysisReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Error::Kind::Io, "cannot open '" + path + "' for writing");
  out << report_to_json(report);
  if (!out) fail(Error::Kind::Io, "failed writing '" + path + "'");
}

AnalysisReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Error::Kind::Io, "cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return report_from_json(text);
}

}  // namespace atlas
