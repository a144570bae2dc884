#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "atlas/report.hpp"

namespace py = pybind11;
using namespace atlas;

namespace {

std::pair<double, double> to_pair(Vec2 v) { return {v.x, v.y}; }

Vec2 from_pair(std::pair<double, double> p) { return {p.first, p.second}; }

Polyline polyline_from_list(const std::vector<std::pair<double, double>>& pts, bool closed) {
  std::vector<Vec2> v;
  v.reserve(pts.size());
  for (auto [x, y] : pts) v.push_back({x, y});
  return make_polyline(std::move(v), closed);
}

std::vector<std::pair<double, double>> points_to_list(const std::vector<Vec2>& pts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pts.size());
  for (Vec2 p : pts) out.push_back(to_pair(p));
  return out;
}

py::dict curve_to_dict(const CriticalCurve& c) {
  py::dict d;
  d["points"] = points_to_list(c.points.points);
  d["closed"] = c.points.closed;
  d["truncated"] = c.truncated;
  d["det_side_left"] = c.det_side_left;
  py::list cusps;
  for (const Cusp& cu : c.cusps) {
    py::dict dc;
    dc["location"] = to_pair(cu.location);
    dc["side"] = side_name(cu.effective_side);
    dc["kernel"] = to_pair(cu.kernel_dir);
    cusps.append(dc);
  }
  d["cusps"] = cusps;
  return d;
}

}  // namespace

PYBIND11_MODULE(atlasmaps, m) {
  m.doc() = "Global numerical study of smooth plane maps: critical curves, folds and "
            "cusps, preimages by continuation, winding and rotation numbers.";

  py::register_exception<Error>(m, "AtlasError");

  py::class_<PlaneMap>(m, "PlaneMap")
      .def_static("builtin", [](const std::string& tag) { return PlaneMap::builtin(tag); },
                  py::arg("tag"), "Built-in map: F0, F1, F2 or F3.")
      .def_static(
          "parse",
          [](const std::string& source, const std::string& mode) {
            return PlaneMap::parse(source,
                                   mode == "xy" ? ParseMode::RealXY : ParseMode::ComplexZ);
          },
          py::arg("source"), py::arg("mode") = "z")
      .def("__call__",
           [](const PlaneMap& map, double x, double y) { return to_pair(map({x, y})); })
      .def("jet",
           [](const PlaneMap& map, double x, double y) {
             Jet2 j = map.jet({x, y});
             py::dict d;
             d["value"] = to_pair(j.value);
             d["jacobian"] = py::make_tuple(j.jacobian.a, j.jacobian.b, j.jacobian.c, j.jacobian.d);
             d["det"] = j.det();
             d["grad_det"] = to_pair(j.grad_det());
             d["hess_x"] = py::make_tuple(j.hess_x.xx, j.hess_x.xy, j.hess_x.yy);
             d["hess_y"] = py::make_tuple(j.hess_y.xx, j.hess_y.xy, j.hess_y.yy);
             return d;
           })
      .def_property_readonly("name", &PlaneMap::name)
      .def_property_readonly("source", &PlaneMap::source)
      .def("__repr__", [](const PlaneMap& map) { return "PlaneMap(" + map.name() + ")"; });

  m.def(
      "winding_number",
      [](const std::vector<std::pair<double, double>>& pts, double x, double y) {
        return winding_number(polyline_from_list(pts, true), {x, y});
      },
      py::arg("points"), py::arg("x"), py::arg("y"));

  m.def(
      "rotation_number",
      [](const std::vector<std::pair<double, double>>& pts) {
        return rotation_number(polyline_from_list(pts, true));
      },
      py::arg("points"));

  m.def(
      "sample_circle",
      [](double cx, double cy, double r, int n) {
        return points_to_list(sample_circle({cx, cy}, r, n).points);
      },
      py::arg("cx"), py::arg("cy"), py::arg("radius"), py::arg("n"));

  m.def(
      "trace_critical_set",
      [](const PlaneMap& map, std::pair<double, double> lo, std::pair<double, double> hi,
         int grid, double step) {
        Rect window{lo.first, lo.second, hi.first, hi.second};
        double h = step > 0 ? step : default_step(window);
        py::list out;
        for (const CriticalCurve& c : trace_critical_set(map, window, grid, h))
          out.append(curve_to_dict(c));
        return out;
      },
      py::arg("map"), py::arg("lo"), py::arg("hi"), py::arg("grid") = 64, py::arg("step") = 0.0);

  m.def(
      "image_of_curve",
      [](const PlaneMap& map, const std::vector<std::pair<double, double>>& pts, bool closed) {
        return points_to_list(image_of_curve(map, polyline_from_list(pts, closed)).points);
      },
      py::arg("map"), py::arg("points"), py::arg("closed") = true);

  m.def(
      "preimages",
      [](const PlaneMap& map, double x, double y) {
        PipelineConfig cfg;
        cfg.builtin = map.name();  // only builtins carry hints today
        cfg.targets.push_back({x, y});
        AnalysisReport rep = run_pipeline(cfg);
        if (rep.preimages.empty())
          throw Error(Error::Kind::Numeric,
                      rep.stage_errors.empty() ? "preimage stage failed"
                                               : rep.stage_errors.front());
        return points_to_list(rep.preimages.front().set.points);
      },
      py::arg("map"), py::arg("x"), py::arg("y"),
      "All preimages of (x, y) by continuation from seeds at infinity (builtin maps).");

  m.def(
      "brute_force_preimages",
      [](const PlaneMap& map, double x, double y, std::pair<double, double> lo,
         std::pair<double, double> hi, int grid) {
        return points_to_list(
            brute_force_preimages(map, {x, y}, {lo.first, lo.second, hi.first, hi.second}, grid)
                .points);
      },
      py::arg("map"), py::arg("x"), py::arg("y"), py::arg("lo"), py::arg("hi"),
      py::arg("grid") = 128);

  m.def(
      "run_pipeline_json",
      [](const std::string& config_json) {
        auto j = nlohmann::json::parse(config_json);
        PipelineConfig cfg;
        if (j.contains("builtin")) cfg.builtin = j["builtin"].get<std::string>();
        if (j.contains("expr")) cfg.expr = j["expr"].get<std::string>();
        if (j.contains("mode"))
          cfg.mode = j["mode"] == "xy" ? ParseMode::RealXY : ParseMode::ComplexZ;
        if (j.contains("window")) {
          auto w = j["window"];
          cfg.window = Rect{w[0], w[1], w[2], w[3]};
        }
        if (j.contains("grid")) cfg.grid = j["grid"].get<int>();
        if (j.contains("step")) cfg.step = j["step"].get<double>();
        if (j.contains("flower")) cfg.with_flower = j["flower"].get<bool>();
        if (j.contains("checks")) cfg.with_checks = j["checks"].get<bool>();
        if (j.contains("targets"))
          for (const auto& t : j["targets"]) cfg.targets.push_back({t[0], t[1]});
        if (j.contains("circles"))
          for (const auto& r : j["circles"]) cfg.circles.push_back(r.get<double>());
        return report_to_json(run_pipeline(cfg));
      },
      py::arg("config_json"),
      "Run the full pipeline from a JSON config; returns the report as JSON text.");

  m.def(
      "render_svg",
      [](const std::string& report_json, const std::string& figure) {
        return render_svg(report_from_json(report_json), figure);
      },
      py::arg("report_json"), py::arg("figure"));
}
