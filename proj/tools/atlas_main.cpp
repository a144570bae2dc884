#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atlas/report.hpp"

namespace {

atlas::Vec2 parse_point(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos)
    atlas::fail(atlas::Error::Kind::Precondition, "expected 'x,y', got '" + text + "'");
  return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

struct CommonOpts {
  std::string map_spec;
  std::string expr;
  std::string mode = "z";
  std::vector<double> window;
  int grid = 0;
  double step = 0.0;
  double tol = 0.0;
  std::string out;
  std::string seed_base;
  std::vector<std::string> base_preimages;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--map", o.map_spec, "builtin:F0 | builtin:F1 | builtin:F2 | builtin:F3");
  cmd->add_option("--expr", o.expr, "map expression (see README for the grammar)");
  cmd->add_option("--mode", o.mode, "expression variables: z (complex) or xy (real)")
      ->check(CLI::IsMember({"z", "xy"}));
  cmd->add_option("--window", o.window, "analysis window x0,y0,x1,y1")->delimiter(',')->expected(4);
  cmd->add_option("--grid", o.grid, "seed scan grid (cells per side)");
  cmd->add_option("--step", o.step, "trace step h");
  cmd->add_option("--tol", o.tol, "solver tolerance scale override");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--seed-base", o.seed_base, "user-supplied base point x,y");
  cmd->add_option("--base-preimages", o.base_preimages,
                  "complete preimage list of the base point, x,y entries");
}

atlas::PipelineConfig config_from(const CommonOpts& o) {
  atlas::PipelineConfig cfg;
  if (!o.map_spec.empty()) {
    if (o.map_spec.rfind("builtin:", 0) != 0)
      atlas::fail(atlas::Error::Kind::Precondition,
                  "--map expects builtin:<tag>; use --expr for formulas");
    cfg.builtin = o.map_spec.substr(8);
  }
  if (!o.expr.empty()) cfg.expr = o.expr;
  cfg.mode = o.mode == "xy" ? atlas::ParseMode::RealXY : atlas::ParseMode::ComplexZ;
  if (o.window.size() == 4) cfg.window = atlas::Rect{o.window[0], o.window[1], o.window[2], o.window[3]};
  if (o.grid > 0) cfg.grid = o.grid;
  if (o.step > 0) cfg.step = o.step;
  if (!o.seed_base.empty()) cfg.seed_base = parse_point(o.seed_base);
  for (const std::string& s : o.base_preimages) cfg.base_preimages.push_back(parse_point(s));
  return cfg;
}

void write_output(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) atlas::fail(atlas::Error::Kind::Io, "cannot open '" + out + "'");
  f << text;
}

int emit(const atlas::AnalysisReport& report, const std::string& out) {
  write_output(atlas::report_to_json(report), out);
  for (const atlas::CheckReport& c : report.checks)
    if (!c.pass) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atlas: global numerical study of smooth plane maps"};
  app.require_subcommand(1);

  CommonOpts o;
  std::vector<std::string> targets;
  std::vector<double> circle_radii;
  std::string figure;
  std::string in_report;
  double density = 0.0;
  int oracle_grid = 0;

  CLI::App* trace = app.add_subcommand("trace", "trace the critical curves and their cusps");
  add_common(trace, o);

  CLI::App* image = app.add_subcommand("image", "trace and map the critical curves forward");
  add_common(image, o);

  CLI::App* flower = app.add_subcommand("flower", "compute the preimage of the critical image");
  add_common(flower, o);
  flower->add_option("--density", density, "image-space sampling density");

  CLI::App* preimages = app.add_subcommand("preimages", "all preimages of target points");
  add_common(preimages, o);
  preimages->add_option("--target", targets, "target point x,y (repeatable)")->required();

  CLI::App* check = app.add_subcommand("check", "run the rotation-number compatibility checks");
  add_common(check, o);

  CLI::App* render = app.add_subcommand("render", "render a report layer as SVG");
  add_common(render, o);
  render->add_option("--figure", figure,
                     "critical | image | flower | paths | circles(r1,r2,...)")
      ->required();
  render->add_option("--in", in_report, "reuse an existing report instead of re-running");

  CLI::App* oracle = app.add_subcommand("oracle", "brute-force preimages (independent check)");
  add_common(oracle, o);
  oracle->add_option("--target", targets, "target point x,y (repeatable)")->required();
  oracle->add_option("--oracle-grid", oracle_grid, "fixed oracle grid (default: auto-doubling)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (trace->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      cfg.with_images = false;
      return emit(atlas::run_pipeline(cfg), o.out);
    }
    if (image->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      return emit(atlas::run_pipeline(cfg), o.out);
    }
    if (flower->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      cfg.with_flower = true;
      if (density > 0) cfg.flower_density = density;
      return emit(atlas::run_pipeline(cfg), o.out);
    }
    if (preimages->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      for (const std::string& t : targets) cfg.targets.push_back(parse_point(t));
      return emit(atlas::run_pipeline(cfg), o.out);
    }
    if (check->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      cfg.with_checks = true;
      return emit(atlas::run_pipeline(cfg), o.out);
    }
    if (render->parsed()) {
      std::string fig = figure;
      atlas::PipelineConfig cfg = config_from(o);
      if (fig.rfind("circles(", 0) == 0 && fig.back() == ')') {
        std::string radii = fig.substr(8, fig.size() - 9);
        std::size_t pos = 0;
        while (pos < radii.size()) {
          std::size_t comma = radii.find(',', pos);
          if (comma == std::string::npos) comma = radii.size();
          cfg.circles.push_back(std::stod(radii.substr(pos, comma - pos)));
          pos = comma + 1;
        }
        fig = "circles";
      }
      if (fig == "flower") cfg.with_flower = true;
      atlas::AnalysisReport report =
          in_report.empty() ? atlas::run_pipeline(cfg) : atlas::load_report(in_report);
      write_output(atlas::render_svg(report, fig), o.out);
      return 0;
    }
    if (oracle->parsed()) {
      atlas::PipelineConfig cfg = config_from(o);
      atlas::PlaneMap m = atlas::map_from_config(cfg);
      atlas::AnalysisReport report;
      report.map_name = m.name();
      report.map_source = m.source();
      report.map_mode = m.uses_fd_derivatives() ? "black-box"
                        : m.mode() == atlas::ParseMode::ComplexZ ? "z" : "xy";
      report.hint = m.infinity_hint();
      report.window = cfg.window ? *cfg.window : atlas::default_window(m);
      report.grid = cfg.grid ? *cfg.grid : atlas::default_grid(m);
      report.step = cfg.step ? *cfg.step : atlas::default_step(report.window);
      report.generated_at = "";
      for (const std::string& t : targets) {
        atlas::Vec2 q = parse_point(t);
        atlas::PreimageSet set =
            oracle_grid > 0
                ? atlas::brute_force_preimages(m, q, report.window.expanded(report.window.max_dim()),
                                               oracle_grid)
                : atlas::brute_force_preimages_auto(m, q, report.window.expanded(report.window.max_dim()));
        atlas::PreimageReport pr;
        pr.target = q;
        pr.set = set;
        pr.base.q_alpha = q;
        pr.base.provenance = "oracle";
        report.preimages.push_back(std::move(pr));
      }
      write_output(atlas::report_to_json(report), o.out);
      return 0;
    }
  } catch (const atlas::Error& e) {
    std::cerr << "atlas: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "atlas: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
