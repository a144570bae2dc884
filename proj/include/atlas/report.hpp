#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atlas/checks.hpp"
#include "atlas/continuation.hpp"
#include "atlas/critical.hpp"
#include "atlas/map.hpp"

namespace atlas {

struct PipelineConfig {
  std::optional<std::string> builtin;  // "F0".."F3"
  std::optional<std::string> expr;
  ParseMode mode = ParseMode::ComplexZ;

  std::optional<Rect> window;
  std::optional<int> grid;
  std::optional<double> step;

  bool with_images = true;
  bool with_flower = false;
  std::optional<double> flower_density;
  bool with_checks = false;
  std::vector<Vec2> targets;
  std::vector<double> circles;  // radii for the circle-image layer

  std::optional<Vec2> seed_base;        // user-supplied base point
  std::vector<Vec2> base_preimages;     // its complete preimage list
};

struct CircleLayer {
  double radius = 0.0;
  Polyline image;
  int rotation = 0;
};

struct PreimageReport {
  Vec2 target;
  BaseSpec base;
  PreimageSet set;
  std::vector<PreimagePath> paths;
  std::vector<CrossingRecord> crossings;
  int gains = 0, losses = 0;
};

// Self-contained result of one pipeline run: re-running with the embedded
// settings reproduces every integer in it.
struct AnalysisReport {
  std::string version = "0.1.0";
  std::string generated_at;

  std::string map_name, map_source, map_mode;
  bool fd_derivatives = false;
  std::optional<InfinityHint> hint;

  Rect window;
  int grid = 0;
  double step = 0.0;

  std::vector<CriticalCurve> curves;
  std::vector<Polyline> images;
  std::vector<FlowerArc> flower;
  std::vector<PreimageReport> preimages;
  std::vector<CircleLayer> circles;
  std::vector<CheckReport> checks;
  std::vector<std::string> stage_errors;

  int curve_count() const { return static_cast<int>(curves.size()); }
  int cusp_total() const {
    int n = 0;
    for (const auto& c : curves) n += static_cast<int>(c.cusps.size());
    return n;
  }
};

PlaneMap map_from_config(const PipelineConfig& config);

// Default analysis window / scan grid / trace step for a map.
Rect default_window(const PlaneMap& map);
int default_grid(const PlaneMap& map);
double default_step(const Rect& window);

// Base preimages for continuation toward q_target: user-supplied when given,
// otherwise seeds at infinity.
BaseSpec resolve_base(const PlaneMap& map, Vec2 q_target, const PipelineConfig& config);

// scan -> refine -> trace -> cusps -> images -> (flower) -> (preimages) ->
// (checks); partial failures are recorded and later stages continue where
// their inputs are sound.
AnalysisReport run_pipeline(const PipelineConfig& config);

// Serialization. emit_report writes the canonical schema; load_report
// validates it strictly (unknown fields are rejected).
std::string report_to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const std::string& text);
void emit_report(const AnalysisReport& report, const std::string& path);
AnalysisReport load_report(const std::string& path);

// SVG rendering of one report layer. Deterministic for identical reports.
std::string render_svg(const AnalysisReport& report, const std::string& figure);

}  // namespace atlas
