#pragma once

#include <optional>
#include <span>
#include <vector>

#include "atlas/geometry.hpp"
#include "atlas/map.hpp"

namespace atlas {

struct FoldStatus {
  enum class Verdict { Regular, Fold, CuspCandidate, Degenerate };
  bool is_critical = false;
  double grad_norm = 0.0;
  double kernel_alignment = 0.0;  // <grad det DF, unit kernel vector>
  Verdict verdict = Verdict::Regular;
};

struct Cusp {
  Vec2 location;
  double curve_index = 0.0;  // position between traced points
  Side effective_side = Side::Left;
  Vec2 kernel_dir;
};

struct CriticalCurve {
  Polyline points;
  std::vector<Cusp> cusps;
  bool truncated = false;    // open curve clipped at the window
  int orientation = +1;      // +1 once normalized positively (closed curves)
  int det_side_left = 0;     // sign of det DF just left of travel direction
  double step_h = 0.0;       // step parameter the curve was traced with
};

struct TraceSettings {
  double tol_scale = 1e-9;   // det tolerance scale (spec default)
  double grad_tol = 1e-6;
  double align_candidate_tol = 1e-4;  // flags cusp candidates only
  int max_steps = 200000;
  double max_turn = 0.4;     // per-step tangent turn guard, radians
};

// Grid sign-change scan: all horizontally/vertically adjacent corner pairs
// with opposite-sign det DF, row-major order. grid_n is the number of cells
// per side.
std::vector<std::pair<Vec2, Vec2>> scan_seeds(const PlaneMap& map, const Rect& window, int grid_n);

// Bisection plus 1-D Newton along the segment. Requires a sign change.
Vec2 refine_critical_point(const PlaneMap& map, Vec2 p_plus, Vec2 p_minus,
                           const TraceSettings& ts = {});

// Predictor-corrector trace of the det DF = 0 level through p0.
CriticalCurve trace_critical_curve(const PlaneMap& map, Vec2 p0, double h, const Rect& window,
                                   const TraceSettings& ts = {});

FoldStatus fold_test(const PlaneMap& map, Vec2 p, const TraceSettings& ts = {});

// One cusp per sign change of the kernel alignment along the curve, refined
// by bisection in arc parameter. Effective sides are not decided here.
std::vector<Cusp> locate_cusps(const PlaneMap& map, const CriticalCurve& curve,
                               const TraceSettings& ts = {});

// Probes both sides of the curve near the cusp and counts local preimages of
// the probe images; the side with 3 is effective.
Side cusp_effective_side(const PlaneMap& map, const Cusp& cusp, const CriticalCurve& curve);

Polyline image_of_curve(const PlaneMap& map, const Polyline& curve);

// Full sweep: scan, refine, dedupe, trace, locate cusps, decide effective
// sides. Retries individual components with a smaller step when curvature
// demands it.
std::vector<CriticalCurve> trace_critical_set(const PlaneMap& map, const Rect& window, int grid_n,
                                              double h, const TraceSettings& ts = {});

// Projects q onto the det DF = 0 level by Newton along grad det.
std::optional<Vec2> project_to_critical(const PlaneMap& map, Vec2 q, const TraceSettings& ts = {});

// Number of solutions of F(p) = q inside the disk around center, found by
// multistart damped Newton. Deliberately independent of the continuation
// engine; used for fold/cusp side decisions and as a local oracle.
int local_preimage_count(const PlaneMap& map, Vec2 q, Vec2 center, double radius);

}  // namespace atlas
