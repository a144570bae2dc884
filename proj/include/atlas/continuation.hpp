#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atlas/critical.hpp"
#include "atlas/geometry.hpp"
#include "atlas/map.hpp"

namespace atlas {

// Crossing of a target arc with the image of the critical set.
struct CrossingRecord {
  double t = 0.0;          // parameter on the target arc
  Vec2 point;              // delta(t), on F(C)
  Vec2 fold_preimage;      // the fold point on the critical curve
  int curve = -1;          // index of the critical curve carrying the fold
  bool gain = false;       // true: tile ahead has two more preimages
  Vec2 more_dir;           // unit direction in the image toward the richer tile
};

// Piecewise-linear target arc delta: [t0, t1] -> R^2 with strictly
// increasing sample parameters.
struct TargetPath {
  std::vector<std::pair<double, Vec2>> samples;
  std::vector<CrossingRecord> crossings;

  double t_begin() const { return samples.front().first; }
  double t_end() const { return samples.back().first; }
  Vec2 at(double t) const;
  Vec2 velocity(double t) const;  // d delta / dt on the containing segment
};

TargetPath straight_path(Vec2 a, Vec2 b, int n_samples = 129);

// One branch of the inversion F(gamma(t)) = delta(t).
struct PreimagePath {
  int id = 0;
  std::vector<std::pair<double, Vec2>> points;
  std::optional<double> born_at;   // born at a fold crossing
  std::optional<double> died_at;   // collided with its partner at a fold
  bool split_end = false;          // ends at a cusp preimage (flower arcs)
  bool split_start = false;
  double residual_max = 0.0;

  bool alive() const { return !died_at.has_value(); }
  double end_t() const { return points.back().first; }
  Vec2 end_point() const { return points.back().second; }
  std::string status() const {
    if (died_at) return "died_at_fold";
    if (born_at) return "born_at_fold";
    return "alive";
  }
};

struct PreimageSet {
  Vec2 target;
  std::vector<Vec2> points;
  std::vector<double> residuals;
};

struct BaseSpec {
  Vec2 q_alpha;
  std::vector<Vec2> preimages;
  std::string provenance;  // "seeds_at_infinity" | "user" | "oracle"
};

// Everything a preimage computation produced, for reports and tests.
struct PreimageRun {
  PreimageSet result;
  std::vector<PreimagePath> paths;
  TargetPath route;
  BaseSpec base;
  int gains = 0, losses = 0;
};

// Reroute requests carry the offending image-space location.
class RerouteError : public Error {
 public:
  RerouteError(Vec2 where, const std::string& msg)
      : Error(Kind::Reroute, msg), location(where) {}
  Vec2 location;
};

double newton_tol(Vec2 q);

// Damped Newton for F(p) = q. Throws Numeric on a singular Jacobian at an
// iterate or on non-convergence.
Vec2 newton_invert(const PlaneMap& map, Vec2 q, Vec2 guess, double tol, int max_iter = 40);

// Follows one preimage branch along the whole arc. Requires the start to
// satisfy the residual contract at delta(t_begin). Uses delta.crossings to
// recognize legitimate deaths at folds.
PreimagePath continue_path(const PlaneMap& map, const TargetPath& delta, Vec2 p_start);

// Locates and refines all transversal crossings of delta with the given
// image curves (image_curves[k] must be the pointwise image of
// critical_curves[k]). Throws RerouteError near cusp images, double points
// and tangencies. Results are stored into delta.crossings and returned.
std::vector<CrossingRecord> find_crossings(TargetPath& delta,
                                           std::span<const Polyline> image_curves,
                                           std::span<const CriticalCurve> critical_curves,
                                           const PlaneMap& map);

// Births two paths at a gain crossing: seeds p_f +- s v_ker, auxiliary arcs
// into delta just past the crossing. Retries with smaller s when the
// auxiliary arc is invalid.
std::pair<PreimagePath, PreimagePath> spawn_at_fold(const PlaneMap& map, Vec2 p_f,
                                                    const TargetPath& delta, double t_f, double s,
                                                    std::span<const Polyline> image_curves = {});

// Runs the full bookkeeping: every base preimage is continued, paths are
// born at gains and retired in pairs at losses. route.crossings must be
// filled (find_crossings) before the call.
PreimageRun all_preimages(const PlaneMap& map, Vec2 q_target, const BaseSpec& base,
                          TargetPath route);

// The n n-th roots of q_alpha / c, polished by Newton. Requires an infinity
// hint and dominance of the leading term along the seed circle.
std::vector<Vec2> seeds_at_infinity(const PlaneMap& map, Vec2 q_alpha);

// Straight route with automatic local detours around cusp images, double
// points and tangential crossings. Fills the crossing records.
TargetPath plan_route(const PlaneMap& map, std::span<const Polyline> image_curves,
                      std::span<const CriticalCurve> critical_curves, Vec2 from, Vec2 to);

// Preimage F^-1(F(C)) of the image of the critical set: the critical curves
// themselves plus all noncritical preimage arcs, stitched by continuation
// along each image curve. Arcs are split open at cusp preimages.
struct FlowerArc {
  Polyline polyline;
  bool critical = false;
  int image_curve = -1;  // which image curve the arc lies over (-1: critical)
};
std::vector<FlowerArc> build_flower(const PlaneMap& map, std::span<const CriticalCurve> curves,
                                    double density);

}  // namespace atlas
