#pragma once

// Internal stepping machinery shared by the preimage engine and the flower
// builder. Not installed.

#include "atlas/continuation.hpp"

namespace atlas::detail {

struct PathState {
  double dt = 0.0;
  double dt_max = 0.0;
  double v_est = 1.0;  // local branch speed |DF^-1 delta'|
  int successes = 0;
};

struct AdvanceOutcome {
  bool reached = false;
  double t_stuck = 0.0;
};

PathState init_state(const PlaneMap& map, const TargetPath& delta, Vec2 p, double t);

// Advances the path from its current end to t_target with adaptive steps.
// Newton results that jump farther than the local speed allows are rejected
// (they indicate branch hopping, not convergence).
AdvanceOutcome advance_path(const PlaneMap& map, const TargetPath& delta, PreimagePath& path,
                            double t_target, PathState& st);

// Straight-segment continuation used for auxiliary spawn arcs.
Vec2 continue_straight(const PlaneMap& map, Vec2 q_from, Vec2 q_to, Vec2 p_start);

struct RefinedCrossing {
  Vec2 p_f;
  double t_f;
};

// Newton on (p, t) for F(p) - delta(t) = 0, det DF(p) = 0.
std::optional<RefinedCrossing> refine_crossing(const PlaneMap& map, const TargetPath& delta,
                                               Vec2 p_init, double t_init);

// Unit direction in the image toward the two-extra-preimages side of a fold.
std::optional<Vec2> fold_more_direction(const PlaneMap& map, Vec2 p_f);

}  // namespace atlas::detail
