#pragma once

#include <span>
#include <string>
#include <vector>

#include "atlas/continuation.hpp"
#include "atlas/critical.hpp"

namespace atlas {

// Outcome of one compatibility identity. pass <=> lhs == rhs. A passing
// check never certifies completeness of the critical set; failure proves
// curves are missing.
struct CheckReport {
  enum class Kind { Disk, Polydisk, Annulus, Parity };
  Kind kind = Kind::Disk;
  long lhs = 0;
  long rhs = 0;
  std::string inputs_digest;
  bool pass = false;
  std::string note;
};

const char* check_kind_name(CheckReport::Kind k);

struct TileSample {
  Vec2 point;
  int count = 0;
  enum class Method { Continuation, Oracle } method = Method::Continuation;
  int tile = -1;
};

// Damped Newton from every grid node; converged points deduplicated.
// Preimages outside the window are discarded (the window is asserted to
// contain them all).
PreimageSet brute_force_preimages(const PlaneMap& map, Vec2 q, const Rect& window, int grid_n);

// Doubles grid_n until the count stabilizes twice. For maps with an
// infinity hint the window is derived from the dominant term; otherwise the
// caller-supplied fallback window is used.
PreimageSet brute_force_preimages_auto(const PlaneMap& map, Vec2 q,
                                       std::optional<Rect> fallback_window = std::nullopt,
                                       int grid_start = 48, int grid_max = 1024);

// Window certain to contain every preimage of q, from the dominant-term
// bound. Requires an infinity hint.
Rect preimage_window_from_hint(const PlaneMap& map, Vec2 q);

// r(F(gamma)) == sgn det DF(p_sample) on a critical-point-free disk.
CheckReport check_disk(const PlaneMap& map, const Polyline& gamma, Vec2 p_sample,
                       std::span<const CriticalCurve> known = {});

// r(F(gamma0)) == sum r(F(gamma_i)) - s(n-1) on a disk with n holes.
CheckReport check_polydisk(const PlaneMap& map, const Polyline& gamma0,
                           std::span<const Polyline> holes,
                           std::span<const CriticalCurve> known = {});

// r(F(gamma_out)) == r(F(gamma_in)) + s_in k_in + s_out k_out across one
// critical curve, with offsets built at d_offset.
CheckReport check_annulus(const PlaneMap& map, const CriticalCurve& curve, double d_offset,
                          std::span<const CriticalCurve> others = {});

struct CensusResult {
  std::vector<TileSample> samples;
  CheckReport parity;
  int tile_count = 0;
};

// Stratified samples with per-point preimage counts, grouped into tiles by
// crossing-free visibility; validates the shared parity and the
// adjacent-tiles-differ-by-two law.
CensusResult tile_census(const PlaneMap& map, std::span<const Polyline> image_curves,
                         std::span<const CriticalCurve> curves, const Rect& window,
                         int samples_per_tile_goal);

}  // namespace atlas
