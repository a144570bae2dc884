#include "atlas/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "continuation_detail.hpp"

namespace atlas {

namespace {

constexpr double kSingularDetScale = 1e-12;

double det_scale(const Mat2& j) {
  return 1.0 + std::abs(j.a * j.d) + std::abs(j.b * j.c);
}

// 3x3 linear solve by Gaussian elimination with partial pivoting.
bool solve3(double A[3][3], double b[3], double x[3]) {
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(A[idx[r]][col]) > std::abs(A[idx[piv]][col])) piv = r;
    std::swap(idx[col], idx[piv]);
    double d = A[idx[col]][col];
    if (std::abs(d) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      double f = A[idx[r]][col] / d;
      for (int c = col; c < 3; ++c) A[idx[r]][c] -= f * A[idx[col]][c];
      b[idx[r]] -= f * b[idx[col]];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double s = b[idx[row]];
    for (int c = row + 1; c < 3; ++c) s -= A[idx[row]][c] * x[c];
    double d = A[idx[row]][row];
    if (std::abs(d) < 1e-300) return false;
    x[row] = s / d;
  }
  return true;
}

}  // namespace

double newton_tol(Vec2 q) { return 1e-9 * (1.0 + q.norm()); }

Vec2 TargetPath::at(double t) const {
  if (samples.size() < 2) fail(Error::Kind::Precondition, "target path needs samples");
  if (t <= samples.front().first) return samples.front().second;
  if (t >= samples.back().first) return samples.back().second;
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const auto& s) { return v < s.first; });
  const auto& [t1, q1] = *it;
  const auto& [t0, q0] = *(it - 1);
  double u = (t - t0) / (t1 - t0);
  return q0 + (q1 - q0) * u;
}

Vec2 TargetPath::velocity(double t) const {
  if (samples.size() < 2) fail(Error::Kind::Precondition, "target path needs samples");
  t = std::clamp(t, samples.front().first, samples.back().first);
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double v, const auto& s) { return v < s.first; });
  if (it == samples.begin()) ++it;
  if (it == samples.end()) --it;
  const auto& [t1, q1] = *it;
  const auto& [t0, q0] = *(it - 1);
  return (q1 - q0) / (t1 - t0);
}

TargetPath straight_path(Vec2 a, Vec2 b, int n_samples) {
  if (n_samples < 2) fail(Error::Kind::Precondition, "path needs at least 2 samples");
  TargetPath p;
  p.samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    double t = static_cast<double>(i) / (n_samples - 1);
    p.samples.emplace_back(t, a + (b - a) * t);
  }
  return p;
}

Vec2 newton_invert(const PlaneMap& map, Vec2 q, Vec2 guess, double tol, int max_iter) {
  if (!guess.finite()) fail(Error::Kind::Precondition, "newton_invert guess must be finite");
  Vec2 p = guess;
  for (int it = 0; it < max_iter; ++it) {
    Vec2 f;
    Mat2 jac;
    map.eval_fdf(p, f, jac);
    Vec2 r = f - q;
    double rn = r.norm();
    if (rn < tol) {
      // one polishing step when the Jacobian allows it
      if (std::abs(jac.det()) > kSingularDetScale * det_scale(jac)) p -= jac.solve(r);
      return p;
    }
    if (std::abs(jac.det()) < kSingularDetScale * det_scale(jac))
      fail(Error::Kind::Numeric, "singular Jacobian at a Newton iterate");
    Vec2 step = jac.solve(r);
    Vec2 p_next = p - step;
    double damp = 1.0;
    for (int k = 0; k < 8; ++k) {
      if ((map(p_next) - q).norm() < rn) break;
      damp *= 0.5;
      p_next = p - step * damp;
    }
    p = p_next;
  }
  fail(Error::Kind::Numeric, "newton_invert did not converge in " + std::to_string(max_iter) +
                                 " iterations");
}

namespace detail {

PathState init_state(const PlaneMap& map, const TargetPath& delta, Vec2 p, double t) {
  PathState st;
  double range = delta.t_end() - delta.t_begin();
  st.dt_max = range / 16.0;
  st.dt = range / 64.0;
  st.v_est = 1.0;
  try {
    Vec2 f;
    Mat2 jac;
    map.eval_fdf(p, f, jac);
    st.v_est = std::max(1e-12, jac.solve(delta.velocity(t)).norm());
  } catch (const Error&) {
    // singular start: keep the default and let stepping adapt
  }
  return st;
}

AdvanceOutcome advance_path(const PlaneMap& map, const TargetPath& delta, PreimagePath& path,
                            double t_target, PathState& st) {
  double range = delta.t_end() - delta.t_begin();
  const double t_min = 1e-10 * range;
  double t = path.end_t();
  Vec2 p = path.end_point();

  while (t < t_target - 1e-15 * range) {
    double dt_try = std::min(st.dt, t_target - t);
    double t_next = t + dt_try;
    Vec2 q = delta.at(t_next);
    bool ok = false;
    Vec2 p_next;
    double dp = 0.0;
    try {
      p_next = newton_invert(map, q, p, newton_tol(q), 25);
      dp = distance(p_next, p);
      double cap = 8.0 * st.v_est * dt_try + 1e-7 * (1.0 + p.norm());
      ok = dp <= cap;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) {
      st.dt *= 0.5;
      st.successes = 0;
      if (st.dt < t_min) return {false, t};
      continue;
    }
    t = t_next;
    p = p_next;
    path.points.emplace_back(t, p);
    path.residual_max = std::max(path.residual_max, (map(p) - q).norm());
    try {
      Vec2 f;
      Mat2 jac;
      map.eval_fdf(p, f, jac);
      st.v_est = std::max(1e-12, jac.solve(delta.velocity(t)).norm());
    } catch (const Error&) {
      // keep previous estimate near folds
    }
    if (++st.successes >= 4) {
      st.dt = std::min(st.dt * 2.0, st.dt_max);
      st.successes = 0;
    }
  }
  return {true, t};
}

Vec2 continue_straight(const PlaneMap& map, Vec2 q_from, Vec2 q_to, Vec2 p_start) {
  double u = 0.0, du = 1.0;
  Vec2 p = p_start;
  int guard = 0;
  while (u < 1.0) {
    if (++guard > 400) fail(Error::Kind::Numeric, "auxiliary arc continuation stalled");
    double u_next = std::min(1.0, u + du);
    Vec2 q = q_from + (q_to - q_from) * u_next;
    try {
      p = newton_invert(map, q, p, newton_tol(q), 25);
      u = u_next;
      du = std::min(1.0, du * 2.0);
    } catch (const Error&) {
      du *= 0.5;
      if (du < 1e-8) fail(Error::Kind::Numeric, "auxiliary arc continuation failed");
    }
  }
  return p;
}

}  // namespace detail

PreimagePath continue_path(const PlaneMap& map, const TargetPath& delta, Vec2 p_start) {
  double t0 = delta.t_begin();
  Vec2 q0 = delta.at(t0);
  if ((map(p_start) - q0).norm() >= newton_tol(q0))
    fail(Error::Kind::Precondition, "continue_path start violates the residual contract");

  PreimagePath path;
  path.points.emplace_back(t0, p_start);
  detail::PathState st = detail::init_state(map, delta, p_start, t0);

  double range = delta.t_end() - delta.t_begin();
  double t_cursor = t0;
  auto die_if_explained = [&](double t_stuck) {
    for (const CrossingRecord& e : delta.crossings) {
      if (e.gain) continue;  // deaths only happen on the loss side
      double s = 1e-3 * (1.0 + e.fold_preimage.norm());
      if (std::abs(t_stuck - e.t) < std::max(1e-4 * range, 1e-6) &&
          distance(path.end_point(), e.fold_preimage) < 10.0 * s) {
        path.died_at = e.t;
        path.points.emplace_back(e.t, e.fold_preimage);
        return true;
      }
    }
    return false;
  };

  while (t_cursor < delta.t_end() - 1e-15 * range) {
    auto out = detail::advance_path(map, delta, path, delta.t_end(), st);
    if (out.reached) return path;
    if (die_if_explained(out.t_stuck)) return path;
    fail(Error::Kind::Numeric,
         "continuation obstructed at t=" + format_double(out.t_stuck) +
             " away from any known crossing — a critical curve may be missing");
  }
  return path;
}

// ---------------------------------------------------------------------------
// Crossing discovery and refinement
// ---------------------------------------------------------------------------

namespace {

Polyline path_polyline(const TargetPath& delta) {
  std::vector<Vec2> pts;
  pts.reserve(delta.samples.size());
  for (const auto& [t, q] : delta.samples) pts.push_back(q);
  return make_polyline(std::move(pts), false);
}

struct SpecialPoints {
  std::vector<Vec2> cusp_images;
  std::vector<Vec2> double_points;
  double image_scale = 1.0;
};

SpecialPoints collect_special_points(const PlaneMap& map,
                                     std::span<const Polyline> images,
                                     std::span<const CriticalCurve> curves) {
  SpecialPoints sp;
  for (const Polyline& im : images)
    for (const Vec2& p : im.points) sp.image_scale = std::max(sp.image_scale, p.norm());
  for (const CriticalCurve& c : curves)
    for (const Cusp& cusp : c.cusps) sp.cusp_images.push_back(map(cusp.location));
  for (std::size_t k = 0; k < images.size(); ++k) {
    for (const auto& x : self_intersections(images[k]))
      if (!x.degenerate) sp.double_points.push_back(x.point);
    for (std::size_t j = k + 1; j < images.size(); ++j)
      for (const auto& x : polyline_intersections(images[k], images[j]))
        if (!x.degenerate) sp.double_points.push_back(x.point);
  }
  return sp;
}

}  // namespace

namespace detail {

// Newton on (p, t): F(p) - delta(t) = 0, det DF(p) = 0.
std::optional<RefinedCrossing> refine_crossing(const PlaneMap& map, const TargetPath& delta,
                                               Vec2 p_init, double t_init) {
  Vec2 p = p_init;
  double t = t_init;
  for (int it = 0; it < 60; ++it) {
    Jet2 j = map.jet(p);
    Vec2 q = delta.at(t);
    Vec2 r = j.value - q;
    double d = j.det();
    if (r.norm() < newton_tol(q) && std::abs(d) < j.det_tol())
      return RefinedCrossing{p, t};
    Vec2 vel = delta.velocity(t);
    Vec2 g = j.grad_det();
    double A[3][3] = {{j.jacobian.a, j.jacobian.b, -vel.x},
                      {j.jacobian.c, j.jacobian.d, -vel.y},
                      {g.x, g.y, 0.0}};
    double b[3] = {r.x, r.y, d};
    double x[3];
    if (!solve3(A, b, x)) return std::nullopt;
    p -= Vec2{x[0], x[1]};
    t -= x[2];
    t = std::clamp(t, delta.t_begin(), delta.t_end());
  }
  return std::nullopt;
}

// Unit direction in the image toward the side with two extra preimages:
// second derivative of F along the kernel direction.
std::optional<Vec2> fold_more_direction(const PlaneMap& map, Vec2 p_f) {
  Jet2 j = map.jet(p_f);
  Vec2 v = j.kernel_dir();
  Vec2 w{j.hess_x.quad(v), j.hess_y.quad(v)};
  double scale = 1.0 + j.jacobian.max_abs();
  if (w.norm() < 1e-8 * scale) return std::nullopt;
  return normalized(w);
}

}  // namespace detail

using detail::fold_more_direction;
using detail::refine_crossing;

std::vector<CrossingRecord> find_crossings(TargetPath& delta,
                                           std::span<const Polyline> image_curves,
                                           std::span<const CriticalCurve> critical_curves,
                                           const PlaneMap& map) {
  if (image_curves.size() != critical_curves.size())
    fail(Error::Kind::Precondition, "image curves must correspond to critical curves");

  SpecialPoints sp = collect_special_points(map, image_curves, critical_curves);
  const double guard = 1e-3 * sp.image_scale;
  Polyline dl = path_polyline(delta);

  std::vector<CrossingRecord> records;
  for (std::size_t k = 0; k < image_curves.size(); ++k) {
    if (image_curves[k].points.size() != critical_curves[k].points.size())
      fail(Error::Kind::Precondition, "image curve was resampled; indices must match");
    for (const SegmentHit& hit : polyline_intersections(dl, image_curves[k])) {
      double ta = delta.samples[hit.seg_a].first;
      double tb = delta.samples[hit.seg_a + 1].first;
      double t_est = ta + (tb - ta) * hit.ta;
      const Polyline& crit = critical_curves[k].points;
      Vec2 p_init = (crit.segment_a(hit.seg_b) + crit.segment_b(hit.seg_b)) * 0.5;

      auto refined = refine_crossing(map, delta, p_init, t_est);
      if (!refined) {
        if (hit.degenerate) continue;  // discretization artifact
        fail(Error::Kind::Numeric, "could not refine a crossing with an image curve");
      }
      Vec2 x = delta.at(refined->t_f);

      for (const Vec2& ci : sp.cusp_images)
        if (distance(x, ci) < guard)
          throw RerouteError(ci, "crossing within cusp guard of an image cusp");
      for (const Vec2& dp : sp.double_points)
        if (distance(x, dp) < guard)
          throw RerouteError(dp, "crossing within guard of an image double point");

      Vec2 vel = delta.velocity(refined->t_f);
      Vec2 img_tan = image_curves[k].segment_b(hit.seg_b) - image_curves[k].segment_a(hit.seg_b);
      if (vel.norm() > 0 && img_tan.norm() > 0 &&
          std::abs(cross(normalized(vel), normalized(img_tan))) < 0.05)
        throw RerouteError(x, "tangential crossing with an image curve");

      CrossingRecord rec;
      rec.t = refined->t_f;
      rec.point = x;
      rec.fold_preimage = refined->p_f;
      rec.curve = static_cast<int>(k);
      auto more = fold_more_direction(map, refined->p_f);
      if (more) {
        rec.more_dir = *more;
      } else {
        // degenerate quadratic part: probe local counts on both sides
        Vec2 n = normalized(perp(img_tan));
        double eta = 4.0 * guard;
        double r_loc = 0.25 * (1.0 + refined->p_f.norm());
        int ahead = local_preimage_count(map, x + n * eta, refined->p_f, r_loc);
        int behind = local_preimage_count(map, x - n * eta, refined->p_f, r_loc);
        if (ahead == behind)
          fail(Error::Kind::Numeric, "cannot determine the fold direction at a crossing");
        rec.more_dir = ahead > behind ? n : -n;
      }
      rec.gain = dot(vel, rec.more_dir) > 0;
      records.push_back(rec);
    }
  }

  std::sort(records.begin(), records.end(),
            [](const CrossingRecord& a, const CrossingRecord& b) { return a.t < b.t; });
  // merge duplicates produced by hits on shared polyline vertices
  std::vector<CrossingRecord> out;
  for (const CrossingRecord& r : records) {
    if (!out.empty() && std::abs(out.back().t - r.t) < 1e-9 &&
        distance(out.back().fold_preimage, r.fold_preimage) < 1e-6 * (1.0 + r.fold_preimage.norm()))
      continue;
    out.push_back(r);
  }
  delta.crossings = out;
  return out;
}

// ---------------------------------------------------------------------------
// Spawning at folds
// ---------------------------------------------------------------------------

std::pair<PreimagePath, PreimagePath> spawn_at_fold(const PlaneMap& map, Vec2 p_f,
                                                    const TargetPath& delta, double t_f, double s,
                                                    std::span<const Polyline> image_curves) {
  FoldStatus fs = fold_test(map, p_f);
  if (fs.verdict != FoldStatus::Verdict::Fold)
    fail(Error::Kind::Precondition, "spawn point does not pass the fold test");

  Jet2 j = map.jet(p_f);
  Vec2 v = j.kernel_dir();
  Vec2 w{j.hess_x.quad(v), j.hess_y.quad(v)};
  if (w.norm() < 1e-10) fail(Error::Kind::Numeric, "degenerate fold: no quadratic opening");
  Vec2 m = normalized(w);
  Vec2 vel = delta.velocity(t_f);
  if (!(dot(vel, m) > 0))
    fail(Error::Kind::Precondition,
         "loss-direction crossing: no spawn (partner paths die instead)");

  double range = delta.t_end() - delta.t_begin();
  Vec2 qf = map(p_f);

  std::string last_err = "spawn failed";
  for (int attempt = 0; attempt < 5; ++attempt, s *= 0.5) {
    // target just past the crossing, at about twice the image displacement
    double thickness = 0.5 * w.norm() * s * s;
    double eps = std::clamp(2.0 * thickness / std::max(vel.norm(), 1e-12), 1e-12 * range,
                            0.45 * (delta.t_end() - t_f));
    if (eps <= 0) fail(Error::Kind::Precondition, "crossing at the end of the path");
    Vec2 q_eps = delta.at(t_f + eps);

    Vec2 seeds[2] = {p_f + v * s, p_f - v * s};
    PreimagePath out[2];
    bool ok = true;
    for (int i = 0; i < 2 && ok; ++i) {
      Vec2 qi = map(seeds[i]);
      // the auxiliary arc must stay clear of F(C)
      if (dot(qi - qf, m) <= 0 || dot(q_eps - qf, m) <= 0) {
        ok = false;
        last_err = "auxiliary arc endpoint on the wrong side of the image curve";
        break;
      }
      bool arc_blocked = false;
      Polyline aux = make_polyline({qi, q_eps}, false);
      for (const Polyline& im : image_curves) {
        for (const auto& hitx : polyline_intersections(aux, im)) {
          if (distance(hitx.point, qf) > 6.0 * std::max(thickness, distance(qi, qf))) {
            arc_blocked = true;
            break;
          }
        }
        if (arc_blocked) break;
      }
      if (arc_blocked) {
        ok = false;
        last_err = "auxiliary arc crosses F(C)";
        break;
      }
      try {
        Vec2 p_end = detail::continue_straight(map, qi, q_eps, seeds[i]);
        out[i].points.emplace_back(t_f, p_f);
        out[i].points.emplace_back(t_f + eps, p_end);
        out[i].born_at = t_f;
        out[i].residual_max = (map(p_end) - q_eps).norm();
      } catch (const Error& e) {
        ok = false;
        last_err = e.what();
      }
    }
    if (!ok) continue;
    double sep = distance(out[0].end_point(), out[1].end_point());
    if (sep < s * 0.5) {
      last_err = "spawned branches converged to the same point (s too small)";
      continue;
    }
    return {out[0], out[1]};
  }
  fail(Error::Kind::Numeric, std::string("spawn_at_fold: ") + last_err);
}

// ---------------------------------------------------------------------------
// Full preimage engine
// ---------------------------------------------------------------------------

PreimageRun all_preimages(const PlaneMap& map, Vec2 q_target, const BaseSpec& base,
                          TargetPath route) {
  double range = route.t_end() - route.t_begin();
  if (distance(route.at(route.t_end()), q_target) > 1e-9 * (1.0 + q_target.norm()))
    fail(Error::Kind::Precondition, "route does not end at the target");

  PreimageRun run;
  run.base = base;

  std::vector<PreimagePath> paths;
  std::vector<detail::PathState> states;
  double t0 = route.t_begin();
  Vec2 q0 = route.at(t0);
  for (const Vec2& p : base.preimages) {
    if ((map(p) - q0).norm() >= newton_tol(q0))
      fail(Error::Kind::Precondition, "a base preimage violates the residual contract");
    PreimagePath path;
    path.id = static_cast<int>(paths.size());
    path.points.emplace_back(t0, p);
    states.push_back(detail::init_state(map, route, p, t0));
    paths.push_back(std::move(path));
  }

  auto advance_to = [&](double t_target, const CrossingRecord* event, double merge_tol,
                        int* deaths) {
    for (std::size_t i = 0; i < paths.size(); ++i) {
      PreimagePath& path = paths[i];
      if (!path.alive() || path.end_t() >= t_target - 1e-15 * range) continue;
      auto out = detail::advance_path(map, route, path, t_target, states[i]);
      if (out.reached) continue;
      bool explained = event && !event->gain &&
                       std::abs(out.t_stuck - event->t) < std::max(1e-4 * range, 1e-6) &&
                       distance(path.end_point(), event->fold_preimage) < merge_tol;
      if (explained) {
        path.died_at = event->t;
        path.points.emplace_back(event->t, event->fold_preimage);
        if (deaths) ++(*deaths);
      } else {
        fail(Error::Kind::Numeric,
             "path " + std::to_string(path.id) + " obstructed at t=" +
                 format_double(out.t_stuck) +
                 " away from any known crossing — a critical curve may be missing");
      }
    }
  };

  for (std::size_t e = 0; e < route.crossings.size(); ++e) {
    const CrossingRecord& ev = route.crossings[e];
    double gap_next =
        (e + 1 < route.crossings.size() ? route.crossings[e + 1].t : route.t_end()) - ev.t;
    double gap_prev = ev.t - (e > 0 ? route.crossings[e - 1].t : route.t_begin());
    double eps_after =
        std::max(std::min({0.25 * gap_next, 0.25 * gap_prev, 1e-3 * range}), 1e-9 * range);
    double t_after = ev.t + eps_after;

    double s_spawn = 1e-3 * (1.0 + ev.fold_preimage.norm());
    double merge_tol = 10.0 * s_spawn;

    int deaths = 0;
    advance_to(t_after, &ev, merge_tol, &deaths);

    if (ev.gain) {
      if (deaths != 0)
        fail(Error::Kind::Numeric, "paths died at a gain crossing (bookkeeping violated)");
      auto born = spawn_at_fold(map, ev.fold_preimage, route, ev.t, s_spawn, {});
      for (PreimagePath* np : {&born.first, &born.second}) {
        np->id = static_cast<int>(paths.size());
        states.push_back(detail::init_state(map, route, np->end_point(), np->end_t()));
        paths.push_back(std::move(*np));
        auto out = detail::advance_path(map, route, paths.back(), t_after, states.back());
        if (!out.reached)
          fail(Error::Kind::Numeric, "newly born path obstructed immediately after spawn");
      }
      ++run.gains;
    } else {
      if (deaths != 2)
        fail(Error::Kind::Numeric, "loss crossing retired " + std::to_string(deaths) +
                                       " paths; expected exactly 2 (Lemma: counts differ by two)");
      ++run.losses;
    }
  }

  advance_to(route.t_end(), nullptr, 0.0, nullptr);

  // gather, dedup, validate bookkeeping
  std::vector<Vec2> endpoints;
  for (const PreimagePath& p : paths)
    if (p.alive()) endpoints.push_back(p.end_point());

  double scale = 1.0;
  for (const Vec2& p : endpoints) scale = std::max(scale, p.norm());
  double dedup_tol = 1e-6 * scale;
  std::vector<Vec2> unique_pts;
  for (const Vec2& p : endpoints) {
    bool dup = false;
    for (const Vec2& u : unique_pts)
      if (distance(u, p) < dedup_tol) { dup = true; break; }
    if (!dup) unique_pts.push_back(p);
  }
  long expected = static_cast<long>(base.preimages.size()) + 2 * run.gains - 2 * run.losses;
  if (static_cast<long>(unique_pts.size()) != expected)
    fail(Error::Kind::Numeric,
         "preimage bookkeeping mismatch: got " + std::to_string(unique_pts.size()) +
             " distinct endpoints, expected " + std::to_string(expected));

  std::sort(unique_pts.begin(), unique_pts.end(), [](Vec2 a, Vec2 b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });

  run.result.target = q_target;
  run.result.points = unique_pts;
  for (const Vec2& p : unique_pts) run.result.residuals.push_back((map(p) - q_target).norm());
  run.paths = std::move(paths);
  run.route = std::move(route);
  return run;
}

// ---------------------------------------------------------------------------
// Seeds from the behavior at infinity
// ---------------------------------------------------------------------------

std::vector<Vec2> seeds_at_infinity(const PlaneMap& map, Vec2 q_alpha) {
  const auto& hint = map.infinity_hint();
  if (!hint) fail(Error::Kind::Precondition, "map has no infinity hint");
  int n = hint->degree;
  std::complex<double> q{q_alpha.x, q_alpha.y};
  std::complex<double> w = q / hint->coefficient;
  double r = std::pow(std::abs(w), 1.0 / n);
  double theta = std::arg(w) / n;

  // leading term must dominate twice the remainder along the seed circle
  double rem = 0.0;
  for (int i = 0; i < 32; ++i) {
    std::complex<double> z = std::polar(r, 2.0 * std::numbers::pi * i / 32.0);
    Vec2 f = map({z.real(), z.imag()});
    std::complex<double> lead = hint->coefficient * std::pow(z, n);
    rem = std::max(rem, std::hypot(f.x - lead.real(), f.y - lead.imag()));
  }
  if (!(std::abs(q) > 2.0 * rem))
    fail(Error::Kind::Precondition,
         "q_alpha too small: leading term does not dominate the remainder (enlarge |q_alpha|)");

  std::vector<Vec2> seeds;
  double tol = newton_tol(q_alpha);
  for (int k = 0; k < n; ++k) {
    std::complex<double> z = std::polar(r, theta + 2.0 * std::numbers::pi * k / n);
    Vec2 p = newton_invert(map, q_alpha, {z.real(), z.imag()}, tol);
    seeds.push_back(p);
  }
  double min_sep = 2.0 * r * std::sin(std::numbers::pi / n) * 0.2;
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t jv = i + 1; jv < seeds.size(); ++jv)
      if (distance(seeds[i], seeds[jv]) < min_sep)
        fail(Error::Kind::Numeric, "two infinity seeds merged (|q_alpha| too small)");
  return seeds;
}

// ---------------------------------------------------------------------------
// Route planning with automatic detours
// ---------------------------------------------------------------------------

namespace {

struct Detour {
  Vec2 center;
  double radius;
  int side;  // +1 / -1 relative to the route direction
};

TargetPath build_route(Vec2 from, Vec2 to, const std::vector<Detour>& detours, int n) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n) + 64);
  for (int i = 0; i < n; ++i) pts.push_back(from + (to - from) * (static_cast<double>(i) / (n - 1)));

  for (const Detour& d : detours) {
    std::vector<Vec2> next;
    next.reserve(pts.size() + 64);
    std::size_t i = 0;
    while (i < pts.size()) {
      if (distance(pts[i], d.center) >= d.radius || i == 0 || i == pts.size() - 1) {
        next.push_back(pts[i]);
        ++i;
        continue;
      }
      std::size_t jr = i;
      while (jr < pts.size() - 1 && distance(pts[jr], d.center) < d.radius) ++jr;
      Vec2 E = next.back(), X = pts[jr];
      double aE = std::atan2(E.y - d.center.y, E.x - d.center.x);
      double aX = std::atan2(X.y - d.center.y, X.x - d.center.x);
      double dth = aX - aE;
      while (dth <= -std::numbers::pi) dth += 2.0 * std::numbers::pi;
      while (dth > std::numbers::pi) dth -= 2.0 * std::numbers::pi;
      // two candidate arcs; pick the one bulging to the requested side
      Vec2 dir = normalized(to - from);
      double mid_side = cross(dir, d.center + Vec2{std::cos(aE + 0.5 * dth) * d.radius,
                                                   std::sin(aE + 0.5 * dth) * d.radius} -
                                       d.center) > 0
                            ? 1.0
                            : -1.0;
      if (mid_side * d.side < 0) dth += dth > 0 ? -2.0 * std::numbers::pi : 2.0 * std::numbers::pi;
      int steps = std::max(8, static_cast<int>(std::ceil(std::abs(dth) / 0.2)));
      double rE = distance(E, d.center), rX = distance(X, d.center);
      for (int sgm = 1; sgm < steps; ++sgm) {
        double u = static_cast<double>(sgm) / steps;
        double a = aE + dth * u;
        double rr = rE + (rX - rE) * u;
        next.push_back(d.center + Vec2{std::cos(a) * rr, std::sin(a) * rr});
      }
      i = jr;
    }
    pts = std::move(next);
  }

  // reparametrize by cumulative arc length into [0, 1]
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
  double total = cum.back();
  TargetPath path;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double t = total > 0 ? cum[i] / total : static_cast<double>(i) / (pts.size() - 1);
    if (!path.samples.empty() && t <= path.samples.back().first) continue;
    path.samples.emplace_back(t, pts[i]);
  }
  if (path.samples.back().first != 1.0) path.samples.emplace_back(1.0, pts.back());
  return path;
}

}  // namespace

TargetPath plan_route(const PlaneMap& map, std::span<const Polyline> image_curves,
                      std::span<const CriticalCurve> critical_curves, Vec2 from, Vec2 to) {
  double image_scale = 1.0;
  for (const Polyline& im : image_curves)
    for (const Vec2& p : im.points) image_scale = std::max(image_scale, p.norm());
  double guard = 1e-3 * image_scale;
  for (const Polyline& im : image_curves) {
    if (distance_to_polyline(to, im) < 2.0 * guard)
      fail(Error::Kind::Precondition, "target lies within the guard distance of F(C)");
    if (distance_to_polyline(from, im) < 2.0 * guard)
      fail(Error::Kind::Precondition, "base point lies within the guard distance of F(C)");
  }

  std::vector<Detour> detours;
  std::string last;
  for (int attempt = 0; attempt < 10; ++attempt) {
    TargetPath path = build_route(from, to, detours, 512);
    try {
      find_crossings(path, image_curves, critical_curves, map);
      return path;
    } catch (const RerouteError& e) {
      last = e.what();
      bool grown = false;
      for (Detour& d : detours) {
        if (distance(d.center, e.location) < d.radius + guard) {
          d.radius *= 2.0;
          d.side = -d.side;
          grown = true;
          break;
        }
      }
      if (!grown) detours.push_back({e.location, 8.0 * guard, attempt % 2 == 0 ? 1 : -1});
    }
  }
  fail(Error::Kind::Numeric, "route planning exhausted detour attempts: " + last);
}

}  // namespace atlas
