#include <algorithm>
#include <cmath>
#include <map>

#include "atlas/checks.hpp"
#include "atlas/continuation.hpp"
#include "continuation_detail.hpp"

namespace atlas {

namespace {

// Insert projected midpoints until image-space segment lengths fall below
// the requested density.
Polyline resample_for_density(const PlaneMap& map, const Polyline& curve, double density) {
  Polyline cur = curve;
  for (int pass = 0; pass < 7; ++pass) {
    bool refined = false;
    std::vector<Vec2> next;
    next.reserve(cur.points.size() * 2);
    std::size_t nseg = cur.segment_count();
    for (std::size_t i = 0; i < nseg; ++i) {
      Vec2 a = cur.segment_a(i), b = cur.segment_b(i);
      next.push_back(a);
      if (distance(map(a), map(b)) > density) {
        if (auto mid = project_to_critical(map, (a + b) * 0.5)) {
          next.push_back(*mid);
          refined = true;
        }
      }
    }
    if (!cur.closed) next.push_back(cur.points.back());
    cur = make_polyline(std::move(next), cur.closed);
    if (!refined) break;
  }
  return cur;
}

struct FlowerEvent {
  double t = 0.0;
  bool is_split = false;
  CrossingRecord rec;  // crossings only
  Vec2 cusp_location;  // splits only
};

struct ArcBuild {
  PreimagePath path;
  detail::PathState st;
  int start_link = -1;
  int end_link = -1;
  bool split_start = false, split_end = false;
  bool active = true;
};

struct LoopContext {
  const PlaneMap* map = nullptr;
  TargetPath delta;
  std::vector<FlowerEvent> events;
  double domain_scale = 1.0;
};

// Builds the target loop for component k, rotated to start at vertex j0.
TargetPath loop_path(const Polyline& image, std::size_t j0) {
  std::size_t n = image.points.size();
  TargetPath p;
  p.samples.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    std::size_t idx = (j0 + i) % n;
    p.samples.emplace_back(static_cast<double>(i) / n, image.points[idx]);
  }
  return p;
}

double wrap_param(double t) {
  t = std::fmod(t, 1.0);
  return t < 0 ? t + 1.0 : t;
}

// Finds all crossing and split events along the rotated loop of curve k.
std::vector<FlowerEvent> collect_events(const PlaneMap& map, TargetPath& delta,
                                        std::span<const Polyline> images,
                                        std::span<const CriticalCurve> curves,
                                        std::span<const Polyline> crit_polylines, std::size_t k,
                                        std::size_t j0, double guard) {
  std::vector<FlowerEvent> events;
  std::vector<Vec2> pts;
  for (const auto& [t, q] : delta.samples) pts.push_back(q);
  Polyline dl = make_polyline(std::move(pts), false);
  std::size_t n = images[k].points.size();

  std::vector<Vec2> cusp_images;
  std::vector<Vec2> cusp_locs;
  for (const CriticalCurve& c : curves)
    for (const Cusp& cu : c.cusps) {
      cusp_images.push_back(map(cu.location));
      cusp_locs.push_back(cu.location);
    }

  auto near_cusp_image = [&](Vec2 x) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < cusp_images.size(); ++i)
      if (distance(x, cusp_images[i]) < guard) return i;
    return std::nullopt;
  };

  auto push_crossing = [&](double t_est, Vec2 p_init) {
    auto refined = detail::refine_crossing(map, delta, p_init, t_est);
    if (!refined) return;  // grazing artifact
    Vec2 x = delta.at(refined->t_f);
    if (auto ci = near_cusp_image(x)) {
      FlowerEvent ev;
      ev.t = refined->t_f;
      ev.is_split = true;
      ev.cusp_location = cusp_locs[*ci];
      events.push_back(ev);
      return;
    }
    auto more = detail::fold_more_direction(map, refined->p_f);
    if (!more) return;
    FlowerEvent ev;
    ev.t = refined->t_f;
    ev.rec.t = refined->t_f;
    ev.rec.point = x;
    ev.rec.fold_preimage = refined->p_f;
    ev.rec.more_dir = *more;
    ev.rec.gain = dot(delta.velocity(refined->t_f), *more) > 0;
    events.push_back(ev);
  };

  // crossings with the images of the other components
  for (std::size_t jc = 0; jc < images.size(); ++jc) {
    if (jc == k) continue;
    for (const SegmentHit& hit : polyline_intersections(dl, images[jc])) {
      if (hit.degenerate) continue;
      double t_est = (hit.seg_a + hit.ta) / static_cast<double>(n);
      const Polyline& crit = crit_polylines[jc];
      Vec2 p_init = (crit.segment_a(hit.seg_b) + crit.segment_b(hit.seg_b)) * 0.5;
      push_crossing(t_est, p_init);
    }
  }

  // self-crossings: each double point is met twice along the loop
  for (const CurveCrossing& x : self_intersections(images[k])) {
    if (x.degenerate) continue;
    auto rotated_param = [&](int seg) {
      return wrap_param((static_cast<double>(seg) + 0.5 - static_cast<double>(j0)) / n);
    };
    const Polyline& crit = crit_polylines[k];
    Vec2 pa = (crit.segment_a(x.seg_a) + crit.segment_b(x.seg_a)) * 0.5;
    Vec2 pb = (crit.segment_a(x.seg_b) + crit.segment_b(x.seg_b)) * 0.5;
    push_crossing(rotated_param(x.seg_a), pb);
    push_crossing(rotated_param(x.seg_b), pa);
  }

  // splits where the loop passes its own cusp images
  for (const Cusp& cu : curves[k].cusps) {
    Vec2 ci = map(cu.location);
    double best = 1e300;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < delta.samples.size(); ++i) {
      double d = distance(delta.samples[i].second, ci);
      if (d < best) { best = d; best_i = i; }
    }
    FlowerEvent ev;
    ev.t = delta.samples[best_i].first;
    ev.is_split = true;
    ev.cusp_location = cu.location;
    events.push_back(ev);
  }

  std::sort(events.begin(), events.end(),
            [](const FlowerEvent& a, const FlowerEvent& b) { return a.t < b.t; });
  // drop duplicate events landed on the same parameter
  std::vector<FlowerEvent> out;
  for (const FlowerEvent& e : events) {
    if (!out.empty() && std::abs(out.back().t - e.t) < 1e-9 &&
        out.back().is_split == e.is_split)
      continue;
    out.push_back(e);
  }
  return out;
}

// Regular (noncritical) preimages of the base image point q0.
std::vector<Vec2> base_regular_preimages(const PlaneMap& map, Vec2 q0, Vec2 p_fold,
                                         const Rect& oracle_window, double image_scale) {
  auto more = detail::fold_more_direction(map, p_fold);
  if (!more)
    fail(Error::Kind::Numeric, "flower base: degenerate fold at the base point");
  double eta = 1e-4 * image_scale;
  Vec2 q_more = q0 + *more * eta;
  PreimageSet set = brute_force_preimages_auto(map, q_more, oracle_window);
  if (set.points.size() < 2)
    fail(Error::Kind::Numeric, "flower base: oracle found fewer than the fold pair");

  // remove the two points belonging to the fold pair near p_fold
  std::vector<Vec2> pts = set.points;
  std::sort(pts.begin(), pts.end(), [&](Vec2 a, Vec2 b) {
    return distance(a, p_fold) < distance(b, p_fold);
  });
  double pair_limit = 0.25 * (1.0 + p_fold.norm());
  if (distance(pts[1], p_fold) > pair_limit)
    fail(Error::Kind::Numeric, "flower base: fold pair not found near the critical curve");
  std::vector<Vec2> regs(pts.begin() + 2, pts.end());
  for (Vec2& p : regs) p = newton_invert(map, q0, p, newton_tol(q0));
  std::sort(regs.begin(), regs.end(),
            [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  return regs;
}

// Chain assembly: connect arc endpoints sharing a link id.
std::vector<FlowerArc> assemble(std::vector<ArcBuild>& arcs, int image_curve) {
  struct Slot { int arc; bool at_end; };
  std::map<int, std::vector<Slot>> by_link;
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    if (arcs[a].start_link >= 0) by_link[arcs[a].start_link].push_back({a, false});
    if (arcs[a].end_link >= 0) by_link[arcs[a].end_link].push_back({a, true});
  }
  auto neighbor = [&](int arc, bool at_end) -> std::optional<Slot> {
    int link = at_end ? arcs[arc].end_link : arcs[arc].start_link;
    if (link < 0) return std::nullopt;
    const auto& slots = by_link[link];
    if (slots.size() != 2) return std::nullopt;
    for (const Slot& s : slots)
      if (s.arc != arc || s.at_end != at_end) return s;
    return std::nullopt;
  };

  std::vector<bool> used(arcs.size(), false);
  std::vector<FlowerArc> out;

  auto emit_chain = [&](int start_arc, bool enter_at_end) {
    std::vector<Vec2> pts;
    int arc = start_arc;
    bool entry_end = enter_at_end;
    bool closed = false;
    while (true) {
      used[arc] = true;
      const auto& ppts = arcs[arc].path.points;
      if (entry_end) {
        for (auto it = ppts.rbegin(); it != ppts.rend(); ++it) pts.push_back(it->second);
      } else {
        for (const auto& [t, p] : ppts) pts.push_back(p);
      }
      bool exit_end = !entry_end;
      auto next = neighbor(arc, exit_end);
      if (!next) break;
      if (next->arc == start_arc) { closed = true; break; }
      if (used[next->arc]) break;
      arc = next->arc;
      entry_end = next->at_end;
    }
    if (pts.size() < 2) return;
    FlowerArc fa;
    fa.polyline = make_polyline(std::move(pts), closed);
    fa.critical = false;
    fa.image_curve = image_curve;
    out.push_back(std::move(fa));
  };

  // open chains first (start from endpoints with no partner)
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
    if (used[a]) continue;
    for (bool at_end : {false, true}) {
      if (used[a]) break;
      if (!neighbor(a, at_end)) emit_chain(a, at_end);
    }
  }
  for (int a = 0; a < static_cast<int>(arcs.size()); ++a)
    if (!used[a]) emit_chain(a, false);  // cycles
  return out;
}

// Runs the branch engine along one loop/arc and returns the stitched arcs.
std::vector<FlowerArc> run_component(const PlaneMap& map, LoopContext& ctx,
                                     const std::vector<Vec2>& seeds, int image_curve,
                                     bool closed_loop, int* link_counter) {
  std::vector<ArcBuild> arcs;
  std::vector<int> active;  // indices of arcs being advanced
  double range = ctx.delta.t_end() - ctx.delta.t_begin();
  double t0 = ctx.delta.t_begin();

  std::vector<int> seam_links;  // per seed, the link id at the seam
  for (const Vec2& s : seeds) {
    ArcBuild ab;
    ab.path.id = static_cast<int>(arcs.size());
    ab.path.points.emplace_back(t0, s);
    ab.st = detail::init_state(map, ctx.delta, s, t0);
    if (closed_loop) {
      ab.start_link = (*link_counter)++;
      seam_links.push_back(ab.start_link);
    }
    active.push_back(static_cast<int>(arcs.size()));
    arcs.push_back(std::move(ab));
  }

  auto advance_active = [&](double t_target, const FlowerEvent* ev, int* deaths,
                            std::vector<int>* died) {
    for (int idx : std::vector<int>(active)) {
      ArcBuild& ab = arcs[idx];
      if (ab.path.end_t() >= t_target - 1e-15 * range) continue;
      auto outc = detail::advance_path(map, ctx.delta, ab.path, t_target, ab.st);
      if (outc.reached) continue;
      bool explained = false;
      if (ev && !ev->is_split && !ev->rec.gain) {
        double merge_tol = 10.0 * 1e-3 * (1.0 + ev->rec.fold_preimage.norm());
        if (std::abs(outc.t_stuck - ev->t) < std::max(1e-3 * range, 1e-6) &&
            distance(ab.path.end_point(), ev->rec.fold_preimage) < merge_tol)
          explained = true;
      }
      if (ev && ev->is_split &&
          distance(ab.path.end_point(), ev->cusp_location) < 0.1 * ctx.domain_scale) {
        // obstructed on the cusp itself: handle it as the split branch
        ab.path.points.emplace_back(ev->t, ev->cusp_location);
        ab.split_end = true;
        ab.path.split_end = true;
        active.erase(std::remove(active.begin(), active.end(), idx), active.end());
        if (died) died->push_back(~idx);  // marker: split via obstruction
        continue;
      }
      if (!explained)
        fail(Error::Kind::Numeric,
             "flower branch obstructed at t=" + format_double(outc.t_stuck) +
                 " away from known events");
      ab.path.died_at = ev->rec.t;
      ab.path.points.emplace_back(ev->rec.t, ev->rec.fold_preimage);
      active.erase(std::remove(active.begin(), active.end(), idx), active.end());
      if (deaths) ++(*deaths);
      if (died) died->push_back(idx);
    }
  };

  for (std::size_t e = 0; e < ctx.events.size(); ++e) {
    const FlowerEvent& ev = ctx.events[e];
    double gap_next = (e + 1 < ctx.events.size() ? ctx.events[e + 1].t : ctx.delta.t_end()) - ev.t;
    double gap_prev = ev.t - (e > 0 ? ctx.events[e - 1].t : t0);
    double eps = std::max(std::min({0.25 * gap_next, 0.25 * gap_prev, 2e-3 * range}),
                          1e-8 * range);
    double t_after = ev.t + eps;

    if (ev.is_split) {
      double t_before = ev.t - eps;
      advance_active(t_before, &ev, nullptr, nullptr);
      // the branch through the cusp is the one closest to it
      int split_idx = -1;
      double best = 0.05 * ctx.domain_scale;
      for (int idx : active) {
        double d = distance(arcs[idx].path.end_point(), ev.cusp_location);
        if (d < best) { best = d; split_idx = idx; }
      }
      if (split_idx >= 0) {
        ArcBuild& ab = arcs[split_idx];
        Vec2 prev = ab.path.end_point();
        ab.path.points.emplace_back(ev.t, ev.cusp_location);
        ab.split_end = true;
        ab.path.split_end = true;
        active.erase(std::remove(active.begin(), active.end(), split_idx), active.end());

        // restart on the far side of the cusp
        bool restarted = false;
        double eps_try = eps;
        for (int attempt = 0; attempt < 3 && !restarted; ++attempt, eps_try *= 3.0) {
          double t_new = std::min(ev.t + eps_try, ctx.delta.t_end());
          Vec2 seed = ev.cusp_location * 2.0 - prev;
          try {
            Vec2 q = ctx.delta.at(t_new);
            Vec2 p_new = newton_invert(map, q, seed, newton_tol(q));
            ArcBuild nb;
            nb.path.id = static_cast<int>(arcs.size());
            nb.path.points.emplace_back(ev.t, ev.cusp_location);
            nb.path.points.emplace_back(t_new, p_new);
            nb.split_start = true;
            nb.path.split_start = true;
            nb.st = detail::init_state(map, ctx.delta, p_new, t_new);
            active.push_back(static_cast<int>(arcs.size()));
            arcs.push_back(std::move(nb));
            restarted = true;
          } catch (const Error&) {
          }
        }
        // when the restart fails the arc stays open at the cusp (reported as such)
      }
      advance_active(t_after, &ev, nullptr, nullptr);
      continue;
    }

    int deaths = 0;
    std::vector<int> died;
    advance_active(t_after, &ev, &deaths, &died);
    if (ev.rec.gain) {
      if (deaths != 0)
        fail(Error::Kind::Numeric, "flower: death at a gain crossing");
      double s = 1e-3 * (1.0 + ev.rec.fold_preimage.norm());
      auto born = spawn_at_fold(map, ev.rec.fold_preimage, ctx.delta, ev.t, s, {});
      int link = (*link_counter)++;
      for (PreimagePath* np : {&born.first, &born.second}) {
        ArcBuild nb;
        nb.path = std::move(*np);
        nb.path.id = static_cast<int>(arcs.size());
        nb.start_link = link;
        nb.st = detail::init_state(map, ctx.delta, nb.path.end_point(), nb.path.end_t());
        active.push_back(static_cast<int>(arcs.size()));
        arcs.push_back(std::move(nb));
        auto outc = detail::advance_path(map, ctx.delta, arcs.back().path, t_after,
                                         arcs.back().st);
        if (!outc.reached)
          fail(Error::Kind::Numeric, "flower: born branch obstructed after spawn");
      }
    } else {
      std::vector<int> genuine;
      for (int d : died)
        if (d >= 0) genuine.push_back(d);
      if (genuine.size() != 2)
        fail(Error::Kind::Numeric,
             "flower: loss crossing retired " + std::to_string(genuine.size()) +
                 " branches; expected 2");
      int link = (*link_counter)++;
      arcs[genuine[0]].end_link = link;
      arcs[genuine[1]].end_link = link;
    }
  }

  advance_active(ctx.delta.t_end(), nullptr, nullptr, nullptr);

  if (closed_loop) {
    // seam: match surviving ends with the starting seeds
    std::vector<bool> taken(seeds.size(), false);
    for (int idx : active) {
      Vec2 endp = arcs[idx].path.end_point();
      double best = 1e300;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (taken[i]) continue;
        double d = distance(endp, seeds[i]);
        if (d < best) { best = d; best_i = i; }
      }
      double tol = 1e-4 * (1.0 + endp.norm());
      if (best > tol)
        fail(Error::Kind::Numeric,
             "flower: seam endpoint does not match any base preimage (distance " +
                 format_double(best) + ")");
      taken[best_i] = true;
      arcs[idx].end_link = seam_links[best_i];
    }
    for (bool t : taken)
      if (!t && !active.empty())
        fail(Error::Kind::Numeric, "flower: unmatched base preimage at the seam");
  }

  return assemble(arcs, image_curve);
}

}  // namespace

std::vector<FlowerArc> build_flower(const PlaneMap& map, std::span<const CriticalCurve> curves,
                                    double density) {
  if (curves.empty()) return {};

  double image_scale = 1.0;
  double domain_scale = 1.0;
  Rect bbox{1e300, 1e300, -1e300, -1e300};
  for (const CriticalCurve& c : curves) {
    for (const Vec2& p : c.points.points) {
      domain_scale = std::max(domain_scale, p.norm());
      bbox.x0 = std::min(bbox.x0, p.x); bbox.y0 = std::min(bbox.y0, p.y);
      bbox.x1 = std::max(bbox.x1, p.x); bbox.y1 = std::max(bbox.y1, p.y);
      image_scale = std::max(image_scale, map(p).norm());
    }
  }
  Rect oracle_window = bbox.expanded(2.0 * std::max(bbox.width(), std::max(bbox.height(), 1.0)));
  if (!(density > 0)) density = 0.01 * image_scale;
  double guard = 1e-3 * image_scale;

  std::vector<Polyline> crit;
  std::vector<Polyline> images;
  for (const CriticalCurve& c : curves) {
    Polyline r = resample_for_density(map, c.points, density);
    crit.push_back(r);
    images.push_back(image_of_curve(map, r));
  }

  std::vector<FlowerArc> out;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    FlowerArc critical_arc;
    critical_arc.polyline = curves[k].points;
    critical_arc.critical = true;
    out.push_back(std::move(critical_arc));
  }

  int link_counter = 0;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Polyline& image = images[k];
    std::size_t n = image.points.size();

    if (image.closed) {
      // pick the start vertex farthest from special points
      std::vector<Vec2> special;
      for (const CriticalCurve& c : curves)
        for (const Cusp& cu : c.cusps) special.push_back(map(cu.location));
      for (std::size_t jc = 0; jc < images.size(); ++jc) {
        if (jc == k) continue;
        for (const auto& h : polyline_intersections(image, images[jc]))
          if (!h.degenerate) special.push_back(h.point);
      }
      for (const auto& x : self_intersections(image))
        if (!x.degenerate) special.push_back(x.point);

      std::size_t j0 = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        double d = 1e300;
        for (const Vec2& s : special) d = std::min(d, distance(image.points[i], s));
        if (d > best) { best = d; j0 = i; }
      }

      LoopContext ctx;
      ctx.map = &map;
      ctx.delta = loop_path(image, j0);
      ctx.domain_scale = domain_scale;
      ctx.events = collect_events(map, ctx.delta, images, curves, crit, k, j0, guard);

      Vec2 q0 = ctx.delta.samples.front().second;
      Vec2 p_fold = crit[k].points[j0];
      std::vector<Vec2> seeds = base_regular_preimages(map, q0, p_fold, oracle_window,
                                                       image_scale);
      if (seeds.empty()) continue;  // fold normal forms: the flower is just C
      auto arcs = run_component(map, ctx, seeds, static_cast<int>(k), true, &link_counter);
      out.insert(out.end(), arcs.begin(), arcs.end());
    } else {
      // open (window-truncated) component: run from a mid-curve base both ways
      std::size_t j0 = n / 2;
      Vec2 q0 = image.points[j0];
      Vec2 p_fold = crit[k].points[j0];
      std::vector<Vec2> seeds;
      try {
        seeds = base_regular_preimages(map, q0, p_fold, oracle_window, image_scale);
      } catch (const Error&) {
        continue;  // base on a degenerate stretch: skip the component
      }
      if (seeds.empty()) continue;

      for (int dir = 0; dir < 2; ++dir) {
        TargetPath half;
        if (dir == 0) {
          for (std::size_t i = j0; i < n; ++i)
            half.samples.emplace_back(static_cast<double>(i - j0) / (n - j0), image.points[i]);
        } else {
          for (std::size_t i = 0; i <= j0; ++i)
            half.samples.emplace_back(static_cast<double>(i) / (j0 + 1),
                                      image.points[j0 - i]);
        }
        if (half.samples.size() < 2) continue;
        LoopContext ctx;
        ctx.map = &map;
        ctx.delta = std::move(half);
        ctx.domain_scale = domain_scale;
        ctx.events.clear();  // truncated components: keep the engine eventless
        try {
          auto arcs = run_component(map, ctx, seeds, static_cast<int>(k), false, &link_counter);
          out.insert(out.end(), arcs.begin(), arcs.end());
        } catch (const Error&) {
          // obstruction on an unbounded branch: report what was traced so far
        }
      }
    }
  }
  return out;
}

}  // namespace atlas
