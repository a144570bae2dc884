#include "atlas/critical.hpp"

#include <algorithm>
#include <cmath>

namespace atlas {

namespace {

double det_at(const PlaneMap& map, Vec2 p) { return map.jet(p).det(); }

// Newton along the line p + s*dir for det DF = 0. Returns nullopt when the
// correction does not converge or wanders farther than max_dist.
std::optional<Vec2> newton_on_line(const PlaneMap& map, Vec2 p, Vec2 dir, double max_dist,
                                   const TraceSettings& ts) {
  double s = 0.0;
  for (int it = 0; it < 30; ++it) {
    Vec2 q = p + dir * s;
    Jet2 j = map.jet(q);
    double f = j.det();
    if (std::abs(f) < j.det_tol(ts.tol_scale)) return q;
    double fp = dot(j.grad_det(), dir);
    if (std::abs(fp) < ts.grad_tol) return std::nullopt;
    s -= f / fp;
    if (std::abs(s) > max_dist) return std::nullopt;
  }
  return std::nullopt;
}

struct CurveFrame {
  Vec2 point;
  Vec2 tangent;  // unit, consistent travel direction
};

// Tangent of the level set at p, aligned with `prev` when given.
std::optional<CurveFrame> frame_at(const PlaneMap& map, Vec2 p, std::optional<Vec2> prev,
                                   const TraceSettings& ts) {
  Jet2 j = map.jet(p);
  Vec2 g = j.grad_det();
  if (g.norm() <= ts.grad_tol) return std::nullopt;
  Vec2 t = normalized(perp(g));
  if (prev && dot(t, *prev) < 0) t = -t;
  return CurveFrame{p, t};
}

}  // namespace

std::vector<std::pair<Vec2, Vec2>> scan_seeds(const PlaneMap& map, const Rect& window,
                                              int grid_n) {
  if (grid_n < 2) fail(Error::Kind::Precondition, "scan grid must be at least 2");
  int n = grid_n;
  std::vector<double> det((n + 1) * (n + 1));
  auto corner = [&](int i, int jr) -> Vec2 {
    return {window.x0 + window.width() * i / n, window.y0 + window.height() * jr / n};
  };
  for (int jr = 0; jr <= n; ++jr)
    for (int i = 0; i <= n; ++i) det[jr * (n + 1) + i] = det_at(map, corner(i, jr));

  std::vector<std::pair<Vec2, Vec2>> out;
  for (int jr = 0; jr <= n; ++jr) {
    for (int i = 0; i <= n; ++i) {
      double d0 = det[jr * (n + 1) + i];
      if (i < n) {
        double d1 = det[jr * (n + 1) + i + 1];
        if (d0 * d1 < 0) {
          Vec2 a = corner(i, jr), b = corner(i + 1, jr);
          out.emplace_back(d0 > 0 ? a : b, d0 > 0 ? b : a);
        }
      }
      if (jr < n) {
        double d1 = det[(jr + 1) * (n + 1) + i];
        if (d0 * d1 < 0) {
          Vec2 a = corner(i, jr), b = corner(i, jr + 1);
          out.emplace_back(d0 > 0 ? a : b, d0 > 0 ? b : a);
        }
      }
    }
  }
  return out;
}

Vec2 refine_critical_point(const PlaneMap& map, Vec2 p_plus, Vec2 p_minus,
                           const TraceSettings& ts) {
  double d_plus = det_at(map, p_plus), d_minus = det_at(map, p_minus);
  if (!(d_plus * d_minus < 0))
    fail(Error::Kind::Precondition, "refine_critical_point: endpoints have the same det sign");

  // bisection first to shrink the bracket
  double lo = 0.0, hi = 1.0;
  auto at = [&](double t) { return p_plus + (p_minus - p_plus) * t; };
  double d_lo = d_plus;
  for (int i = 0; i < 30; ++i) {
    double mid = 0.5 * (lo + hi);
    double dm = det_at(map, at(mid));
    if (dm == 0.0) { lo = hi = mid; break; }
    if (dm * d_lo > 0) { lo = mid; d_lo = dm; } else { hi = mid; }
  }

  // then 1-D Newton on t -> det((1-t) p+ + t p-)
  double t = 0.5 * (lo + hi);
  Vec2 dirv = p_minus - p_plus;
  for (int it = 0; it < 50; ++it) {
    Jet2 j = map.jet(at(t));
    double f = j.det();
    if (std::abs(f) < j.det_tol(ts.tol_scale)) return at(t);
    double fp = dot(j.grad_det(), dirv);
    if (fp == 0.0) break;
    double t_new = t - f / fp;
    if (t_new < -0.5 || t_new > 1.5) break;
    t = t_new;
  }
  Jet2 j = map.jet(at(t));
  if (std::abs(j.det()) < j.det_tol(ts.tol_scale)) return at(t);
  fail(Error::Kind::Numeric, "refine_critical_point did not converge");
}

FoldStatus fold_test(const PlaneMap& map, Vec2 p, const TraceSettings& ts) {
  FoldStatus st;
  Jet2 j = map.jet(p);
  if (std::abs(j.det()) >= j.det_tol(ts.tol_scale)) {
    st.verdict = FoldStatus::Verdict::Regular;
    return st;
  }
  st.is_critical = true;
  Vec2 g = j.grad_det();
  st.grad_norm = g.norm();
  if (st.grad_norm <= ts.grad_tol) {
    st.verdict = FoldStatus::Verdict::Degenerate;
    return st;
  }
  Vec2 v = j.kernel_dir();
  st.kernel_alignment = dot(g, v);
  st.verdict = std::abs(st.kernel_alignment) > ts.align_candidate_tol * (1.0 + st.grad_norm)
                   ? FoldStatus::Verdict::Fold
                   : FoldStatus::Verdict::CuspCandidate;
  return st;
}

std::optional<Vec2> project_to_critical(const PlaneMap& map, Vec2 q, const TraceSettings& ts) {
  Vec2 p = q;
  for (int it = 0; it < 40; ++it) {
    Jet2 j = map.jet(p);
    double f = j.det();
    if (std::abs(f) < j.det_tol(ts.tol_scale)) return p;
    Vec2 g = j.grad_det();
    if (g.norm() <= ts.grad_tol) return std::nullopt;
    p -= g * (f / g.norm2());
  }
  return std::nullopt;
}

CriticalCurve trace_critical_curve(const PlaneMap& map, Vec2 p0, double h, const Rect& window,
                                   const TraceSettings& ts) {
  {
    Jet2 j0 = map.jet(p0);
    if (std::abs(j0.det()) >= j0.det_tol(ts.tol_scale) * 10)
      fail(Error::Kind::Precondition, "trace start is not on the critical set");
  }
  auto f0 = frame_at(map, p0, std::nullopt, ts);
  if (!f0)
    fail(Error::Kind::Numeric, "grad det DF vanishes at the trace start (degenerate)");

  auto trace_dir = [&](Vec2 dir0, std::vector<Vec2>& pts, bool& closed) {
    closed = false;
    CurveFrame cur{p0, dir0};
    double hcur = h;
    double arc = 0.0;
    int accepted = 0;
    for (int step = 0; step < ts.max_steps; ++step) {
      bool ok = false;
      Vec2 p_new;
      while (true) {
        Vec2 q = cur.point + cur.tangent * hcur;  // predictor
        Jet2 jq = map.jet(q);
        Vec2 gq = jq.grad_det();
        std::optional<Vec2> corrected;
        if (gq.norm() > ts.grad_tol)
          corrected = newton_on_line(map, q, normalized(gq), 2.0 * hcur, ts);
        if (corrected) {
          auto fr = frame_at(map, *corrected, cur.tangent, ts);
          if (fr) {
            double turn = std::abs(std::atan2(cross(cur.tangent, fr->tangent),
                                              dot(cur.tangent, fr->tangent)));
            double spacing = distance(cur.point, *corrected);
            if (turn <= ts.max_turn && spacing >= hcur * 0.25 && spacing <= hcur * 2.0) {
              p_new = *corrected;
              cur = *fr;
              ok = true;
              break;
            }
          }
        }
        hcur *= 0.5;
        if (hcur < h * 0.25 - 1e-15)
          fail(Error::Kind::Numeric, "trace step underflow (curvature or degeneracy)");
      }
      if (!ok) break;
      ++accepted;
      arc += distance(pts.back(), p_new);

      if (!window.contains(p_new)) return false;  // truncated at the window

      // closure test against the seed
      if (accepted >= 4 && arc > 3.0 * h && distance(p_new, p0) < 0.75 * h &&
          dot(cur.tangent, dir0) > 0.3) {
        closed = true;
        return true;
      }
      pts.push_back(p_new);
      hcur = std::min(h, hcur * 2.0);
    }
    fail(Error::Kind::Numeric, "trace exceeded the step budget without closing");
  };

  CriticalCurve curve;
  curve.step_h = h;
  std::vector<Vec2> fwd{p0};
  bool closed = false;
  bool stayed = trace_dir(f0->tangent, fwd, closed);

  if (closed) {
    curve.points = make_polyline(std::move(fwd), true);
  } else if (!stayed) {
    // open arc: trace the other direction and join
    std::vector<Vec2> bwd{p0};
    bool closed_b = false;
    trace_dir(-f0->tangent, bwd, closed_b);
    std::vector<Vec2> all(bwd.rbegin(), bwd.rend());
    all.insert(all.end(), fwd.begin() + 1, fwd.end());
    curve.points = make_polyline(std::move(all), false);
    curve.truncated = true;
  }

  if (curve.points.closed && curve.points.signed_area() < 0) curve.points.reverse();
  curve.orientation = +1;

  // det sign immediately left of travel, probed from a mid segment
  std::size_t mid = curve.points.size() / 2;
  Vec2 a = curve.points.points[mid % curve.points.size()];
  Vec2 b = curve.points.points[(mid + 1) % curve.points.size()];
  Vec2 t = normalized(b - a);
  double d = det_at(map, (a + b) * 0.5 + side_normal(t, Side::Left) * (0.5 * h));
  curve.det_side_left = d > 0 ? 1 : -1;
  return curve;
}

std::vector<Cusp> locate_cusps(const PlaneMap& map, const CriticalCurve& curve,
                               const TraceSettings& ts) {
  const Polyline& pl = curve.points;
  std::size_t n = pl.size();
  if (n < 3) return {};

  // kernel vectors with sign made continuous along the trace
  std::vector<Vec2> kernels(n);
  std::vector<double> align(n);
  for (std::size_t i = 0; i < n; ++i) {
    Jet2 j = map.jet(pl.points[i]);
    Vec2 v = j.kernel_dir();
    if (i > 0 && dot(v, kernels[i - 1]) < 0) v = -v;
    kernels[i] = v;
    align[i] = dot(j.grad_det(), v);
  }

  std::size_t seg_count = pl.closed ? n : n - 1;
  std::vector<Cusp> cusps;
  for (std::size_t i = 0; i < seg_count; ++i) {
    std::size_t i2 = (i + 1) % n;
    double a0 = align[i], a1 = align[i2];
    // wrap segment must respect the continuous kernel sign across the seam
    if (pl.closed && i2 == 0) {
      Vec2 v0 = kernels[0];
      if (dot(v0, kernels[i]) < 0) a1 = -a1;
    }
    if (a0 == 0.0) {
      Jet2 j = map.jet(pl.points[i]);
      cusps.push_back({pl.points[i], static_cast<double>(i), Side::Left, j.kernel_dir()});
      continue;
    }
    if (a0 * a1 >= 0) continue;

    // bisection in arc parameter with on-curve projection
    Vec2 pa = pl.points[i], pb = pl.points[i2];
    Vec2 ka = kernels[i];
    double lo = 0.0, hi = 1.0;
    double alo = a0;
    Vec2 loc = pa;
    for (int it = 0; it < 60 && (hi - lo) * distance(pa, pb) > 1e-10; ++it) {
      double mid = 0.5 * (lo + hi);
      auto proj = project_to_critical(map, pa + (pb - pa) * mid, ts);
      if (!proj) fail(Error::Kind::Numeric, "cusp bisection left the critical curve");
      Jet2 j = map.jet(*proj);
      Vec2 v = j.kernel_dir();
      if (dot(v, ka) < 0) v = -v;
      double am = dot(j.grad_det(), v);
      loc = *proj;
      if (am * alo > 0) { lo = mid; alo = am; } else { hi = mid; }
    }
    Jet2 j = map.jet(loc);
    cusps.push_back({loc, static_cast<double>(i) + 0.5 * (lo + hi), Side::Left, j.kernel_dir()});
  }
  return cusps;
}

int local_preimage_count(const PlaneMap& map, Vec2 q, Vec2 center, double radius) {
  std::vector<Vec2> found;
  const int grid = 9;
  double tol = 1e-10 * (1.0 + q.norm());
  for (int i = 0; i < grid; ++i) {
    for (int jg = 0; jg < grid; ++jg) {
      Vec2 p{center.x + radius * (2.0 * i / (grid - 1) - 1.0),
             center.y + radius * (2.0 * jg / (grid - 1) - 1.0)};
      bool converged = false;
      for (int it = 0; it < 40; ++it) {
        Vec2 f;
        Mat2 jac;
        map.eval_fdf(p, f, jac);
        Vec2 r = f - q;
        if (r.norm() < tol) { converged = true; break; }
        double scale = 1.0 + std::abs(jac.a * jac.d) + std::abs(jac.b * jac.c);
        if (std::abs(jac.det()) < 1e-13 * scale) break;
        Vec2 step = jac.solve(r);
        double damp = 1.0;
        Vec2 p_next = p - step;
        for (int k = 0; k < 6; ++k) {
          if ((map(p_next) - q).norm() < r.norm()) break;
          damp *= 0.5;
          p_next = p - step * damp;
        }
        p = p_next;
        if (distance(p, center) > 3.0 * radius) break;
      }
      if (!converged || distance(p, center) > 1.2 * radius) continue;
      bool dup = false;
      for (const Vec2& g : found)
        if (distance(g, p) < 1e-6 * (1.0 + center.norm())) { dup = true; break; }
      if (!dup) found.push_back(p);
    }
  }
  return static_cast<int>(found.size());
}

Side cusp_effective_side(const PlaneMap& map, const Cusp& cusp, const CriticalCurve& curve) {
  const Polyline& pl = curve.points;
  std::size_t i = static_cast<std::size_t>(cusp.curve_index) % pl.size();
  Vec2 tangent = normalized(pl.segment_b(i) - pl.segment_a(i));

  double scale = 1.0 + cusp.location.norm();
  double probe = 1e-3 * scale;
  for (int attempt = 0; attempt < 5; ++attempt) {
    double r_loc = 6.0 * std::sqrt(probe * scale);
    Vec2 left_p = cusp.location + side_normal(tangent, Side::Left) * probe;
    Vec2 right_p = cusp.location + side_normal(tangent, Side::Right) * probe;
    int n_left = local_preimage_count(map, map(left_p), cusp.location, r_loc);
    int n_right = local_preimage_count(map, map(right_p), cusp.location, r_loc);
    if (n_left == 3 && n_right == 1) return Side::Left;
    if (n_right == 3 && n_left == 1) return Side::Right;
    probe *= 0.5;  // ambiguous counts: shrink and retry
  }
  fail(Error::Kind::Numeric, "cusp effectiveness ambiguous after probe shrinking");
}

Polyline image_of_curve(const PlaneMap& map, const Polyline& curve) {
  std::vector<Vec2> pts;
  pts.reserve(curve.points.size());
  for (const Vec2& p : curve.points) pts.push_back(map(p));
  Polyline out;
  out.points = std::move(pts);  // no resampling, no cleaning: indices must match
  out.closed = curve.closed;
  return out;
}

std::vector<CriticalCurve> trace_critical_set(const PlaneMap& map, const Rect& window, int grid_n,
                                              double h, const TraceSettings& ts) {
  auto seeds = scan_seeds(map, window, grid_n);
  std::vector<CriticalCurve> curves;

  for (const auto& [p_plus, p_minus] : seeds) {
    Vec2 p0;
    try {
      p0 = refine_critical_point(map, p_plus, p_minus, ts);
    } catch (const Error&) {
      continue;  // grid artifacts near tangencies
    }
    bool dup = false;
    for (const auto& c : curves) {
      if (distance_to_polyline(p0, c.points) < 2.0 * c.step_h) { dup = true; break; }
    }
    if (dup) continue;

    double h_try = h;
    for (int attempt = 0; attempt < 4; ++attempt) {
      try {
        CriticalCurve c = trace_critical_curve(map, p0, h_try, window, ts);
        c.cusps = locate_cusps(map, c, ts);
        for (auto& cusp : c.cusps) cusp.effective_side = cusp_effective_side(map, cusp, c);
        curves.push_back(std::move(c));
        break;
      } catch (const Error& e) {
        if (e.kind() != Error::Kind::Numeric || attempt == 3) throw;
        h_try *= 0.25;  // curvature demanded a finer step; restart this component
      }
    }
  }
  return curves;
}

}  // namespace atlas
