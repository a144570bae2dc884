#include "atlas/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace atlas {

namespace {

int sign_of(double v) { return v > 0 ? 1 : -1; }

double det_at(const PlaneMap& map, Vec2 p) { return map.jet(p).det(); }

Polyline subdivide(const Polyline& c) {
  std::vector<Vec2> pts;
  pts.reserve(c.points.size() * 2);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    pts.push_back(c.points[i]);
    if (c.closed || i + 1 < c.points.size())
      pts.push_back((c.segment_a(i) + c.segment_b(i)) * 0.5);
  }
  return make_polyline(std::move(pts), c.closed);
}

// Rotation number of F(gamma), with midpoint refinement on under-sampling.
int image_rotation(const PlaneMap& map, Polyline gamma) {
  for (int attempt = 0;; ++attempt) {
    try {
      return rotation_number(image_of_curve(map, gamma));
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::Geometry || attempt >= 6) throw;
      gamma = subdivide(gamma);
    }
  }
}

void require_simple_positive(const Polyline& gamma, const char* what) {
  if (!gamma.closed) fail(Error::Kind::Precondition, std::string(what) + " must be closed");
  for (const auto& x : self_intersections(gamma))
    if (!x.degenerate)
      fail(Error::Kind::Precondition, std::string(what) + " is not simple");
  if (gamma.signed_area() <= 0)
    fail(Error::Kind::Precondition, std::string(what) + " must be positively oriented");
}

void require_disjoint_from(const Polyline& gamma, std::span<const CriticalCurve> known,
                           const char* what) {
  for (const CriticalCurve& c : known) {
    if (!polyline_intersections(gamma, c.points).empty())
      fail(Error::Kind::Precondition,
           std::string(what) + " intersects a known critical curve");
  }
}

std::string point_str(Vec2 p) {
  return "(" + format_double(p.x) + ", " + format_double(p.y) + ")";
}

}  // namespace

const char* check_kind_name(CheckReport::Kind k) {
  switch (k) {
    case CheckReport::Kind::Disk: return "disk";
    case CheckReport::Kind::Polydisk: return "polydisk";
    case CheckReport::Kind::Annulus: return "annulus";
    case CheckReport::Kind::Parity: return "parity";
  }
  return "?";
}

PreimageSet brute_force_preimages(const PlaneMap& map, Vec2 q, const Rect& window, int grid_n) {
  if (grid_n < 2) fail(Error::Kind::Precondition, "oracle grid must be at least 2");
  double tol = newton_tol(q);
  std::vector<Vec2> found;
  double diag = std::hypot(window.width(), window.height());

  for (int i = 0; i <= grid_n; ++i) {
    for (int jg = 0; jg <= grid_n; ++jg) {
      Vec2 p{window.x0 + window.width() * i / grid_n, window.y0 + window.height() * jg / grid_n};
      bool converged = false;
      for (int it = 0; it < 48; ++it) {
        Vec2 f;
        Mat2 jac;
        try {
          map.eval_fdf(p, f, jac);
        } catch (const Error&) {
          break;
        }
        Vec2 r = f - q;
        if (r.norm() < tol) { converged = true; break; }
        double scale = 1.0 + std::abs(jac.a * jac.d) + std::abs(jac.b * jac.c);
        if (std::abs(jac.det()) < 1e-13 * scale) break;
        Vec2 step = jac.solve(r);
        double damp = 1.0;
        Vec2 p_next = p - step;
        for (int k = 0; k < 6; ++k) {
          Vec2 fn;
          Mat2 jn;
          try {
            map.eval_fdf(p_next, fn, jn);
          } catch (const Error&) {
            damp *= 0.5;
            p_next = p - step * damp;
            continue;
          }
          if ((fn - q).norm() < r.norm()) break;
          damp *= 0.5;
          p_next = p - step * damp;
        }
        p = p_next;
        if (distance(p, window.center()) > 4.0 * diag) break;
      }
      if (!converged) continue;
      if (!window.expanded(1e-9 * (1.0 + diag)).contains(p)) continue;
      double dedup = 1e-6 * (1.0 + p.norm());
      bool dup = false;
      for (const Vec2& g : found)
        if (distance(g, p) < dedup) { dup = true; break; }
      if (!dup) found.push_back(p);
    }
  }
  std::sort(found.begin(), found.end(),
            [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  PreimageSet out;
  out.target = q;
  out.points = std::move(found);
  for (const Vec2& p : out.points) out.residuals.push_back((map(p) - q).norm());
  return out;
}

Rect preimage_window_from_hint(const PlaneMap& map, Vec2 q) {
  const auto& hint = map.infinity_hint();
  if (!hint) fail(Error::Kind::Precondition, "map has no infinity hint");
  double c = std::abs(hint->coefficient);
  int n = hint->degree;
  // grow R until c R^n dominates both the remainder on |z| = R and 2|q|
  double R = 2.0;
  for (int it = 0; it < 60; ++it) {
    double lead = c * std::pow(R, n);
    double rem = 0.0;
    for (int i = 0; i < 16; ++i) {
      double th = 2.0 * std::acos(-1.0) * i / 16.0;
      Vec2 z{R * std::cos(th), R * std::sin(th)};
      Vec2 f = map(z);
      std::complex<double> zn = std::pow(std::complex<double>(z.x, z.y), n);
      std::complex<double> lz = hint->coefficient * zn;
      rem = std::max(rem, std::hypot(f.x - lz.real(), f.y - lz.imag()));
    }
    if (lead > 2.0 * rem && lead > 2.0 * (q.norm() + rem)) break;
    R *= 1.5;
  }
  return {-R, -R, R, R};
}

PreimageSet brute_force_preimages_auto(const PlaneMap& map, Vec2 q,
                                       std::optional<Rect> fallback_window, int grid_start,
                                       int grid_max) {
  Rect window;
  if (map.infinity_hint()) {
    window = preimage_window_from_hint(map, q);
  } else if (fallback_window) {
    window = *fallback_window;
  } else {
    fail(Error::Kind::Precondition, "no infinity hint and no fallback window for the oracle");
  }
  PreimageSet prev = brute_force_preimages(map, q, window, grid_start);
  int stable = 0;
  for (int g = grid_start * 2; g <= grid_max; g *= 2) {
    PreimageSet cur = brute_force_preimages(map, q, window, g);
    if (cur.points.size() == prev.points.size()) {
      if (++stable >= 2) return cur;
    } else {
      stable = 0;
    }
    prev = std::move(cur);
  }
  fail(Error::Kind::Numeric, "oracle count did not stabilize by grid 1024");
}

CheckReport check_disk(const PlaneMap& map, const Polyline& gamma, Vec2 p_sample,
                       std::span<const CriticalCurve> known) {
  require_simple_positive(gamma, "disk boundary");
  if (winding_number(gamma, p_sample) != 1)
    fail(Error::Kind::Precondition, "sample point is not inside the disk boundary");
  require_disjoint_from(gamma, known, "disk boundary");
  for (const CriticalCurve& c : known)
    if (winding_number(gamma, c.points.points.front()) != 0)
      fail(Error::Kind::Precondition, "a known critical curve lies inside the disk");

  CheckReport rep;
  rep.kind = CheckReport::Kind::Disk;
  rep.lhs = image_rotation(map, gamma);
  rep.rhs = sign_of(det_at(map, p_sample));
  rep.pass = rep.lhs == rep.rhs;
  rep.inputs_digest = "disk boundary n=" + std::to_string(gamma.size()) +
                      ", sample=" + point_str(p_sample);
  rep.note = rep.pass ? "necessary, not sufficient" : "critical curve missing inside the disk";
  return rep;
}

CheckReport check_polydisk(const PlaneMap& map, const Polyline& gamma0,
                           std::span<const Polyline> holes,
                           std::span<const CriticalCurve> known) {
  require_simple_positive(gamma0, "outer boundary");
  for (const Polyline& h : holes) {
    require_simple_positive(h, "hole boundary");
    if (winding_number(gamma0, h.points.front()) != 1)
      fail(Error::Kind::Precondition, "hole is not inside the outer boundary");
  }
  for (std::size_t i = 0; i < holes.size(); ++i)
    for (std::size_t jh = i + 1; jh < holes.size(); ++jh) {
      if (!polyline_intersections(holes[i], holes[jh]).empty() ||
          winding_number(holes[i], holes[jh].points.front()) != 0 ||
          winding_number(holes[jh], holes[i].points.front()) != 0)
        fail(Error::Kind::Precondition, "holes intersect or nest");
    }
  require_disjoint_from(gamma0, known, "outer boundary");
  for (const Polyline& h : holes) require_disjoint_from(h, known, "hole boundary");

  // region sample: nearest-to-centroid valid point on a grid
  Vec2 centroid = gamma0.centroid();
  double guard = 0.01 * (1.0 + gamma0.length() / (2.0 * std::acos(-1.0)));
  std::optional<Vec2> sample;
  double best = 0;
  std::vector<Vec2> region_probes;
  const int gridn = 48;
  Rect bb{gamma0.points[0].x, gamma0.points[0].y, gamma0.points[0].x, gamma0.points[0].y};
  for (const Vec2& p : gamma0.points) {
    bb.x0 = std::min(bb.x0, p.x); bb.y0 = std::min(bb.y0, p.y);
    bb.x1 = std::max(bb.x1, p.x); bb.y1 = std::max(bb.y1, p.y);
  }
  for (int i = 1; i < gridn; ++i) {
    for (int jg = 1; jg < gridn; ++jg) {
      Vec2 p{bb.x0 + bb.width() * i / gridn, bb.y0 + bb.height() * jg / gridn};
      if (distance_to_polyline(p, gamma0) < guard) continue;
      bool valid = true;
      try {
        if (winding_number(gamma0, p) != 1) continue;
        for (const Polyline& h : holes) {
          if (distance_to_polyline(p, h) < guard || winding_number(h, p) != 0) {
            valid = false;
            break;
          }
        }
        for (const CriticalCurve& c : known)
          if (distance_to_polyline(p, c.points) < guard) { valid = false; break; }
      } catch (const Error&) {
        valid = false;
      }
      if (!valid) continue;
      region_probes.push_back(p);
      double d = distance(p, centroid);
      if (!sample || d < best) { sample = p; best = d; }
    }
  }
  if (!sample) fail(Error::Kind::Precondition, "no valid sample point in the region");

  int s = sign_of(det_at(map, *sample));
  // the identity only holds when the region avoids the critical set
  int probes = 0;
  for (const Vec2& p : region_probes) {
    if (probes++ > 200) break;
    if (sign_of(det_at(map, p)) != s)
      fail(Error::Kind::Precondition,
           "det DF changes sign inside the region (critical points present)");
  }

  CheckReport rep;
  rep.kind = CheckReport::Kind::Polydisk;
  rep.lhs = image_rotation(map, gamma0);
  long sum = 0;
  for (const Polyline& h : holes) sum += image_rotation(map, h);
  long n = static_cast<long>(holes.size());
  rep.rhs = sum - s * (n - 1);
  rep.pass = rep.lhs == rep.rhs;
  rep.inputs_digest = "outer n=" + std::to_string(gamma0.size()) + ", holes=" + std::to_string(n) +
                      ", s=" + std::to_string(s) + ", sample=" + point_str(*sample);
  rep.note = rep.pass ? "necessary, not sufficient"
                      : "critical curve missing in the region between the boundaries";
  return rep;
}

CheckReport check_annulus(const PlaneMap& map, const CriticalCurve& curve, double d_offset,
                          std::span<const CriticalCurve> others) {
  if (!curve.points.closed)
    fail(Error::Kind::Precondition, "annulus check needs a closed critical curve");

  Polyline base = curve.points;
  double d = d_offset;
  for (int attempt = 0;; ++attempt) {
    try {
      Polyline outer = offset_curve(base, d, Side::Left);
      Polyline inner = offset_curve(base, d, Side::Right);
      for (const CriticalCurve& o : others) {
        if (!polyline_intersections(outer, o.points).empty() ||
            !polyline_intersections(inner, o.points).empty())
          fail(Error::Kind::Geometry, "offset collides with another critical curve");
      }
      int s_in = sign_of(det_at(map, inner.points.front()));
      int s_out = sign_of(det_at(map, outer.points.front()));
      if (s_out != -s_in)
        fail(Error::Kind::Geometry, "offset curves do not bracket the critical curve");

      long k_in = 0, k_out = 0;
      for (const Cusp& c : curve.cusps)
        (c.effective_side == Side::Left ? k_out : k_in) += 1;

      CheckReport rep;
      rep.kind = CheckReport::Kind::Annulus;
      rep.lhs = image_rotation(map, outer);
      rep.rhs = image_rotation(map, inner) + s_in * k_in + s_out * k_out;
      rep.pass = rep.lhs == rep.rhs;
      rep.inputs_digest = "curve n=" + std::to_string(curve.points.size()) +
                          ", cusps in/out=" + std::to_string(k_in) + "/" + std::to_string(k_out) +
                          ", d=" + format_double(d) + ", s_in=" + std::to_string(s_in);
      rep.note = rep.pass ? "necessary, not sufficient"
                          : "inconsistent rotation across the annulus (curve set incomplete?)";
      return rep;
    } catch (const Error& e) {
      if (e.kind() != Error::Kind::Geometry || attempt >= 6) throw;
      // under-sampled image or colliding offset: refine the curve, shrink d
      base = subdivide(base);
      if (attempt % 2 == 1) d *= 0.5;
    }
  }
}

// ---------------------------------------------------------------------------
// Tile census
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Counts transversal crossings of segment [a, b] against the image curves.
// Returns -1 when a degenerate hit makes the count unreliable.
int segment_crossing_count(Vec2 a, Vec2 b, std::span<const Polyline> images) {
  Polyline seg = make_polyline({a, b}, false);
  int count = 0;
  for (const Polyline& im : images) {
    for (const auto& hit : polyline_intersections(seg, im)) {
      if (hit.degenerate) return -1;
      ++count;
    }
  }
  return count;
}

}  // namespace

CensusResult tile_census(const PlaneMap& map, std::span<const Polyline> image_curves,
                         std::span<const CriticalCurve> curves, const Rect& window,
                         int samples_per_tile_goal) {
  if (samples_per_tile_goal < 1)
    fail(Error::Kind::Precondition, "samples_per_tile_goal must be positive");

  // stratified jittered grid, deterministic
  int M = std::max(8, static_cast<int>(std::ceil(std::sqrt(24.0 * samples_per_tile_goal))));
  std::mt19937 rng(0xA71A5u);
  std::uniform_real_distribution<double> jitter(0.15, 0.85);
  double guard = 2e-3 * window.max_dim();

  std::vector<Vec2> pts;
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < M; ++i) {
    for (int jg = 0; jg < M; ++jg) {
      Vec2 p;
      bool ok = false;
      for (int tries = 0; tries < 12; ++tries) {
        p = {window.x0 + window.width() * (i + jitter(rng)) / M,
             window.y0 + window.height() * (jg + jitter(rng)) / M};
        ok = true;
        for (const Polyline& im : image_curves)
          if (distance_to_polyline(p, im) < guard) { ok = false; break; }
        if (ok) break;
      }
      if (!ok) continue;  // stratum hugs an image curve; skip it
      pts.push_back(p);
      cells.emplace_back(i, jg);
    }
  }

  // preimage counts: continuation against one shared base, oracle fallback
  CensusResult out;
  std::optional<BaseSpec> base;
  std::vector<Polyline> images_copy(image_curves.begin(), image_curves.end());
  std::vector<CriticalCurve> curves_copy(curves.begin(), curves.end());
  if (map.infinity_hint()) {
    double R = preimage_window_from_hint(map, window.center()).x1;
    Vec2 q_alpha = Vec2{std::cos(0.37), std::sin(0.37)} *
                   (std::abs(map.infinity_hint()->coefficient) * std::pow(1.6 * R, map.infinity_hint()->degree));
    try {
      BaseSpec b;
      b.q_alpha = q_alpha;
      b.preimages = seeds_at_infinity(map, q_alpha);
      b.provenance = "seeds_at_infinity";
      base = b;
    } catch (const Error&) {
      base.reset();
    }
  }

  Rect oracle_window = window.expanded(window.max_dim());
  for (const Vec2& p : pts) {
    TileSample ts;
    ts.point = p;
    bool done = false;
    if (base) {
      try {
        TargetPath route = plan_route(map, images_copy, curves_copy, base->q_alpha, p);
        PreimageRun run = all_preimages(map, p, *base, std::move(route));
        ts.count = static_cast<int>(run.result.points.size());
        ts.method = TileSample::Method::Continuation;
        done = true;
      } catch (const Error&) {
        done = false;
      }
    }
    if (!done) {
      PreimageSet set = brute_force_preimages_auto(map, p, oracle_window);
      ts.count = static_cast<int>(set.points.size());
      ts.method = TileSample::Method::Oracle;
    }
    out.samples.push_back(ts);
  }

  // same-tile edges: crossing-free segments between neighboring strata
  int N = static_cast<int>(out.samples.size());
  UnionFind uf(N);
  auto cell_index = [&](int ci, int cj) -> int {
    for (int k = 0; k < N; ++k)
      if (cells[k].first == ci && cells[k].second == cj) return k;
    return -1;
  };
  struct AdjEdge { int a, b; Vec2 where; };
  std::vector<AdjEdge> adjacency;
  for (int k = 0; k < N; ++k) {
    auto [ci, cj] = cells[k];
    const int di[4] = {1, 0, 1, 1};
    const int dj[4] = {0, 1, 1, -1};
    for (int d = 0; d < 4; ++d) {
      int o = cell_index(ci + di[d], cj + dj[d]);
      if (o < 0) continue;
      int crossings = segment_crossing_count(out.samples[k].point, out.samples[o].point,
                                             image_curves);
      if (crossings == 0) uf.unite(k, o);
      else if (crossings == 1)
        adjacency.push_back({k, o, (out.samples[k].point + out.samples[o].point) * 0.5});
    }
  }

  // label tiles
  std::vector<int> label(N, -1);
  int next = 0;
  for (int k = 0; k < N; ++k) {
    int root = uf.find(k);
    if (label[root] < 0) label[root] = next++;
    out.samples[k].tile = label[root];
  }
  out.tile_count = next;

  // consistency within tiles
  std::vector<int> tile_counts(next, -1);
  std::string note;
  bool consistent = true;
  for (const TileSample& tsample : out.samples) {
    int& c = tile_counts[tsample.tile];
    if (c < 0) c = tsample.count;
    else if (c != tsample.count) {
      consistent = false;
      note += "tile " + std::to_string(tsample.tile) + " has mixed counts; ";
    }
  }

  // parity and adjacency laws
  int parity = -1;
  bool same_parity = true;
  for (const TileSample& tsample : out.samples) {
    int p2 = tsample.count & 1;
    if (parity < 0) parity = p2;
    else if (parity != p2) same_parity = false;
  }
  bool adjacency_ok = true;
  for (const AdjEdge& e : adjacency) {
    if (uf.find(e.a) == uf.find(e.b)) continue;  // non-convex tile seen twice
    int diff = std::abs(out.samples[e.a].count - out.samples[e.b].count);
    if (diff != 2) {
      adjacency_ok = false;
      note += "adjacent samples near " + point_str(e.where) + " differ by " +
              std::to_string(diff) + "; ";
    }
  }

  CheckReport rep;
  rep.kind = CheckReport::Kind::Parity;
  rep.lhs = same_parity ? parity : -1;
  rep.rhs = map.infinity_hint() ? (map.infinity_hint()->degree & 1) : rep.lhs;
  rep.pass = same_parity && consistent && adjacency_ok && rep.lhs == rep.rhs;
  rep.inputs_digest = "samples=" + std::to_string(N) + ", tiles=" + std::to_string(next) +
                      ", adjacent pairs=" + std::to_string(adjacency.size());
  rep.note = rep.pass ? "necessary, not sufficient" : note;
  out.parity = rep;
  return out;
}

}  // namespace atlas
