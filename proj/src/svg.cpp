#include <cmath>
#include <cstdio>
#include <string>

#include "atlas/report.hpp"

namespace atlas {

namespace {

// Fixed, compact coordinate formatting keeps output deterministic.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kPalette[] = {"#1f6fb2", "#c23b22", "#2e8b57", "#8856a7",
                          "#d95f0e", "#137a7a", "#aa3377", "#556b2f"};

class Canvas {
 public:
  Canvas(Rect world, int pixels) : world_(world), px_(pixels) {
    scale_ = px_ / world_.max_dim();
  }

  double X(double x) const { return (x - world_.x0) * scale_; }
  double Y(double y) const { return (world_.y1 - y) * scale_; }  // svg y grows downward
  double W() const { return world_.width() * scale_; }
  double H() const { return world_.height() * scale_; }

  void open(std::string& s) const {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(W()) + " " + fmt(H()) +
         "\" width=\"" + fmt(W()) + "\" height=\"" + fmt(H()) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(W()) + "\" height=\"" + fmt(H()) +
         "\" fill=\"white\"/>\n";
    // axes
    if (world_.x0 < 0 && world_.x1 > 0)
      s += "<line x1=\"" + fmt(X(0)) + "\" y1=\"0\" x2=\"" + fmt(X(0)) + "\" y2=\"" + fmt(H()) +
           "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    if (world_.y0 < 0 && world_.y1 > 0)
      s += "<line x1=\"0\" y1=\"" + fmt(Y(0)) + "\" x2=\"" + fmt(W()) + "\" y2=\"" + fmt(Y(0)) +
           "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  }

  void polyline(std::string& s, const Polyline& p, const std::string& color, double width,
                bool dashed = false) const {
    s += dashed ? "<path stroke-dasharray=\"4 3\" d=\"M" : "<path d=\"M";
    for (std::size_t i = 0; i < p.points.size(); ++i) {
      if (i) s += " L";
      s += fmt(X(p.points[i].x)) + " " + fmt(Y(p.points[i].y));
    }
    if (p.closed) s += " Z";
    s += "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(width) + "\"/>\n";
  }

  void marker(std::string& s, Vec2 p, const std::string& color, const std::string& label) const {
    s += "<circle cx=\"" + fmt(X(p.x)) + "\" cy=\"" + fmt(Y(p.y)) + "\" r=\"4\" fill=\"" + color +
         "\"/>\n";
    if (!label.empty())
      s += "<text x=\"" + fmt(X(p.x) + 6) + "\" y=\"" + fmt(Y(p.y) - 6) +
           "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" + color + "\">" + label +
           "</text>\n";
  }

  void text(std::string& s, double px, double py, const std::string& msg) const {
    s += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(py) +
         "\" font-size=\"14\" font-family=\"sans-serif\" fill=\"#333333\">" + msg + "</text>\n";
  }

 private:
  Rect world_;
  int px_;
  double scale_;
};

// Square window holding all image-space layers, derived deterministically
// from the report content (domain layers always use the analysis window).
Rect image_window(const AnalysisReport& report) {
  double extent = 1.0;
  for (const Polyline& p : report.images)
    for (const Vec2& q : p.points) extent = std::max({extent, std::abs(q.x), std::abs(q.y)});
  for (const CircleLayer& c : report.circles)
    for (const Vec2& q : c.image.points) extent = std::max({extent, std::abs(q.x), std::abs(q.y)});
  extent = std::ceil(extent * 1.05);
  return {-extent, -extent, extent, extent};
}

}  // namespace

std::string render_svg(const AnalysisReport& report, const std::string& figure) {
  const int px = 800;
  std::string s;

  if (figure == "critical") {
    Canvas cv(report.window, px);
    cv.open(s);
    int ci = 0, label = 1;
    for (const CriticalCurve& c : report.curves) {
      const char* color = kPalette[ci++ % 8];
      cv.polyline(s, c.points, color, 2.0);
      for (const Cusp& cu : c.cusps)
        cv.marker(s, cu.location, color, "C" + std::to_string(label++));
    }
    s += "</svg>\n";
    return s;
  }

  if (figure == "image") {
    if (report.images.empty() && !report.curves.empty())
      fail(Error::Kind::Precondition, "report has no image layer");
    Canvas cv(image_window(report), px);
    cv.open(s);
    int ci = 0;
    for (const Polyline& p : report.images) cv.polyline(s, p, kPalette[ci++ % 8], 2.0);
    s += "</svg>\n";
    return s;
  }

  if (figure == "flower") {
    if (report.flower.empty()) fail(Error::Kind::Precondition, "report has no flower layer");
    Canvas cv(report.window, px);
    cv.open(s);
    for (const FlowerArc& a : report.flower)
      cv.polyline(s, a.polyline, a.critical ? "#1f6fb2" : "#c23b22", a.critical ? 2.5 : 1.2);
    s += "</svg>\n";
    return s;
  }

  if (figure == "paths") {
    if (report.preimages.empty()) fail(Error::Kind::Precondition, "report has no preimage layer");
    Canvas cv(report.window, px);
    cv.open(s);
    int ci = 0;
    for (const CriticalCurve& c : report.curves) cv.polyline(s, c.points, "#bbbbbb", 1.0);
    for (const PreimageReport& pr : report.preimages) {
      for (const PreimagePath& path : pr.paths) {
        std::vector<Vec2> pts;
        for (const auto& [t, p] : path.points) pts.push_back(p);
        if (pts.size() < 2) continue;
        cv.polyline(s, Polyline{pts, false}, kPalette[ci++ % 8], 1.2);
        if (path.born_at) cv.marker(s, path.points.front().second, "#2e8b57", "");
        if (path.died_at) cv.marker(s, path.points.back().second, "#c23b22", "");
      }
      for (const Vec2& p : pr.set.points) cv.marker(s, p, "#000000", "");
    }
    s += "</svg>\n";
    return s;
  }

  if (figure == "circles") {
    if (report.circles.empty()) fail(Error::Kind::Precondition, "report has no circles layer");
    Canvas cv(image_window(report), px);
    cv.open(s);
    int ci = 0;
    double ty = 20.0;
    for (const CircleLayer& c : report.circles) {
      const char* color = kPalette[ci++ % 8];
      cv.polyline(s, c.image, color, 1.6);
      cv.text(s, 10.0, ty, "r = " + fmt(c.radius) + ": rotation " + std::to_string(c.rotation));
      ty += 18.0;
    }
    s += "</svg>\n";
    return s;
  }

  fail(Error::Kind::Precondition, "unknown figure '" + figure + "'");
}

}  // namespace atlas
