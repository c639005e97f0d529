#include "gpdiag/plot.hpp"

#include "gpdiag/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpdiag {

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::vj_squared: return "vj_squared";
    case PlotKind::avp: return "avp";
    case PlotKind::field_heatmap: return "field_heatmap";
    case PlotKind::a_curve: return "a_curve";
    case PlotKind::experiment_table: return "experiment_table";
  }
  return "vj_squared";
}

namespace {

std::string fmt(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Plot area with linear axes.
struct Frame {
  double x0, x1, y0, y1;  // data range
  int width, height;
  double left = 70, right = 20, top = 40, bottom = 50;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void header(std::ostringstream& s, const PlotSpec& spec) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty()) {
    s << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
      << "</text>\n";
  }
}

void axes(std::ostringstream& s, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  const double xa = f.px(f.x0), xb = f.px(f.x1), ya = f.py(f.y0), yb = f.py(f.y1);
  s << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << fmt(xa) << "\" y=\"" << fmt(yb) << "\" width=\"" << fmt(xb - xa)
    << "\" height=\"" << fmt(ya - yb) << "\"/></g>\n";
  s << "<g font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    s << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << fmt(ya + 16) << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    s << "<text x=\"" << fmt(xa - 6) << "\" y=\"" << fmt(f.py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << fmt((xa + xb) / 2) << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << escape(xlabel) << "</text>\n";
  s << "<text transform=\"translate(16," << fmt((ya + yb) / 2) << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">"
    << escape(ylabel) << "</text>\n";
}

std::string render_vj(const PlotSpec& spec) {
  const auto& v = *spec.vj;
  if (v.entries.empty()) fail(ErrorKind::validation, "v_j^2 plot needs at least one entry");
  double ymax = 0.0;
  for (const auto& e : v.entries) ymax = std::max({ymax, e.v_sq, e.fitted});
  Frame f{0.0, static_cast<double>(v.entries.back().j + 1), 0.0, ymax * 1.05, spec.width, spec.height};
  std::ostringstream s;
  header(s, spec);
  const char* shades[] = {"#f2f2f2", "#ffffff"};
  for (std::size_t b = 0; b < v.bands.size(); ++b) {
    const double xa = f.px(v.bands[b].first - 0.5), xb = f.px(v.bands[b].last + 0.5);
    s << "<rect class=\"band\" x=\"" << fmt(xa) << "\" y=\"" << fmt(f.py(f.y1)) << "\" width=\"" << fmt(xb - xa)
      << "\" height=\"" << fmt(f.py(f.y0) - f.py(f.y1)) << "\" fill=\"" << shades[b % 2] << "\"/>\n";
  }
  axes(s, f, "j", "v_j^2");
  s << "<g font-size=\"9\" text-anchor=\"middle\" fill=\"black\">\n";
  for (const auto& e : v.entries) {
    s << "<text x=\"" << fmt(f.px(e.j)) << "\" y=\"" << fmt(f.py(e.v_sq) + 3) << "\">" << e.j << "</text>\n";
  }
  s << "</g>\n<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
  for (const auto& e : v.entries) s << fmt(f.px(e.j)) << ',' << fmt(f.py(e.fitted)) << ' ';
  s << "\"/>\n</svg>\n";
  return s.str();
}

std::string render_avp(const PlotSpec& spec) {
  const auto& a = *spec.avp;
  if (a.points.empty()) fail(ErrorKind::validation, "AVP plot needs points");
  double x0 = a.points[0].x, x1 = x0, y0 = a.points[0].y, y1 = y0;
  for (const auto& p : a.points) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  pad_range(x0, x1);
  pad_range(y0, y1);
  Frame f{x0, x1, y0, y1, spec.width, spec.height};
  std::ostringstream s;
  header(s, spec);
  const std::string xl = a.domain == Domain::spectral ? "D v*_C (" + a.covariate_name + ")" : "P V^-1/2 C (" + a.covariate_name + ")";
  const std::string yl = a.domain == Domain::spectral ? "D v*" : "P V^-1/2 y";
  axes(s, f, xl, yl);
  const auto top = a.top_cook(5);
  s << "<g fill=\"#1f4e99\" fill-opacity=\"0.6\">\n";
  for (const auto& p : a.points) s << "<circle cx=\"" << fmt(f.px(p.x)) << "\" cy=\"" << fmt(f.py(p.y)) << "\" r=\"2.5\"/>\n";
  s << "</g>\n<g font-size=\"10\" fill=\"#b30000\">\n";
  for (const auto& p : a.points) {
    if (std::find(top.begin(), top.end(), p.id) == top.end()) continue;
    s << "<text x=\"" << fmt(f.px(p.x) + 4) << "\" y=\"" << fmt(f.py(p.y) - 4) << "\">" << p.id << "</text>\n";
  }
  s << "</g>\n";
  s << "<line stroke=\"red\" stroke-width=\"1.5\" x1=\"" << fmt(f.px(x0)) << "\" y1=\"" << fmt(f.py(a.slope * x0))
    << "\" x2=\"" << fmt(f.px(x1)) << "\" y2=\"" << fmt(f.py(a.slope * x1)) << "\"/>\n";
  s << "<text x=\"" << fmt(f.px(x0) + 8) << "\" y=\"" << fmt(f.py(y1) + 16) << "\" font-size=\"12\">slope "
    << num(a.slope) << ", p " << num(a.p_value) << "</text>\n</svg>\n";
  return s.str();
}

std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 * t));
  const int b = static_cast<int>(std::lround(255 * (1 - t)));
  const int g = static_cast<int>(std::lround(255 * (1 - std::abs(2 * t - 1)) * 0.8));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string render_field(const PlotSpec& spec) {
  const auto& fp = *spec.field;
  if (fp.M1 < 1 || fp.M2 < 1 || fp.values.size() != static_cast<Eigen::Index>(fp.M1) * fp.M2) {
    fail(ErrorKind::validation, "heatmap payload size does not match M1 x M2");
  }
  const double lo = fp.values.minCoeff(), hi = fp.values.maxCoeff();
  std::ostringstream s;
  header(s, spec);
  const double left = 40, top = 40;
  const double cw = (spec.width - 80.0) / fp.M1, ch = (spec.height - 80.0) / fp.M2;
  for (int a = 0; a < fp.M1; ++a) {
    for (int b = 0; b < fp.M2; ++b) {
      const double v = fp.values(static_cast<Eigen::Index>(a) * fp.M2 + b);
      const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
      // s2 increases upward.
      s << "<rect x=\"" << fmt(left + a * cw) << "\" y=\"" << fmt(top + (fp.M2 - 1 - b) * ch) << "\" width=\""
        << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\"" << colour(t) << "\"/>\n";
    }
  }
  s << "<text x=\"" << left << "\" y=\"" << spec.height - 20 << "\" font-size=\"11\">range " << num(lo) << " to "
    << num(hi) << "</text>\n</svg>\n";
  return s.str();
}

std::string render_curves(const PlotSpec& spec) {
  const auto& c = *spec.curves;
  if (c.curves.empty()) fail(ErrorKind::validation, "curve plot needs at least one curve");
  double ymax = 0.0;
  Eigen::Index n = 0;
  for (const auto& [label, v] : c.curves) ymax = std::max(ymax, v.maxCoeff()), n = std::max(n, v.size());
  Frame f{0.0, static_cast<double>(n + 1), 0.0, ymax * 1.05, spec.width, spec.height};
  std::ostringstream s;
  header(s, spec);
  axes(s, f, "j", "a_j");
  const char* palette[] = {"#1f4e99", "#b30000", "#2e7d32", "#6a1b9a", "#ef6c00"};
  for (std::size_t k = 0; k < c.curves.size(); ++k) {
    const auto& [label, v] = c.curves[k];
    s << "<polyline fill=\"none\" stroke=\"" << palette[k % 5] << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index j = 0; j < v.size(); ++j) s << fmt(f.px(j + 1)) << ',' << fmt(f.py(v(j))) << ' ';
    s << "\"/>\n<text x=\"" << fmt(f.px(f.x1) - 150) << "\" y=\"" << 60 + 16 * k << "\" font-size=\"12\" fill=\""
      << palette[k % 5] << "\">" << escape(label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_table(const PlotSpec& spec) {
  const auto& t = *spec.table;
  std::ostringstream s;
  header(s, spec);
  const char* cols[] = {"truth (s2, e2, rho)", "contamination", "method", "sigma_s2", "sigma_e2", "rho"};
  const double xs[] = {20, 190, 300, 400, 510, 620};
  s << "<g font-size=\"11\">\n";
  for (int k = 0; k < 6; ++k) s << "<text x=\"" << xs[k] << "\" y=\"50\" font-weight=\"bold\">" << cols[k] << "</text>\n";
  double y = 68;
  for (const auto& c : t.cells) {
    const std::string cells[] = {num(c.truth.sigma_s2) + ", " + num(c.truth.sigma_e2) + ", " + num(c.truth.rho),
                                 c.contamination,
                                 to_string(c.method),
                                 fmt(c.mean(0)) + " (" + fmt(c.se(0)) + ")",
                                 fmt(c.mean(1)) + " (" + fmt(c.se(1)) + ")",
                                 fmt(c.mean(2)) + " (" + fmt(c.se(2)) + ")"};
    for (int k = 0; k < 6; ++k) s << "<text x=\"" << xs[k] << "\" y=\"" << y << "\">" << escape(cells[k]) << "</text>\n";
    y += 16;
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const int set = spec.vj.has_value() + spec.avp.has_value() + spec.field.has_value() + spec.curves.has_value() +
                  spec.table.has_value();
  if (set != 1) fail(ErrorKind::validation, "plot spec must carry exactly one payload");
  if (spec.width < 100 || spec.height < 100) fail(ErrorKind::validation, "plot size must be at least 100 x 100");
  switch (spec.kind) {
    case PlotKind::vj_squared:
      if (spec.vj) return render_vj(spec);
      break;
    case PlotKind::avp:
      if (spec.avp) return render_avp(spec);
      break;
    case PlotKind::field_heatmap:
      if (spec.field) return render_field(spec);
      break;
    case PlotKind::a_curve:
      if (spec.curves) return render_curves(spec);
      break;
    case PlotKind::experiment_table:
      if (spec.table) return render_table(spec);
      break;
  }
  fail(ErrorKind::validation, "plot payload does not match kind '" + to_string(spec.kind) + "'");
}

void write_svg(const PlotSpec& spec, const std::string& path) {
  const std::string text = render_svg(spec);
  std::ofstream f(path);
  if (!f) fail(ErrorKind::validation, "cannot write '" + path + "'");
  f << text;
}

}  // namespace gpdiag
