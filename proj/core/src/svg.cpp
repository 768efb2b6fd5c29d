#include "tempered/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace tempered {

PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "histogram_grid") return PlotKind::HistogramGrid;
  if (name == "loglog_fit") return PlotKind::LogLogFit;
  if (name == "decay_curves") return PlotKind::DecayCurves;
  throw ConfigError("unknown plot kind: " + name);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"};

struct SvgDoc {
  std::ostringstream body;
  double width, height;

  SvgDoc(double w, double h) : width(w), height(h) {
    body << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
         << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n"
         << "<rect width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    if (h <= 0 || w <= 0) return;
    body << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
         << "\" height=\"" << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width_px = 1.0) {
    body << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
         << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << fmt(width_px) << "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& fill) {
    body << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(r)
         << "\" fill=\"" << fill << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "start") {
    body << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << fmt(size)
         << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << s
         << "</text>\n";
  }

  std::string finish() {
    body << "</svg>\n";
    return body.str();
  }
};

struct Panel {
  double x0, y0, w, h;  // plotting area in svg coordinates
};

void draw_frame(SvgDoc& doc, const Panel& p, const std::string& title) {
  doc.line(p.x0, p.y0 + p.h, p.x0 + p.w, p.y0 + p.h, "#333333");
  doc.line(p.x0, p.y0, p.x0, p.y0 + p.h, "#333333");
  if (!title.empty()) doc.text(p.x0 + p.w / 2, p.y0 - 5, title, 11.0, "middle");
}

struct SampleRow {
  long n;
  std::string method;
  std::string spec;
  double alpha;
  bool corner;
};

std::vector<SampleRow> read_samples(const CsvTable& t) {
  const int cn = t.column("n");
  const int cm = t.column("method");
  const int cs = t.column("spec");
  const int ca = t.column("alpha_hat");
  const int cc = t.column("is_corner");
  std::vector<SampleRow> rows;
  for (const auto& r : t.rows) {
    SampleRow s;
    s.n = std::stol(r[static_cast<size_t>(cn)]);
    s.method = r[static_cast<size_t>(cm)];
    s.spec = r[static_cast<size_t>(cs)];
    s.alpha = parse_double(r[static_cast<size_t>(ca)]);
    s.corner = r[static_cast<size_t>(cc)] == "1" || r[static_cast<size_t>(cc)] == "true";
    rows.push_back(s);
  }
  return rows;
}

std::string render_histogram_grid(const CsvTable& t, const PlotOptions& opts) {
  const auto samples = read_samples(t);
  std::vector<std::pair<std::string, std::string>> cells;
  std::vector<long> ns;
  for (const auto& s : samples) {
    const auto cell = std::make_pair(s.method, s.spec);
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
    if (std::find(ns.begin(), ns.end(), s.n) == ns.end()) ns.push_back(s.n);
  }
  std::sort(ns.begin(), ns.end());

  const double pw = 180, ph = 110, mx = 55, my = 38;
  SvgDoc doc(mx + cells.size() * (pw + 18) + 10, my + ns.size() * (ph + 26) + 10);

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    for (size_t ni = 0; ni < ns.size(); ++ni) {
      Panel panel{mx + ci * (pw + 18), my + ni * (ph + 26), pw, ph};
      std::vector<double> finite;
      int corners = 0;
      int total = 0;
      for (const auto& s : samples) {
        if (s.method != cells[ci].first || s.spec != cells[ci].second || s.n != ns[ni]) continue;
        ++total;
        if (s.corner || std::isinf(s.alpha)) {
          ++corners;
        } else if (s.alpha > 0.0 || !opts.log_alpha_axis) {
          finite.push_back(opts.log_alpha_axis ? std::log10(s.alpha) : s.alpha);
        }
      }
      const std::string title =
          ni == 0 ? cells[ci].first + " / " + cells[ci].second : std::string();
      draw_frame(doc, panel, title);
      doc.text(panel.x0 - 8, panel.y0 + panel.h / 2, "n=" + std::to_string(ns[ni]), 10.0, "end");
      if (total == 0) continue;

      double lo = 0.0, hi = 1.0;
      if (!finite.empty()) {
        lo = *std::min_element(finite.begin(), finite.end());
        hi = *std::max_element(finite.begin(), finite.end());
        if (hi - lo < 1e-12) {
          lo -= 0.5;
          hi += 0.5;
        }
      }
      std::vector<int> counts(static_cast<size_t>(opts.bins), 0);
      for (double v : finite) {
        auto b = static_cast<int>((v - lo) / (hi - lo) * opts.bins);
        b = std::clamp(b, 0, opts.bins - 1);
        ++counts[static_cast<size_t>(b)];
      }
      int peak = corners;
      for (int cnt : counts) peak = std::max(peak, cnt);
      if (peak == 0) peak = 1;

      const double inf_w = 14.0;  // reserved slot for the corner bar
      const double bw = (panel.w - inf_w - 4) / opts.bins;
      for (int b = 0; b < opts.bins; ++b) {
        const double frac = static_cast<double>(counts[static_cast<size_t>(b)]) / peak;
        doc.rect(panel.x0 + b * bw, panel.y0 + panel.h * (1 - frac), bw * 0.92, panel.h * frac,
                 "#4477aa");
      }
      if (corners > 0) {
        const double frac = static_cast<double>(corners) / peak;
        doc.rect(panel.x0 + panel.w - inf_w, panel.y0 + panel.h * (1 - frac), inf_w * 0.8,
                 panel.h * frac, "#ee6677");
        doc.text(panel.x0 + panel.w - inf_w + 4, panel.y0 + panel.h + 12, "inf", 9.0, "middle");
      }
      doc.text(panel.x0, panel.y0 + panel.h + 12, fmt(lo), 9.0);
      doc.text(panel.x0 + panel.w - inf_w - 4, panel.y0 + panel.h + 12, fmt(hi), 9.0, "end");
    }
  }
  const std::string xlabel = opts.log_alpha_axis ? "log10(alpha_hat)" : "alpha_hat";
  doc.text(doc.width / 2, doc.height - 2, xlabel, 11.0, "middle");
  return doc.finish();
}

std::string render_loglog_fit(const CsvTable& t) {
  const auto samples = read_samples(t);
  std::vector<std::pair<std::string, std::string>> cells;
  for (const auto& s : samples) {
    const auto cell = std::make_pair(s.method, s.spec);
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) cells.push_back(cell);
  }

  const double pw = 220, ph = 170, mx = 55, my = 38;
  SvgDoc doc(mx + cells.size() * (pw + 24) + 10, my + ph + 46);

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    Panel panel{mx + ci * (pw + 24), my, pw, ph};
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : samples) {
      if (s.method != cells[ci].first || s.spec != cells[ci].second) continue;
      if (s.corner || std::isinf(s.alpha) || !(s.alpha > 0.0)) continue;
      pts.emplace_back(std::log10(static_cast<double>(s.n)), std::log10(s.alpha));
    }
    draw_frame(doc, panel, cells[ci].first + " / " + cells[ci].second);
    if (pts.size() < 2) {
      doc.text(panel.x0 + 8, panel.y0 + ph / 2, "no non-corner samples", 10.0);
      continue;
    }
    double xlo = pts[0].first, xhi = pts[0].first, ylo = pts[0].second, yhi = pts[0].second;
    for (const auto& [x, y] : pts) {
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    if (xhi - xlo < 1e-12) xhi = xlo + 1;
    if (yhi - ylo < 1e-12) yhi = ylo + 1;
    auto sx = [&](double x) { return panel.x0 + (x - xlo) / (xhi - xlo) * panel.w; };
    auto sy = [&](double y) { return panel.y0 + panel.h - (y - ylo) / (yhi - ylo) * panel.h; };
    for (const auto& [x, y] : pts) doc.circle(sx(x), sy(y), 1.6, "#4477aa");

    // OLS in natural logs; slope is invariant to the log base on both axes.
    double mxm = 0, mym = 0;
    for (const auto& [x, y] : pts) {
      mxm += x;
      mym += y;
    }
    mxm /= static_cast<double>(pts.size());
    mym /= static_cast<double>(pts.size());
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sxx += (x - mxm) * (x - mxm);
      sxy += (x - mxm) * (y - mym);
    }
    const double slope = sxy / sxx;
    const double icept = mym - slope * mxm;
    doc.line(sx(xlo), sy(icept + slope * xlo), sx(xhi), sy(icept + slope * xhi), "#ee6677", 1.5);
    char ann[48];
    std::snprintf(ann, sizeof(ann), "&#947;&#770;=%.2f", slope);
    doc.text(panel.x0 + 6, panel.y0 + 14, ann, 11.0);
    doc.text(panel.x0 + pw / 2, panel.y0 + ph + 16, "log10(n)", 10.0, "middle");
  }
  return doc.finish();
}

void draw_decay_panel(SvgDoc& doc, const Panel& panel, const CsvTable& t,
                      const std::string& x_col, const std::string& series_col,
                      const std::string& y_col) {
  const int cx = t.column(x_col);
  const int cy = t.column(y_col);
  const int cs = series_col.empty() ? -1 : t.column(series_col);

  std::map<std::string, std::map<double, std::pair<double, int>>> series;  // name -> x -> (sum, count)
  for (const auto& r : t.rows) {
    const double x = parse_double(r[static_cast<size_t>(cx)]);
    const double y = parse_double(r[static_cast<size_t>(cy)]);
    const std::string name = cs >= 0 ? r[static_cast<size_t>(cs)] : y_col;
    auto& acc = series[name][x];
    acc.first += y;
    acc.second += 1;
  }

  draw_frame(doc, panel, y_col + " vs " + x_col);
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, acc] : pts) {
      const double y = acc.first / acc.second;
      if (x > 0) {
        xlo = std::min(xlo, std::log10(x));
        xhi = std::max(xhi, std::log10(x));
      }
      if (y > 0) {
        ylo = std::min(ylo, std::log10(y));
        yhi = std::max(yhi, std::log10(y));
      }
    }
  }
  if (!(xlo <= xhi) || !(ylo <= yhi)) throw Error("decay_curves: no positive data");
  if (xhi - xlo < 1e-12) xhi = xlo + 1;
  if (yhi - ylo < 1e-12) yhi = ylo + 1;
  auto sx = [&](double x) { return panel.x0 + (std::log10(x) - xlo) / (xhi - xlo) * panel.w; };
  auto sy = [&](double y) {
    return panel.y0 + panel.h - (std::log10(y) - ylo) / (yhi - ylo) * panel.h;
  };

  int idx = 0;
  for (const auto& [name, pts] : series) {
    const std::string color = kPalette[idx % 6];
    double px = 0, py = 0;
    bool first = true;
    for (const auto& [x, acc] : pts) {
      const double y = acc.first / acc.second;
      if (!(x > 0) || !(y > 0)) continue;
      if (!first) doc.line(px, py, sx(x), sy(y), color, 1.5);
      doc.circle(sx(x), sy(y), 2.2, color);
      px = sx(x);
      py = sy(y);
      first = false;
    }
    doc.text(panel.x0 + panel.w + 12, panel.y0 + 14 + 16 * idx, name, 10.0);
    doc.circle(panel.x0 + panel.w + 6, panel.y0 + 10 + 16 * idx, 2.5, color);
    ++idx;
  }
  doc.text(panel.x0 + panel.w / 2, panel.y0 + panel.h + 18, "log10(" + x_col + ")", 10.0, "middle");
}

std::string render_decay_curves(const CsvTable& t, const PlotOptions& opts) {
  std::string series_col = opts.series_column;
  std::string y_col = opts.y_column;
  auto has = [&](const std::string& name) {
    return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
  };
  if (series_col.empty()) {
    if (has("metric")) series_col = "metric";
    else if (has("schedule")) series_col = "schedule";
  }
  std::string y_col2 = opts.y_column2;
  if (y_col.empty()) {
    if (has("value")) {
      y_col = "value";
    } else if (has("mean_sq_scaled_diff_mle")) {
      y_col = "mean_sq_scaled_diff_mle";
      if (y_col2.empty() && has("mean_sq_scaled_diff_truth")) y_col2 = "mean_sq_scaled_diff_truth";
    } else if (has("tv_to_gaussian")) {
      y_col = "tv_to_gaussian";
      if (y_col2.empty() && has("cf_gap")) y_col2 = "cf_gap";
    } else {
      throw SchemaMismatch("decay_curves: no y column found");
    }
  }

  const double pw = 360, ph = 240, mx = 70, my = 40, legend = 160;
  const int panels = y_col2.empty() ? 1 : 2;
  SvgDoc doc(mx + panels * (pw + legend), my + ph + 50);
  draw_decay_panel(doc, {mx, my, pw, ph}, t, opts.x_column, series_col, y_col);
  if (panels == 2) {
    draw_decay_panel(doc, {mx + pw + legend, my, pw, ph}, t, opts.x_column, series_col, y_col2);
  }
  doc.text(12, my + ph / 2, "log10", 10.0);
  return doc.finish();
}

}  // namespace

std::string render_plot(const CsvTable& table, PlotKind kind, const PlotOptions& opts) {
  if (table.rows.empty()) throw Error("render_plot: empty csv body");
  switch (kind) {
    case PlotKind::HistogramGrid: return render_histogram_grid(table, opts);
    case PlotKind::LogLogFit: return render_loglog_fit(table);
    case PlotKind::DecayCurves: return render_decay_curves(table, opts);
  }
  throw Error("render_plot: unreachable");
}

void write_plot_file(const std::string& path, const CsvTable& table, PlotKind kind,
                     const PlotOptions& opts) {
  const std::string svg = render_plot(table, kind, opts);  // render before touching the file
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("render_plot: cannot write " + path);
  out << svg;
}

}  // namespace tempered
