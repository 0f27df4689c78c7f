// Copyright 2026 The compgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compgen/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/metrics.hpp"

namespace compgen {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// CSV cells are never quoted; separators inside text are replaced.
std::string clean(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return out;
}

// Metadata lines keep everything after the first comma.
std::string one_line(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(const PlotData& plot) {
  const bool bars = plot.kind == "bars";
  const bool scatter = plot.kind == "metric_vs_gen";
  std::vector<std::string> categories;
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& s : plot.series) {
    for (const auto& p : s.points) {
      xlo = std::min(xlo, p.x);
      xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y - p.err);
      yhi = std::max(yhi, p.y + p.err);
      if (bars && std::find(categories.begin(), categories.end(), p.label) == categories.end()) {
        categories.push_back(p.label);
      }
    }
  }
  if (!std::isfinite(xlo)) xlo = xhi = ylo = yhi = 0.0;
  if (bars) ylo = std::min(ylo, 0.0);
  const Range xr = bars ? Range{-0.5, static_cast<double>(categories.size()) - 0.5} : padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto sy = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
    << escape_xml(plot.title) << "</text>\n";
  o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double v = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    o << "<line x1=\"" << fmt(kLeft - 4) << "\" y1=\"" << fmt(sy(v)) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
      << fmt(sy(v)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(sy(v) + 4) << "\" text-anchor=\"end\">"
      << tick_label(v) << "</text>\n";
  }
  if (bars) {
    for (std::size_t c = 0; c < categories.size(); ++c) {
      o << "<text x=\"" << fmt(sx(static_cast<double>(c))) << "\" y=\"" << fmt(kTop + ph + 16)
        << "\" text-anchor=\"middle\">" << escape_xml(categories[c]) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
      o << "<line x1=\"" << fmt(sx(v)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(sx(v)) << "\" y2=\""
        << fmt(kTop + ph + 4) << "\" stroke=\"black\"/>\n";
      o << "<text x=\"" << fmt(sx(v)) << "\" y=\"" << fmt(kTop + ph + 16) << "\" text-anchor=\"middle\">"
        << tick_label(v) << "</text>\n";
    }
  }
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 20) << "\" text-anchor=\"middle\">"
    << escape_xml(plot.xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << fmt(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(plot.ylabel) << "</text>\n";

  const double group_width = 0.8;
  const double bar_width = plot.series.empty() ? group_width : group_width / static_cast<double>(plot.series.size());
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& series = plot.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    if (bars) {
      for (const auto& p : series.points) {
        const auto c = static_cast<double>(std::find(categories.begin(), categories.end(), p.label) - categories.begin());
        const double left = c - group_width / 2 + bar_width * static_cast<double>(s);
        const double top = sy(std::max(p.y, 0.0)), base = sy(std::min(p.y, 0.0));
        o << "<rect x=\"" << fmt(sx(left)) << "\" y=\"" << fmt(top) << "\" width=\""
          << fmt(sx(left + bar_width) - sx(left)) << "\" height=\"" << fmt(base - top) << "\" fill=\"" << color
          << "\"/>\n";
        if (p.err > 0) {
          const double mid = sx(left + bar_width / 2);
          o << "<line x1=\"" << fmt(mid) << "\" y1=\"" << fmt(sy(p.y - p.err)) << "\" x2=\"" << fmt(mid)
            << "\" y2=\"" << fmt(sy(p.y + p.err)) << "\" stroke=\"black\"/>\n";
        }
      }
    } else {
      auto points = series.points;
      std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
      if (!scatter && points.size() > 1) {
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i) {
          o << (i ? " " : "") << fmt(sx(points[i].x)) << ',' << fmt(sy(points[i].y));
        }
        o << "\"/>\n";
      }
      for (const auto& p : points) {
        if (p.err > 0) {
          o << "<line x1=\"" << fmt(sx(p.x)) << "\" y1=\"" << fmt(sy(p.y - p.err)) << "\" x2=\"" << fmt(sx(p.x))
            << "\" y2=\"" << fmt(sy(p.y + p.err)) << "\" stroke=\"" << color << "\"/>\n";
        }
        o << "<circle cx=\"" << fmt(sx(p.x)) << "\" cy=\"" << fmt(sy(p.y)) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
      }
    }
    const double ly = kTop + 10 + 16 * static_cast<double>(s);
    o << "<rect x=\"" << fmt(kWidth - kRight + 12) << "\" y=\"" << fmt(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
      << color << "\"/>\n";
    o << "<text x=\"" << fmt(kWidth - kRight + 27) << "\" y=\"" << fmt(ly + 1) << "\">" << escape_xml(series.name)
      << "</text>\n";
  }
  if (!plot.annotation.empty()) {
    o << "<text x=\"" << fmt(kLeft + 8) << "\" y=\"" << fmt(kTop + 16) << "\">" << escape_xml(plot.annotation)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string plot_to_csv(const PlotData& plot) {
  std::ostringstream o;
  o << "# compgen-plot-v1\n";
  o << "# kind," << one_line(plot.kind) << '\n';
  o << "# title," << one_line(plot.title) << '\n';
  o << "# xlabel," << one_line(plot.xlabel) << '\n';
  o << "# ylabel," << one_line(plot.ylabel) << '\n';
  o << "# annotation," << one_line(plot.annotation) << '\n';
  o << "series,x,label,y,err\n";
  for (const auto& s : plot.series) {
    for (const auto& p : s.points) {
      o << clean(s.name) << ',' << format_double(p.x) << ',' << clean(p.label) << ',' << format_double(p.y) << ','
        << format_double(p.err) << '\n';
    }
  }
  return o.str();
}

PlotData plot_from_csv(const std::string& text) {
  PlotData plot;
  std::istringstream in(text);
  std::string line;
  require(std::getline(in, line) && line == "# compgen-plot-v1", ErrorCode::kInvalidArgument,
          "not a compgen plot CSV");
  const auto meta = [&](const char* key) {
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::kInvalidArgument, "truncated plot CSV");
    const std::string prefix = std::string("# ") + key + ",";
    require(line.rfind(prefix, 0) == 0, ErrorCode::kInvalidArgument, std::string("plot CSV: expected ") + key);
    return line.substr(prefix.size());
  };
  plot.kind = meta("kind");
  plot.title = meta("title");
  plot.xlabel = meta("xlabel");
  plot.ylabel = meta("ylabel");
  plot.annotation = meta("annotation");
  require(std::getline(in, line) && line == "series,x,label,y,err", ErrorCode::kInvalidArgument,
          "plot CSV: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    require(cells.size() == 5, ErrorCode::kInvalidArgument, "plot CSV: bad row '" + line + "'");
    if (plot.series.empty() || plot.series.back().name != cells[0]) plot.series.push_back({cells[0], {}});
    plot.series.back().points.push_back({std::stod(cells[1]), std::stod(cells[3]), std::stod(cells[4]), cells[2]});
  }
  return plot;
}

namespace {

bool matches(const Observation& o, const std::string& key, const std::string& value) {
  const auto it = o.keys.find(key);
  return it != o.keys.end() && it->second == value;
}

std::string key_or(const Observation& o, const std::string& key, const std::string& fallback = "") {
  const auto it = o.keys.find(key);
  return it == o.keys.end() ? fallback : it->second;
}

struct Accum {
  std::vector<double> values;
  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }
  double std() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
};

std::string default_n_label(const std::vector<const Observation*>& obs) {
  long best = -1;
  for (const auto* o : obs) {
    const auto v = key_or(*o, "n_label");
    if (!v.empty()) best = std::max(best, std::stol(v));
  }
  return best < 0 ? "" : std::to_string(best);
}

}  // namespace

PlotData build_plot(const std::vector<Observation>& observations, const PlotRequest& req) {
  std::vector<const Observation*> readouts;
  for (const auto& o : observations) {
    if (matches(o, "kind", "readout") && o.quantity == req.quantity && matches(o, "subset", req.subset) &&
        matches(o, "readout", req.readout) && (req.mode.empty() || matches(o, "mode", req.mode))) {
      readouts.push_back(&o);
    }
  }
  const std::string n_label = req.n_label.value_or(default_n_label(readouts));
  const bool filter_n_label = !(req.kind == "bars" && req.bar_group == "n_label");
  if (filter_n_label) {
    std::erase_if(readouts, [&](const Observation* o) { return !matches(*o, "n_label", n_label); });
  }
  const std::string context = req.subset + ", " + req.readout + (filter_n_label ? ", N_label " + n_label : "");

  PlotData plot;
  plot.kind = req.kind;
  plot.ylabel = req.quantity + " (" + req.subset + ")";
  std::map<std::string, std::map<std::pair<double, std::string>, Accum>> series;

  if (req.kind == "beta" || req.kind == "bits") {
    const std::string xkey = req.kind;
    for (const auto* o : readouts) {
      const auto x = key_or(*o, xkey);
      if (x.empty()) continue;
      std::string name = key_or(*o, "family");
      if (req.kind == "bits") {
        name = key_or(*o, "variant", name) + " n_msg=" + key_or(*o, "n_msg");
      }
      name += "/" + key_or(*o, "mode");
      series[name][{std::stod(x), ""}].values.push_back(o->value);
    }
    plot.title = (req.kind == "beta" ? "score vs beta (" : "score vs bandwidth (") + context + ")";
    plot.xlabel = req.kind == "beta" ? "beta" : "bits";
  } else if (req.kind == "bars") {
    for (const auto* o : readouts) {
      const auto label = key_or(*o, req.bar_group);
      if (label.empty()) continue;
      series[key_or(*o, "mode")][{0.0, label}].values.push_back(o->value);
    }
    plot.title = "score by " + req.bar_group + " (" + context + ")";
    plot.xlabel = req.bar_group;
  } else if (req.kind == "metric_vs_gen") {
    std::map<std::pair<std::string, std::string>, double> metric;  // (grid_key, seed) -> value
    for (const auto& o : observations) {
      if (matches(o, "kind", "metrics") && o.quantity == req.metric && matches(o, "mode", req.metric_mode)) {
        metric[{key_or(o, "grid_key"), key_or(o, "seed")}] = o.value;
      }
    }
    const std::string gen_mode = req.mode.empty() ? "latent" : req.mode;
    std::vector<double> xs, ys;
    for (const auto* o : readouts) {
      if (!matches(*o, "mode", gen_mode)) continue;
      const auto it = metric.find({key_or(*o, "grid_key"), key_or(*o, "seed")});
      if (it == metric.end()) continue;
      series[key_or(*o, "family")][{it->second, key_or(*o, "grid_key") + "#" + key_or(*o, "seed")}].values.push_back(
          o->value);
      xs.push_back(it->second);
      ys.push_back(o->value);
    }
    if (xs.size() >= 2) {
      const auto rho = spearman(xs, ys);
      char buf[96];
      if (rho.defined) {
        std::snprintf(buf, sizeof(buf), "Spearman rho = %.3f (n = %zu)", rho.value, xs.size());
      } else {
        std::snprintf(buf, sizeof(buf), "Spearman rho undefined (n = %zu)", xs.size());
      }
      plot.annotation = buf;
    }
    plot.title = req.metric + " vs generalization (" + gen_mode + ", " + context + ")";
    plot.xlabel = req.metric + " (" + req.metric_mode + ")";
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown plot kind '" + req.kind + "'");
  }
  require(!series.empty(), ErrorCode::kInvalidArgument, "plot '" + req.kind + "': no matching records");

  for (const auto& [name, points] : series) {
    PlotSeries s{name, {}};
    for (const auto& [xl, acc] : points) {
      // Scatter points are single observations; the label keeps them apart.
      s.points.push_back({xl.first, acc.mean(), acc.std(), req.kind == "bars" ? xl.second : ""});
    }
    if (req.kind == "bars") {
      std::stable_sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) {
        const bool na = !a.label.empty() && std::isdigit(static_cast<unsigned char>(a.label[0]));
        const bool nb = !b.label.empty() && std::isdigit(static_cast<unsigned char>(b.label[0]));
        if (na && nb) return std::stod(a.label) < std::stod(b.label);
        return a.label < b.label;
      });
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

void write_plot(const PlotData& plot, const std::filesystem::path& stem) {
  const auto svg = render_svg(plot);
  const auto csv = plot_to_csv(plot);
  write_file_bytes(stem.string() + ".svg", std::span(reinterpret_cast<const std::uint8_t*>(svg.data()), svg.size()));
  write_file_bytes(stem.string() + ".csv", std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size()));
}

}  // namespace compgen
