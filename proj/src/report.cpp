#include "insulab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "insulab/mesh_io.hpp"

namespace insulab::report {

namespace {

json points_json(const std::vector<Point>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

std::string esc(const std::string& s) {
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

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string tick(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

json domain_json(const DomainSpec& spec) {
  json d;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          d = {{"kind", "disk"}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          d = {{"kind", "annulus"}, {"inner", s.inner}, {"outer", s.outer}};
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          d = {{"kind", "ellipse"}, {"a", s.a}, {"b", s.b}};
        } else {
          d = {{"kind", "polygon"}, {"vertices", points_json(s.vertices)}};
        }
      },
      spec.shape);
  d["h"] = spec.target_edge_length;
  return d;
}

json minimizer_json(const Discretization& disc, std::span<const double> u, double m, const heat::VanishingSet& vanishing,
                    const std::vector<double>& schedule) {
  const ScalarField density = heat::material_distribution(disc, u, m);
  json trace = json::object();
  json material = json::object();
  for (int i : disc.boundary_vertices) {
    const auto k = std::to_string(i);
    trace[k] = u[static_cast<std::size_t>(i)];
    material[k] = density[static_cast<std::size_t>(i)];
  }
  json edges = json::array();
  for (int e : vanishing.edges) {
    const auto& be = disc.mesh.boundary_edges[static_cast<std::size_t>(e)];
    edges.push_back({be.v[0], be.v[1]});
  }
  return {{"schedule", schedule}, {"boundary_trace", trace}, {"material_density", material}, {"vanishing_edges", edges}};
}

json m1_json(const heat::M1Report& r) {
  return {{"m1", r.m1},
          {"delta", r.delta},
          {"perimeter", r.perimeter},
          {"area", r.area},
          {"boundary_mean", r.boundary_mean},
          {"boundary_min", r.boundary_min},
          {"h", r.h},
          {"m1_refined", r.m1_refined},
          {"delta_refined", r.delta_refined},
          {"h_refined", r.h_refined},
          {"m1_extrapolated", r.m1_extrapolated}};
}

json m0_json(const decay::M0Report& r) {
  json j = {{"m0", r.m0}, {"kappa1", r.kappa1}, {"mu2", r.mu2}, {"lambda_d", r.lambda_d}, {"tol", r.tol}, {"h", r.h}};
  json hist = json::array();
  for (const auto& s : r.history) hist.push_back({{"lo", s.lo}, {"hi", s.hi}, {"m", s.m}, {"lambda_m", s.lambda_m}});
  j["history"] = hist;
  if (r.m0_refined) {
    j["refined"] = {{"m0", *r.m0_refined},
                    {"kappa1", r.kappa1_refined.value_or(0.0)},
                    {"mu2", r.mu2_refined.value_or(0.0)},
                    {"lambda_d", r.lambda_d_refined.value_or(0.0)},
                    {"h", r.h_refined.value_or(0.0)}};
  }
  return j;
}

json ball_json(const radial::BallThresholds& b) {
  return {{"n", b.n},           {"radius", b.radius},     {"p", b.p},       {"mu2", b.mu2},
          {"lambda_d", b.lambda_d}, {"volume", b.volume}, {"perimeter", b.perimeter}, {"m0", b.m0}};
}

std::string scan_csv(const std::vector<decay::ScanRow>& rows) {
  std::string out = std::string(kScanHeader) + "\n";
  for (const auto& r : rows) {
    out += format_double(r.m) + "," + format_double(r.lambda_m) + "," + format_double(r.vanish_measure) + "," +
           format_double(r.min_trace) + "\n";
  }
  return out;
}

std::string svg(const Plot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  for (double m : plot.x_marks) {
    x0 = std::min(x0, m);
    x1 = std::max(x1, m);
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-300) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y1))) {
    const double pad = std::max(1e-12, 0.5 * std::abs(y1));
    y0 -= pad;
    y1 += pad;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(plot.title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << tick(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << esc(plot.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << esc(plot.y_label) << "</text>\n";
  for (double m : plot.x_marks) {
    os << "<line x1=\"" << fixed(px(m)) << "\" y1=\"" << T << "\" x2=\"" << fixed(px(m)) << "\" y2=\"" << H - B
       << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
  }
  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
    os << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << color << "\">" << esc(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace insulab::report
