#ifndef PUSHSUB_SVG_HPP
#define PUSHSUB_SVG_HPP

/// \file svg.hpp
/// \brief Minimal line-plot writer. Log axes drop nonpositive or non-finite
/// points; values below `floor` are drawn at the floor.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pushsub {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  SvgPlot& log_x(bool on = true) { log_x_ = on; return *this; }
  SvgPlot& log_y(bool on = true) { log_y_ = on; return *this; }
  SvgPlot& floor(double f) { floor_ = f; return *this; }
  SvgPlot& add(Series s) { series_.push_back(std::move(s)); return *this; }

  void write(std::ostream& os) const {
    std::vector<std::vector<std::pair<double, double>>> pts;
    double x0 = inf(), x1 = -inf(), y0 = inf(), y1 = -inf();
    for (const Series& s : series_) {
      std::vector<std::pair<double, double>> p;
      for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
        double x = s.x[k], y = s.y[k];
        if (log_y_ && std::isfinite(y)) y = std::max(y, floor_);
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        if ((log_x_ && x <= 0.0) || (log_y_ && y <= 0.0)) continue;
        x = log_x_ ? std::log10(x) : x;
        y = log_y_ ? std::log10(y) : y;
        x0 = std::min(x0, x); x1 = std::max(x1, x);
        y0 = std::min(y0, y); y1 = std::max(y1, y);
        p.emplace_back(x, y);
      }
      pts.push_back(std::move(p));
    }
    if (!(x0 <= x1)) { x0 = 0.0; x1 = 1.0; y0 = 0.0; y1 = 1.0; }
    if (x1 == x0) { x0 -= 0.5; x1 += 0.5; }
    if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }

    const double W = 720, H = 440, L = 80, R = 180, T = 40, B = 60;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(title_) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
       << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
      os << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
         << tick(xv, log_x_) << "</text>\n";
      os << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
         << tick(yv, log_y_) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
       << escape(xlabel_) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << (T + H - B) / 2 << ")\">" << escape(ylabel_) << "</text>\n";
    for (std::size_t s = 0; s < series_.size(); ++s) {
      const Series& ser = series_[s];
      if (!pts[s].empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.5\""
           << (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        for (const auto& [x, y] : pts[s]) os << sx(x) << ',' << sy(y) << ' ';
        os << "\"/>\n";
      }
      const double ly = T + 16 + 18.0 * double(s);
      os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 34
         << "\" y2=\"" << ly << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\""
         << (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
      os << "<text x=\"" << W - R + 40 << "\" y=\"" << ly + 4 << "\">" << escape(ser.name)
         << "</text>\n";
    }
    os << "</svg>\n";
  }

  void write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write(out);
  }

 private:
  static double inf() { return std::numeric_limits<double>::infinity(); }

  static std::string tick(double v, bool log) {
    char buf[32];
    if (log)
      std::snprintf(buf, sizeof buf, "1e%.1f", v);
    else
      std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
      }
    }
    return out;
  }

  std::string title_, xlabel_, ylabel_;
  bool log_x_ = false, log_y_ = false;
  double floor_ = 1e-17;
  std::vector<Series> series_;
};

}  // namespace pushsub

#endif  // PUSHSUB_SVG_HPP
