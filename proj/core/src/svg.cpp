#include "ioeq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ioeq/csv.hpp"

namespace ioeq {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

std::string num(double v) { return format_double(v); }

}  // namespace

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke, double stroke_width) {
  std::string e = "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
                  num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"";
  if (!stroke.empty()) {
    e += " stroke=\"" + stroke + "\" stroke-width=\"" + num(stroke_width) + "\"";
  }
  e += "/>";
  elements_.push_back(std::move(e));
}

void SvgCanvas::line(double x1, double y1, double x2, double y2,
                     const std::string& stroke, double width) {
  elements_.push_back("<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
                      num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke +
                      "\" stroke-width=\"" + num(width) + "\"/>");
}

void SvgCanvas::text(double x, double y, const std::string& s, double size,
                     const std::string& anchor, const std::string& fill) {
  elements_.push_back("<text x=\"" + num(x) + "\" y=\"" + num(y) +
                      "\" font-family=\"sans-serif\" font-size=\"" + num(size) +
                      "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
                      xml_escape(s) + "</text>");
}

std::string SvgCanvas::render() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) +
         "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " +
         num(height_) + "\">\n";
  for (const auto& e : elements_) {
    out += e;
    out += '\n';
  }
  out += "</svg>\n";
  return out;
}

void SvgCanvas::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write SVG: " + path);
  f << render();
}

const std::string& chart_color(std::size_t index) {
  static const std::vector<std::string> palette = {
      "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb"};
  return palette[index % palette.size()];
}

std::string heat_color(double v) {
  if (std::isnan(v)) return "#dddddd";
  v = std::clamp(v, -1.0, 1.0);
  // -1 = blue (68,119,170), 0 = white, +1 = red (238,102,119)
  int r, g, b;
  if (v < 0) {
    const double t = -v;
    r = static_cast<int>(std::lround(255 + t * (68 - 255)));
    g = static_cast<int>(std::lround(255 + t * (119 - 255)));
    b = static_cast<int>(std::lround(255 + t * (170 - 255)));
  } else {
    r = static_cast<int>(std::lround(255 + v * (238 - 255)));
    g = static_cast<int>(std::lround(255 + v * (102 - 255)));
    b = static_cast<int>(std::lround(255 + v * (119 - 255)));
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace ioeq
