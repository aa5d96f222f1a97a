#pragma once

#include <string>
#include <vector>

namespace ioeq {

// Minimal deterministic SVG writer: fixed attribute order, shortest
// round-trip number formatting, no clocks or ids, so output bytes are a pure
// function of the draw calls.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "", double stroke_width = 1.0);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0);
  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start", const std::string& fill = "#000000");

  std::string render() const;
  void save(const std::string& path) const;

 private:
  double width_;
  double height_;
  std::vector<std::string> elements_;
};

// Categorical palette, cycled by index.
const std::string& chart_color(std::size_t index);

// Diverging blue-white-red map for v in [-1, 1].
std::string heat_color(double v);

std::string xml_escape(const std::string& s);

}  // namespace ioeq
