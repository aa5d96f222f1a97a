#include "ioeq/report_render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ioeq/csv.hpp"
#include "ioeq/svg.hpp"

namespace ioeq {

namespace {

constexpr double kMargin = 50.0;

std::string fmt(double v, int decimals = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(decimals);
  s << v;
  return s.str();
}

std::vector<std::string> run_names(const ComparisonReport& report) {
  std::vector<std::string> names;
  for (const auto& s : report.scores) {
    if (std::find(names.begin(), names.end(), s.run_name) == names.end()) {
      names.push_back(s.run_name);
    }
  }
  return names;
}

void write_tables(const std::string& dir, const ComparisonReport& report) {
  {
    CsvTable t;
    t.header = {"run",      "model_kind",    "target",         "r_squared",
                "mape_pct", "mape_excluded", "mean_prediction"};
    for (const auto& s : report.scores) {
      t.rows.push_back({s.run_name, s.model_kind, s.target,
                        format_double(s.r_squared), format_double(s.mape_pct),
                        std::to_string(s.mape_excluded),
                        format_double(s.mean_prediction)});
    }
    write_csv(dir + "/comparison.csv", t);
  }
  {
    CsvTable t;
    t.header = {"run", "target", "actual_mean", "reference_mean", "improvement_pct"};
    for (const auto& r : report.improvements) {
      t.rows.push_back({r.run_name, r.target, format_double(r.actual_mean),
                        format_double(r.reference_mean), format_double(r.rate_pct)});
    }
    write_csv(dir + "/improvements.csv", t);
  }
  {
    CsvTable t;
    t.header = {"run", "target", "feature", "mean_abs_phi", "rank"};
    for (const auto& r : report.importances) {
      t.rows.push_back({r.run_name, r.target, r.feature,
                        format_double(r.mean_abs_phi), std::to_string(r.rank)});
    }
    write_csv(dir + "/importance.csv", t);
  }
  {
    CsvTable t;
    t.header = {"field"};
    t.header.insert(t.header.end(), report.corr_fields.begin(),
                    report.corr_fields.end());
    for (std::size_t i = 0; i < report.corr_fields.size(); ++i) {
      std::vector<std::string> row{report.corr_fields[i]};
      for (std::size_t j = 0; j < report.corr_fields.size(); ++j) {
        row.push_back(format_double(report.corr[i][j]));
      }
      t.rows.push_back(std::move(row));
    }
    write_csv(dir + "/correlation.csv", t);
  }
}

void write_text_summary(const std::string& dir, const ComparisonReport& report) {
  std::ofstream f(dir + "/report.txt", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write report.txt in " + dir);

  f << "Model comparison (reference: " << report.reference << ")\n\n";
  f << "Scores per run and target\n";
  for (const auto& s : report.scores) {
    f << "  " << s.run_name << " [" << s.model_kind << "] " << s.target
      << ": R2 = " << fmt(s.r_squared, 4) << ", MAPE = " << fmt(s.mape_pct, 2) << "%";
    if (s.mape_excluded > 0) f << " (" << s.mape_excluded << " zero-truth rows excluded)";
    f << ", mean prediction = " << fmt(s.mean_prediction, 4) << "\n";
    if (s.cqi_stats) {
      const DistSummary& d = *s.cqi_stats;
      f << "    CQI distribution: min " << fmt(d.min, 1) << ", p25 " << fmt(d.p25, 1)
        << ", median " << fmt(d.p50, 1) << ", p75 " << fmt(d.p75, 1) << ", max "
        << fmt(d.max, 1) << ", mean " << fmt(d.mean, 2) << "\n";
    }
  }

  f << "\nImprovement over reference mean\n";
  for (const auto& r : report.improvements) {
    f << "  " << r.run_name << " " << r.target << ": " << fmt(r.actual_mean, 4)
      << " vs " << fmt(r.reference_mean, 4) << " -> " << fmt(r.rate_pct, 2) << "%\n";
  }

  f << "\nFeature importance (mean |phi|)\n";
  std::string last_key;
  for (const auto& r : report.importances) {
    const std::string key = r.run_name + "/" + r.target;
    if (key != last_key) {
      f << "  " << key << ":\n";
      last_key = key;
    }
    f << "    " << r.rank << ". " << r.feature << " = " << fmt(r.mean_abs_phi, 6)
      << "\n";
  }

  f << "\nMetric correlation (Pearson)\n";
  for (std::size_t i = 0; i < report.corr_fields.size(); ++i) {
    for (std::size_t j = i + 1; j < report.corr_fields.size(); ++j) {
      f << "  " << report.corr_fields[i] << " vs " << report.corr_fields[j] << ": "
        << fmt(report.corr[i][j], 4) << "\n";
    }
  }
}

// Distribution of predicted CQI per run: quartile box, min/max whiskers,
// median line, mean tick.
void render_cqi_box(const std::string& dir, const ComparisonReport& report) {
  std::vector<std::pair<std::string, DistSummary>> boxes;
  for (const auto& s : report.scores) {
    if (s.cqi_stats) boxes.emplace_back(s.run_name, *s.cqi_stats);
  }
  if (boxes.empty()) return;

  const double w = kMargin * 2 + 120.0 * static_cast<double>(boxes.size());
  const double h = 320.0;
  SvgCanvas svg(w, h);
  svg.text(w / 2, 24, "Predicted CQI distribution", 15, "middle");

  double lo = 0.0, hi = 15.0;
  for (const auto& [name, d] : boxes) {
    lo = std::min(lo, d.min);
    hi = std::max(hi, d.max);
  }
  const double top = 48.0, bottom = h - kMargin;
  auto ypos = [&](double v) {
    return bottom - (v - lo) / (hi - lo) * (bottom - top);
  };

  svg.line(kMargin - 10, ypos(lo), kMargin - 10, ypos(hi), "#444444");
  for (double tick = std::ceil(lo); tick <= hi; tick += 3.0) {
    svg.line(kMargin - 14, ypos(tick), kMargin - 10, ypos(tick), "#444444");
    svg.text(kMargin - 18, ypos(tick) + 4, fmt(tick, 0), 10, "end");
  }

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [name, d] = boxes[i];
    const double cx = kMargin + 60.0 + 120.0 * static_cast<double>(i);
    const std::string& color = chart_color(i);
    svg.line(cx, ypos(d.min), cx, ypos(d.max), "#444444");
    svg.line(cx - 16, ypos(d.min), cx + 16, ypos(d.min), "#444444");
    svg.line(cx - 16, ypos(d.max), cx + 16, ypos(d.max), "#444444");
    svg.rect(cx - 28, ypos(d.p75), 56, ypos(d.p25) - ypos(d.p75), color, "#333333");
    svg.line(cx - 28, ypos(d.p50), cx + 28, ypos(d.p50), "#000000", 2);
    svg.line(cx - 10, ypos(d.mean), cx + 10, ypos(d.mean), "#ffffff", 2);
    svg.text(cx, bottom + 18, name, 11, "middle");
    svg.text(cx, bottom + 32, "mean " + fmt(d.mean, 2), 10, "middle", "#555555");
  }
  svg.save(dir + "/cqi_box.svg");
}

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

// Grouped vertical bars with value labels; series named in a legend.
void render_grouped_bars(const std::string& path, const std::string& title,
                         const std::vector<std::string>& series,
                         const std::vector<BarGroup>& groups, int decimals) {
  if (groups.empty()) return;
  const double bar_w = 34.0;
  const double group_w = bar_w * static_cast<double>(series.size()) + 30.0;
  const double w = kMargin * 2 + group_w * static_cast<double>(groups.size());
  const double h = 340.0;
  SvgCanvas svg(w, h);
  svg.text(w / 2, 24, title, 15, "middle");

  double hi = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;
  const double top = 64.0, bottom = h - kMargin;
  auto bar_h = [&](double v) { return std::max(0.0, v) / hi * (bottom - top); };

  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = kMargin + 130.0 * static_cast<double>(s);
    svg.rect(lx, 34, 12, 12, chart_color(s));
    svg.text(lx + 18, 44, series[s], 11);
  }

  svg.line(kMargin - 6, bottom, w - kMargin / 2, bottom, "#444444");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double gx = kMargin + group_w * static_cast<double>(g) + 15.0;
    for (std::size_t s = 0; s < groups[g].values.size(); ++s) {
      const double v = groups[g].values[s];
      const double x = gx + bar_w * static_cast<double>(s);
      svg.rect(x, bottom - bar_h(v), bar_w - 4, bar_h(v), chart_color(s));
      svg.text(x + (bar_w - 4) / 2, bottom - bar_h(v) - 5, fmt(v, decimals), 9,
               "middle", "#333333");
    }
    svg.text(gx + bar_w * static_cast<double>(groups[g].values.size()) / 2,
             bottom + 18, groups[g].label, 11, "middle");
  }
  svg.save(path);
}

void render_score_bars(const std::string& dir, const ComparisonReport& report) {
  std::set<std::string> target_set;
  for (const auto& s : report.scores) target_set.insert(s.target);
  const std::vector<std::string> targets(target_set.begin(), target_set.end());
  const std::vector<std::string> names = run_names(report);

  auto collect = [&](bool use_r2) {
    std::vector<BarGroup> groups;
    for (const auto& name : names) {
      BarGroup g;
      g.label = name;
      for (const auto& target : targets) {
        for (const auto& s : report.scores) {
          if (s.run_name == name && s.target == target) {
            g.values.push_back(use_r2 ? std::max(0.0, s.r_squared) : s.mape_pct);
          }
        }
      }
      groups.push_back(std::move(g));
    }
    return groups;
  };

  render_grouped_bars(dir + "/score_bars.svg",
                      "Test R-squared per run (negative shown as 0)", targets,
                      collect(true), 3);
  render_grouped_bars(dir + "/mape_bars.svg", "Test MAPE (%) per run", targets,
                      collect(false), 1);
}

void render_rate_bars(const std::string& dir, const ComparisonReport& report) {
  const std::vector<std::string> series = {"dl_mbps", "ul_mbps"};
  std::vector<BarGroup> groups;

  // the reference means as their own leading group
  BarGroup ref;
  ref.label = report.reference;
  for (const auto& t : series) {
    for (const auto& r : report.improvements) {
      if (r.target == t) {
        ref.values.push_back(r.reference_mean);
        break;
      }
    }
  }
  if (ref.values.size() == series.size()) groups.push_back(std::move(ref));

  for (const auto& name : run_names(report)) {
    if (name == report.reference) continue;
    BarGroup g;
    g.label = name;
    for (const auto& t : series) {
      for (const auto& s : report.scores) {
        if (s.run_name == name && s.target == t) g.values.push_back(s.mean_prediction);
      }
    }
    if (g.values.size() == series.size()) groups.push_back(std::move(g));
  }
  render_grouped_bars(dir + "/rate_bars.svg", "Mean predicted data rate (Mbps)",
                      series, groups, 3);
}

// Horizontal importance bars for the first run, one panel per target.
void render_importance_bars(const std::string& dir, const ComparisonReport& report) {
  if (report.importances.empty()) return;
  const std::string& run = report.importances[0].run_name;

  std::vector<std::string> targets;
  std::map<std::string, std::vector<const FeatureImportanceRow*>> per_target;
  for (const auto& r : report.importances) {
    if (r.run_name != run) continue;
    if (per_target.find(r.target) == per_target.end()) targets.push_back(r.target);
    per_target[r.target].push_back(&r);
  }

  const double row_h = 22.0;
  std::size_t total_rows = 0;
  for (const auto& t : targets) total_rows += per_target[t].size() + 2;
  const double w = 560.0;
  const double h = 70.0 + row_h * static_cast<double>(total_rows);
  SvgCanvas svg(w, h);
  svg.text(w / 2, 24, "Feature importance, run " + run + " (mean |phi|)", 15, "middle");

  double maxphi = 0.0;
  for (const auto& r : report.importances) {
    if (r.run_name == run) maxphi = std::max(maxphi, r.mean_abs_phi);
  }
  if (maxphi <= 0.0) maxphi = 1.0;

  double y = 52.0;
  const double label_x = 160.0;
  const double bar_max = w - label_x - 90.0;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    svg.text(kMargin - 20, y + 4, "target: " + targets[ti], 13);
    y += row_h;
    for (const FeatureImportanceRow* r : per_target[targets[ti]]) {
      const double bw = r->mean_abs_phi / maxphi * bar_max;
      svg.text(label_x - 8, y + 11, r->feature, 11, "end");
      svg.rect(label_x, y, bw, row_h - 6, chart_color(ti));
      svg.text(label_x + bw + 6, y + 11, fmt(r->mean_abs_phi, 4), 10);
      y += row_h;
    }
    y += row_h;
  }
  svg.save(dir + "/importance_bars.svg");
}

void render_correlation_heat(const std::string& dir, const ComparisonReport& report) {
  const std::size_t p = report.corr_fields.size();
  if (p == 0) return;
  const double cell = 58.0;
  const double left = 120.0, top = 90.0;
  const double w = left + cell * static_cast<double>(p) + 30.0;
  const double h = top + cell * static_cast<double>(p) + 30.0;
  SvgCanvas svg(w, h);
  svg.text(w / 2, 24, "Metric correlation (Pearson)", 15, "middle");

  for (std::size_t j = 0; j < p; ++j) {
    svg.text(left + cell * (static_cast<double>(j) + 0.5), top - 10,
             report.corr_fields[j], 10, "middle");
  }
  for (std::size_t i = 0; i < p; ++i) {
    svg.text(left - 8, top + cell * (static_cast<double>(i) + 0.5) + 4,
             report.corr_fields[i], 10, "end");
    for (std::size_t j = 0; j < p; ++j) {
      const double r = report.corr[i][j];
      const double x = left + cell * static_cast<double>(j);
      const double y = top + cell * static_cast<double>(i);
      svg.rect(x, y, cell - 2, cell - 2, heat_color(r), "#999999", 0.5);
      svg.text(x + (cell - 2) / 2, y + cell / 2 + 4,
               std::isnan(r) ? "n/a" : fmt(r, 2), 11, "middle");
    }
  }
  svg.save(dir + "/correlation_heat.svg");
}

}  // namespace

void render_report_files(const std::string& dir, const ComparisonReport& report) {
  std::filesystem::create_directories(dir);
  write_tables(dir, report);
  write_text_summary(dir, report);
  render_cqi_box(dir, report);
  render_score_bars(dir, report);
  render_rate_bars(dir, report);
  render_importance_bars(dir, report);
  render_correlation_heat(dir, report);
}

}  // namespace ioeq
