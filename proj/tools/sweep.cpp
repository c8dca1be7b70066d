#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "logitmat/error.hpp"

namespace logitmat::lab {

SweepResult run_sweep(const SplitPair& split, const ComparisonOptions& base,
                      const std::vector<double>& rates, std::size_t repeats) {
  if (rates.empty()) throw Error(ErrorKind::kInvalidArgument, "sweep needs at least one rate");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (!(rates[k] > 0.0) || (k > 0 && !(rates[k] > rates[k - 1])))
      throw Error(ErrorKind::kInvalidArgument,
                  "sweep rates must be positive and strictly increasing");
  }
  if (repeats < 1) throw Error(ErrorKind::kInvalidArgument, "sweep needs at least one seed");

  SweepResult result;
  for (double rate : rates) {
    std::map<std::string, std::vector<const ReportRow*>> by_algorithm;
    const std::size_t first = result.detail.size();
    for (std::size_t r = 0; r < repeats; ++r) {
      ComparisonOptions options = base;
      options.config.learning_rate = rate;
      options.config.seed = base.config.seed + r;
      EvalReport report = run_comparison(split, options);
      for (ReportRow& row : report.rows)
        result.detail.push_back({rate, options.config.seed, std::move(row)});
    }
    for (std::size_t k = first; k < result.detail.size(); ++k)
      by_algorithm[result.detail[k].row.algorithm].push_back(&result.detail[k].row);

    for (const auto& [name, rows] : by_algorithm) {
      double mae_sum = 0.0, degree_sum = 0.0;
      bool have_degree = true;
      for (const ReportRow* row : rows) {
        mae_sum += row->mae;
        if (row->matthew_degree) {
          degree_sum += *row->matthew_degree;
        } else {
          have_degree = false;
        }
      }
      const double n = static_cast<double>(rows.size());
      result.rows.push_back({rate, name, mae_sum / n,
                             have_degree ? std::optional<double>(degree_sum / n) : std::nullopt});
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "learning_rate,algorithm,mae,matthew_degree\n";
  for (const SweepRow& row : result.rows) {
    out << format_double(row.learning_rate) << ',' << row.algorithm << ','
        << format_double(row.mae) << ',';
    if (row.matthew_degree) out << format_double(*row.matthew_degree);
    out << '\n';
  }
}

void write_sweep_detail_csv(std::ostream& out, const SweepResult& result) {
  out << "learning_rate,seed,algorithm,mae,matthew_degree\n";
  for (const SweepDetailRow& d : result.detail) {
    out << format_double(d.learning_rate) << ',' << d.seed << ',' << d.row.algorithm << ','
        << format_double(d.row.mae) << ',';
    if (d.row.matthew_degree) out << format_double(*d.row.matthew_degree);
    out << '\n';
  }
}

namespace {

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

void write_sweep_svg(std::ostream& out, const SweepResult& result) {
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 170, kTop = 20, kBottom = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f"};

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
  for (const SweepRow& row : result.rows) {
    const double x = std::log10(row.learning_rate);
    series[row.algorithm].emplace_back(x, row.mae);
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, row.mae);
    hi_y = std::max(hi_y, row.mae);
  }
  if (series.empty()) {
    lo_x = lo_y = 0;
    hi_x = hi_y = 1;
  }
  if (hi_x == lo_x) { lo_x -= 0.5; hi_x += 0.5; }
  if (hi_y == lo_y) { lo_y -= 0.5; hi_y += 0.5; }
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - lo_x) / (hi_x - lo_x) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - lo_y) / (hi_y - lo_y)) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">log10(learning rate)</text>\n";
  out << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 14 "
      << kTop + plot_h / 2 << ")\" text-anchor=\"middle\">MAE</text>\n";
  for (double y : {lo_y, hi_y}) {
    out << "<text x=\"" << kLeft - 4 << "\" y=\"" << fixed(py(y) + 4)
        << "\" text-anchor=\"end\">" << fixed(y) << "</text>\n";
  }
  for (double x : {lo_x, hi_x}) {
    out << "<text x=\"" << fixed(px(x)) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << fixed(x) << "</text>\n";
  }

  std::size_t color = 0;
  for (const auto& [name, points] : series) {
    const char* stroke = kColors[color++ % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (k) out << ' ';
      out << fixed(px(points[k].first)) << ',' << fixed(py(points[k].second));
    }
    out << "\"/>\n";
    const double ly = kTop + 14.0 * static_cast<double>(color);
    out << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight + 32 << "\" y2=\"" << ly << "\" stroke=\"" << stroke
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly + 4 << "\">" << name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace logitmat::lab
