// Copyright 2026 The NES Authors.
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

#include "nes/harness/summarize.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "harness/csv.h"
#include "nes/error.h"
#include "nes/store/matrix_file.h"

namespace nes {

const std::vector<std::string> kSummaryMetrics = {
    "nll",         "error",         "ece",          "oracle_nll",
    "avg_bsl_nll", "pred_disagreement", "nets_trained", "wall_seconds"};

namespace {

double metric_of(const ResultRow& row, const std::string& metric) {
  const EvalReport& r = row.report;
  if (metric == "nll") return r.nll;
  if (metric == "error") return r.error;
  if (metric == "ece") return r.ece;
  if (metric == "oracle_nll") return r.oracle_nll;
  if (metric == "avg_bsl_nll") return r.avg_bsl_nll;
  if (metric == "pred_disagreement") return r.pred_disagreement;
  if (metric == "nets_trained") return static_cast<double>(row.nets_trained);
  if (metric == "wall_seconds") return row.wall_seconds;
  throw std::invalid_argument("unknown metric " + metric);
}

std::string fmt(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

struct Point {
  double x = 0.0;
  MeanCi y;
};

struct Series {
  std::string label;
  std::vector<Point> points;
  std::size_t color = 0;
};

// Step from {1, 2, 5} x 10^k giving about `target` intervals over `span`.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0}) {
    if (f * base >= raw) return f * base;
  }
  return 10.0 * base;
}

// Line chart with 95% interval bars.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<Series>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double width = 640, height = 420;
  const double left = 70, right = 170, top = 40, bottom = 55;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  std::set<double> ticks;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!std::isfinite(p.y.mean)) continue;
      x_lo = std::min(x_lo, p.x);
      x_hi = std::max(x_hi, p.x);
      y_lo = std::min(y_lo, p.y.mean - p.y.half_width);
      y_hi = std::max(y_hi, p.y.mean + p.y.half_width);
      ticks.insert(p.x);
    }
  }
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"14\">" << title << "</text>\n";
  if (!std::isfinite(x_lo)) {
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
        << "\" text-anchor=\"middle\">no finite values</text>\n</svg>\n";
    return svg.str();
  }
  if (x_hi == x_lo) { x_lo -= 1; x_hi += 1; }
  if (y_hi == y_lo) { y_lo -= 0.5; y_hi += 0.5; }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) {
    return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;
  };

  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double step = nice_step(y_hi - y_lo, 5);
  for (double y = std::ceil(y_lo / step) * step; y <= y_hi; y += step) {
    svg << "<line x1=\"" << left - 4 << "\" x2=\"" << left << "\" y1=\""
        << sy(y) << "\" y2=\"" << sy(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 7 << "\" y=\"" << sy(y) + 4
        << "\" text-anchor=\"end\">" << fmt(std::round(y / step) * step)
        << "</text>\n";
  }
  for (double x : ticks) {
    svg << "<line x1=\"" << sx(x) << "\" x2=\"" << sx(x) << "\" y1=\""
        << top + plot_h << "\" y2=\"" << top + plot_h + 4
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << sx(x) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  svg << "<text transform=\"translate(16," << top + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[series[i].color % std::size(kColors)];
    std::ostringstream path;
    for (const auto& p : series[i].points) {
      if (!std::isfinite(p.y.mean)) continue;
      path << (path.tellp() == 0 ? "" : " ") << sx(p.x) << ',' << sy(p.y.mean);
      if (p.y.half_width > 0) {
        svg << "<line x1=\"" << sx(p.x) << "\" x2=\"" << sx(p.x) << "\" y1=\""
            << sy(p.y.mean - p.y.half_width) << "\" y2=\""
            << sy(p.y.mean + p.y.half_width) << "\" stroke=\"" << color
            << "\"/>\n";
      }
      svg << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y.mean)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"" << path.str() << "\"/>\n";
    const double ly = top + 10 + 18.0 * i;
    svg << "<line x1=\"" << left + plot_w + 12 << "\" x2=\""
        << left + plot_w + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + plot_w + 37 << "\" y=\"" << ly + 4 << "\">"
        << series[i].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

using CellKey = std::tuple<std::string, std::size_t, std::size_t, int>;  // method, K, M, s

void check_grid(const std::vector<ResultRow>& rows) {
  std::map<std::string, std::set<std::uint64_t>> seeds;
  std::map<std::string, std::set<std::pair<std::size_t, int>>> grids;
  std::map<CellKey, std::set<std::uint64_t>> cell_seeds;
  for (const auto& row : rows) {
    seeds[row.method].insert(row.seed);
    grids[row.method].insert({row.M, row.severity});
    auto& s = cell_seeds[{row.method, row.K, row.M, row.severity}];
    if (!s.insert(row.seed).second) {
      throw DataError("duplicate result for method " + row.method + " seed " +
                      std::to_string(row.seed) + " K=" + std::to_string(row.K) +
                      " M=" + std::to_string(row.M) + " severity " +
                      std::to_string(row.severity));
    }
  }
  for (const auto& [key, s] : cell_seeds) {
    if (s != seeds[std::get<0>(key)]) {
      throw DataError("method " + std::get<0>(key) +
                      " is missing seeds at K=" + std::to_string(std::get<1>(key)));
    }
  }
  const auto& [first_method, first_seeds] = *seeds.begin();
  for (const auto& [method, s] : seeds) {
    if (s != first_seeds) {
      throw DataError("methods " + first_method + " and " + method +
                      " were run on different seeds");
    }
    if (grids[method] != grids[first_method]) {
      throw DataError("methods " + first_method + " and " + method +
                      " cover different (M, severity) grids");
    }
  }
}

}  // namespace

MeanCi mean_ci(std::span<const double> values) {
  MeanCi out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double n = static_cast<double>(values.size());
  out.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

std::vector<SummaryCell> summarize_rows(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw DataError("no result rows to summarize");
  check_grid(rows);
  std::map<CellKey, std::vector<const ResultRow*>> groups;
  std::map<std::string, std::string> space_of;
  for (const auto& row : rows) {
    groups[{row.method, row.K, row.M, row.severity}].push_back(&row);
    space_of.emplace(row.method, row.space);
  }
  std::vector<SummaryCell> cells;
  for (const auto& [key, members] : groups) {
    for (const auto& metric : kSummaryMetrics) {
      std::vector<double> values;
      for (const ResultRow* row : members) values.push_back(metric_of(*row, metric));
      SummaryCell cell;
      std::tie(cell.method, cell.K, cell.M, cell.severity) = key;
      cell.space = space_of[cell.method];
      cell.metric = metric;
      cell.value = mean_ci(values);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<SelectionRecord> read_selections_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "seed,method,K,M,severity,val_nll,genomes,learner_seeds,weights") {
    throw DataError(path.string() + " does not have the selections.csv header");
  }
  std::vector<SelectionRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != 9) throw DataError("malformed row in " + path.string());
    try {
      SelectionRecord r;
      r.seed = std::stoull(f[0]);
      r.method = f[1];
      r.K = std::stoull(f[2]);
      r.M = std::stoull(f[3]);
      r.severity = std::stoi(f[4]);
      r.val_nll = std::stod(f[5]);
      r.genomes = split(f[6], ';');
      for (const auto& s : split(f[7], ';')) r.learner_seeds.push_back(std::stoull(s));
      if (!f[8].empty()) {
        for (const auto& w : split(f[8], ';')) r.weights.push_back(std::stod(w));
      }
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DataError("malformed number in " + path.string());
    }
  }
  return records;
}

std::vector<KStep> validation_vs_K(const std::vector<SelectionRecord>& records) {
  std::map<std::tuple<std::string, std::uint64_t, std::size_t, int>,
           std::map<std::size_t, double>>
      curves;
  for (const auto& r : records) {
    curves[{r.method, r.seed, r.M, r.severity}][r.K] = r.val_nll;
  }
  std::vector<KStep> steps;
  for (const auto& [key, curve] : curves) {
    for (auto it = curve.begin(); std::next(it) != curve.end(); ++it) {
      const auto next = std::next(it);
      KStep step;
      std::tie(step.method, step.seed, step.M, step.severity) = key;
      step.K_from = it->first;
      step.K_to = next->first;
      step.val_from = it->second;
      step.val_to = next->second;
      steps.push_back(std::move(step));
    }
  }
  return steps;
}

SummaryOutput summarize(const std::vector<std::filesystem::path>& run_dirs,
                        const std::filesystem::path& out_dir) {
  if (run_dirs.empty()) throw ConfigError("summarize needs at least one run");
  std::vector<ResultRow> rows;
  std::vector<SelectionRecord> selections;
  for (const auto& dir : run_dirs) {
    auto part = read_results_csv(dir / "results.csv");
    rows.insert(rows.end(), part.begin(), part.end());
    if (std::filesystem::exists(dir / "selections.csv")) {
      auto sel = read_selections_csv(dir / "selections.csv");
      selections.insert(selections.end(), sel.begin(), sel.end());
    }
  }
  SummaryOutput out;
  out.cells = summarize_rows(rows);
  out.k_steps = validation_vs_K(selections);
  std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(out_dir / name, text);
    out.files.push_back(out_dir / name);
  };

  std::ostringstream summary;
  summary << "method,space,K,M,severity,metric,mean,ci95,n\n";
  for (const auto& c : out.cells) {
    summary << csv::quote(c.method) << ',' << csv::quote(c.space) << ',' << c.K << ',' << c.M << ','
            << c.severity << ',' << c.metric << ',' << fmt(c.value.mean) << ','
            << fmt(c.value.half_width) << ',' << c.value.n << '\n';
  }
  emit("summary.csv", summary.str());

  if (!out.k_steps.empty()) {
    std::ostringstream k;
    k << "method,seed,M,severity,K_from,K_to,val_nll_from,val_nll_to,"
         "non_increasing\n";
    for (const auto& s : out.k_steps) {
      k << csv::quote(s.method) << ',' << s.seed << ',' << s.M << ',' << s.severity << ','
        << s.K_from << ',' << s.K_to << ',' << fmt(s.val_from) << ','
        << fmt(s.val_to) << ',' << (s.non_increasing() ? 1 : 0) << '\n';
    }
    emit("validation_vs_K.csv", k.str());
  }

  // Series use the largest K of each (method, M) unless K is the axis.
  std::map<std::pair<std::string, std::size_t>, std::set<std::size_t>> k_values;
  std::set<std::string> methods;
  std::set<std::size_t> ms;
  std::set<int> severities;
  for (const auto& c : out.cells) {
    k_values[{c.method, c.M}].insert(c.K);
    methods.insert(c.method);
    ms.insert(c.M);
    severities.insert(c.severity);
  }
  auto color_of = [&](const std::string& method) {
    return static_cast<std::size_t>(
        std::distance(methods.begin(), methods.find(method)));
  };
  auto max_k = [&](const std::string& method, std::size_t m) {
    const auto it = k_values.find({method, m});
    return it == k_values.end() ? std::size_t{0} : *it->second.rbegin();
  };
  auto varies_in_k = [&](const std::string& method, std::size_t m) {
    const auto it = k_values.find({method, m});
    return it != k_values.end() && it->second.size() > 1;
  };
  std::map<std::tuple<std::string, std::size_t, std::size_t, int, std::string>,
           MeanCi>
      lookup;
  for (const auto& c : out.cells) {
    lookup[{c.method, c.K, c.M, c.severity, c.metric}] = c.value;
  }

  std::ostringstream csv_m, csv_k, csv_s;
  csv_m << "method,severity,M,metric,mean,ci95,n\n";
  csv_s << "method,M,severity,metric,mean,ci95,n\n";
  csv_k << "method,M,severity,K,metric,mean,ci95,n\n";
  for (const auto& c : out.cells) {
    const std::string tail = c.metric + ',' + fmt(c.value.mean) + ',' +
                             fmt(c.value.half_width) + ',' +
                             std::to_string(c.value.n) + '\n';
    if (c.K == max_k(c.method, c.M)) {
      csv_m << csv::quote(c.method) << ',' << c.severity << ',' << c.M << ',' << tail;
      csv_s << csv::quote(c.method) << ',' << c.M << ',' << c.severity << ',' << tail;
    }
    if (varies_in_k(c.method, c.M)) {
      csv_k << csv::quote(c.method) << ',' << c.M << ',' << c.severity << ',' << c.K << ','
            << tail;
    }
  }
  emit("series_vs_M.csv", csv_m.str());
  emit("series_vs_severity.csv", csv_s.str());
  const bool has_k_axis =
      std::any_of(k_values.begin(), k_values.end(),
                  [](const auto& entry) { return entry.second.size() > 1; });
  if (has_k_axis) emit("series_vs_K.csv", csv_k.str());

  for (const std::string metric : {"nll", "error", "ece"}) {
    for (int s : severities) {
      std::vector<Series> series;
      for (const auto& method : methods) {
        Series line{method, {}, color_of(method)};
        for (std::size_t m : ms) {
          const auto it = lookup.find({method, max_k(method, m), m, s, metric});
          if (it != lookup.end()) line.points.push_back({double(m), it->second});
        }
        series.push_back(std::move(line));
      }
      emit(metric + "_vs_M_sev" + std::to_string(s) + ".svg",
           render_svg(metric + " vs ensemble size (severity " +
                          std::to_string(s) + ")",
                      "M", metric, series));
    }
    for (std::size_t m : ms) {
      std::vector<Series> series;
      for (const auto& method : methods) {
        Series line{method, {}, color_of(method)};
        for (int s : severities) {
          const auto it = lookup.find({method, max_k(method, m), m, s, metric});
          if (it != lookup.end()) line.points.push_back({double(s), it->second});
        }
        series.push_back(std::move(line));
      }
      emit(metric + "_vs_severity_M" + std::to_string(m) + ".svg",
           render_svg(metric + " vs shift severity (M = " + std::to_string(m) +
                          ")",
                      "severity", metric, series));
    }
    if (!has_k_axis) continue;
    for (std::size_t m : ms) {
      for (int s : severities) {
        std::vector<Series> series;
        for (const auto& method : methods) {
          if (!varies_in_k(method, m)) continue;
          Series line{method, {}, color_of(method)};
          for (std::size_t k : k_values.at({method, m})) {
            const auto it = lookup.find({method, k, m, s, metric});
            if (it != lookup.end()) line.points.push_back({double(k), it->second});
          }
          series.push_back(std::move(line));
        }
        emit(metric + "_vs_K_M" + std::to_string(m) + "_sev" +
                 std::to_string(s) + ".svg",
             render_svg(metric + " vs budget K (M = " + std::to_string(m) +
                            ", severity " + std::to_string(s) + ")",
                        "K", metric, series));
      }
    }
  }
  return out;
}

}  // namespace nes
