#include "qnoma/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "qnoma/errors.hpp"

namespace qnoma::sweep {

const char* variable_name(Variable v) {
  return v == Variable::kOmega ? "omega" : "bandwidth_hz";
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ConfigError("sweep grid must be non-empty");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (jobs < 0) throw ConfigError("sweep jobs must be >= 0");
  base.validate();
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct RunTask {
  sim::SimConfig config;
};

struct RunResult {
  bool failed = false;
  sim::RunMetrics metrics;
};

std::vector<RunResult> execute(const std::vector<RunTask>& tasks, int jobs) {
  std::vector<RunResult> results(tasks.size());
  unsigned n_workers = jobs > 0 ? static_cast<unsigned>(jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, std::max<std::size_t>(tasks.size(), 1));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      try {
        results[i].metrics = sim::run(tasks[i].config);
      } catch (const std::exception&) {
        results[i].failed = true;
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return results;
}

SweepRow make_row(const char* variable, double value, std::uint64_t seed,
                  const std::string& mode, const RunResult& res) {
  SweepRow row;
  row.variable = variable;
  row.value = value;
  row.seed = seed;
  row.mode = mode;
  row.failed = res.failed;
  if (!res.failed) {
    row.mean_psnr_db = res.metrics.mean_psnr_db;
    row.stall_count = res.metrics.stall_count_total;
    row.join_time_slots = res.metrics.mean_join_time_slots;
    row.mean_rate_bps = res.metrics.mean_rate_bps;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  const char* var = variable_name(spec.variable);

  std::vector<RunTask> tasks;
  // Task layout: QoE-aware runs for every (grid value, seed), then baseline
  // runs. The baseline ignores omega, so the omega sweep runs it once per
  // seed; the bandwidth sweep needs it per grid value.
  for (double value : spec.grid) {
    for (std::uint64_t seed : spec.seeds) {
      RunTask t{spec.base};
      t.config.seed = seed;
      t.config.sched.mode = sched::Mode::kQoeAware;
      if (spec.variable == Variable::kOmega) {
        t.config.sched.omega = value;
      } else {
        t.config.bandwidth_hz = value;
      }
      tasks.push_back(std::move(t));
    }
  }
  std::size_t baseline_offset = tasks.size();
  if (spec.variable == Variable::kOmega) {
    for (std::uint64_t seed : spec.seeds) {
      RunTask t{spec.base};
      t.config.seed = seed;
      t.config.sched.mode = sched::Mode::kBaseline;
      tasks.push_back(std::move(t));
    }
  } else {
    for (double value : spec.grid) {
      for (std::uint64_t seed : spec.seeds) {
        RunTask t{spec.base};
        t.config.seed = seed;
        t.config.sched.mode = sched::Mode::kBaseline;
        t.config.bandwidth_hz = value;
        tasks.push_back(std::move(t));
      }
    }
  }

  std::vector<RunResult> results = execute(tasks, spec.jobs);

  std::vector<SweepRow> rows;
  rows.reserve(2 * spec.grid.size() * spec.seeds.size());
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
      rows.push_back(make_row(var, spec.grid[g], spec.seeds[s], "qoe_aware",
                              results[g * spec.seeds.size() + s]));
      std::size_t b = spec.variable == Variable::kOmega
                          ? baseline_offset + s
                          : baseline_offset + g * spec.seeds.size() + s;
      rows.push_back(make_row(var, spec.grid[g], spec.seeds[s], "baseline", results[b]));
    }
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.mode < b.mode;
  });
  return rows;
}

static const char kCsvHeader[] =
    "variable,value,seed,mode,mean_psnr_db,stall_count,join_time_slots,mean_rate_bps";

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const SweepRow& r : rows) {
    out << r.variable << ',' << fmt(r.value) << ',' << r.seed << ',' << r.mode << ',';
    if (r.failed) {
      out << "nan,nan,nan,nan\n";
      continue;
    }
    out << (r.mean_psnr_db ? fmt(*r.mean_psnr_db) : "nan") << ',';
    out << r.stall_count << ',';
    out << (r.join_time_slots ? fmt(*r.join_time_slots) : "nan") << ',';
    out << fmt(r.mean_rate_bps) << '\n';
  }
}

void emit_csv_file(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write CSV file '" + path + "'");
  emit_csv(rows, out);
  if (!out.good()) throw SimError("error writing CSV file '" + path + "'");
}

std::vector<SweepRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("sweep CSV: missing or wrong header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string item;
    while (std::getline(row, item, ',')) f.push_back(item);
    if (f.size() != 8) throw ConfigError("sweep CSV: bad row '" + line + "'");
    SweepRow r;
    r.variable = f[0];
    r.value = std::stod(f[1]);
    r.seed = std::stoull(f[2]);
    r.mode = f[3];
    if (f[5] == "nan") {
      r.failed = true;
    } else {
      if (f[4] != "nan") r.mean_psnr_db = std::stod(f[4]);
      r.stall_count = std::stoi(f[5]);
      if (f[6] != "nan") r.join_time_slots = std::stod(f[6]);
      r.mean_rate_bps = std::stod(f[7]);
    }
    rows.push_back(r);
  }
  return rows;
}

namespace {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
};

// Seed-averaged metric per (mode, value), modes in sorted order.
std::map<std::string, std::vector<SeriesPoint>> aggregate(
    const std::vector<SweepRow>& rows, bool psnr) {
  std::map<std::string, std::map<double, std::pair<double, int>>> acc;
  for (const SweepRow& r : rows) {
    if (r.failed) continue;
    if (psnr) {
      if (!r.mean_psnr_db) continue;
      auto& slot = acc[r.mode][r.value];
      slot.first += *r.mean_psnr_db;
      slot.second += 1;
    } else {
      auto& slot = acc[r.mode][r.value];
      slot.first += r.stall_count;
      slot.second += 1;
    }
  }
  std::map<std::string, std::vector<SeriesPoint>> out;
  for (const auto& [mode, by_value] : acc) {
    for (const auto& [value, sum_count] : by_value) {
      out[mode].push_back({value, sum_count.first / sum_count.second});
    }
  }
  return out;
}

const char* series_color(const std::string& mode, int index) {
  if (mode == "qoe_aware") return "#1f77b4";
  if (mode == "baseline") return "#d62728";
  return index == 0 ? "#2ca02c" : "#9467bd";
}

void draw_panel(std::ostream& out, const char* id, const char* title,
                const char* y_label,
                const std::map<std::string, std::vector<SeriesPoint>>& series,
                double x0, double panel_w) {
  const double y0 = 40, panel_h = 300;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& [mode, pts] : series) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (!(xmax > xmin)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  double ypad = 0.08 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto sx = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * panel_w; };
  auto sy = [&](double y) { return y0 + panel_h - (y - ymin) / (ymax - ymin) * panel_h; };
  char buf[256];

  out << "<g id=\"" << id << "\">\n";
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                "fill=\"none\" stroke=\"#444\"/>\n",
                x0, y0, panel_w, panel_h);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"25\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n",
                x0 + panel_w / 2, title);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-size=\"11\" "
                "transform=\"rotate(-90 %.2f %.2f)\">%s</text>\n",
                x0 - 42, y0 + panel_h / 2, x0 - 42, y0 + panel_h / 2, y_label);
  out << buf;
  // Min/max tick labels.
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\">%g</text>\n",
                x0, y0 + panel_h + 14, xmin);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"middle\">%g</text>\n",
                x0 + panel_w, y0 + panel_h + 14, xmax);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                x0 - 4, y0 + panel_h, ymin + ypad);
  out << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                x0 - 4, y0 + 10, ymax - ypad);
  out << buf;

  int index = 0;
  for (const auto& [mode, pts] : series) {
    out << "<polyline class=\"series\" data-mode=\"" << mode << "\" fill=\"none\" stroke=\""
        << series_color(mode, index) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", sx(pts[i].x), sy(pts[i].y));
      out << buf;
    }
    out << "\"/>\n";
    for (const auto& p : pts) {
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", sx(p.x),
                    sy(p.y), series_color(mode, index));
      out << buf;
    }
    ++index;
  }
  out << "</g>\n";
}

}  // namespace

void emit_chart(const std::vector<SweepRow>& rows, std::ostream& out) {
  if (rows.empty()) throw ConfigError("emit_chart: empty table");
  const std::string variable = rows.front().variable;

  auto psnr_series = aggregate(rows, /*psnr=*/true);
  auto stall_series = aggregate(rows, /*psnr=*/false);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"420\" "
         "viewBox=\"0 0 960 420\" font-family=\"sans-serif\">\n";
  draw_panel(out, "panel-psnr", ("mean PSNR vs " + variable).c_str(), "mean PSNR (dB)",
             psnr_series, 70, 360);
  draw_panel(out, "panel-stalls", ("stall count vs " + variable).c_str(), "stalls per run",
             stall_series, 550, 360);

  // Legend.
  char buf[256];
  double lx = 70;
  int index = 0;
  for (const auto& [mode, pts] : psnr_series) {
    (void)pts;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.2f\" y=\"395\" width=\"14\" height=\"4\" fill=\"%s\"/>"
                  "<text x=\"%.2f\" y=\"402\" font-size=\"11\">%s</text>\n",
                  lx, series_color(mode, index), lx + 18, mode.c_str());
    out << buf;
    lx += 130;
    ++index;
  }
  out << "</svg>\n";
}

void emit_chart_file(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write chart file '" + path + "'");
  emit_chart(rows, out);
  if (!out.good()) throw SimError("error writing chart file '" + path + "'");
}

}  // namespace qnoma::sweep
