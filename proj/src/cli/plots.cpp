#include "mtlse/cli/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "mtlse/cli/runner.hpp"
#include "mtlse/errors.hpp"

namespace mtlse::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " +
         num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
         "fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& extra = {}) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\"" + extra + ">" + escape(s) + "</text>\n";
}

double to_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw FormatError("not a number: '" + s + "'");
  }
}

void write_plot(const fs::path& path, const std::string& svg, std::vector<fs::path>& written) {
  fs::create_directories(path.parent_path());
  write_text_file(path, svg);
  written.push_back(path);
}

void plot_run(const fs::path& dir, std::vector<fs::path>& written) {
  const auto report = parse_csv(read_text_file(dir / "report.csv"));
  if (fs::exists(dir / "loss_curves.csv")) {
    write_plot(dir / "plots" / "loss_curves.svg", loss_curve_svg(parse_csv(read_text_file(dir / "loss_curves.csv"))),
               written);
  }
  if (fs::exists(dir / "confusion.csv")) {
    write_plot(dir / "plots" / "confusion.svg", confusion_svg(parse_csv(read_text_file(dir / "confusion.csv")), "recall (%)"),
               written);
  }
  const std::string prefix = "event_f.";
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& row : report.rows) {
    if (row.size() < 2 || row[1] != "mean") continue;
    for (std::size_t c = 0; c < report.header.size() && c < row.size(); ++c) {
      if (report.header[c].rfind(prefix, 0) == 0 && !row[c].empty()) {
        labels.push_back(report.header[c].substr(prefix.size()));
        values.push_back(to_double(row[c]));
      }
    }
  }
  if (!labels.empty()) write_plot(dir / "plots" / "per_event_f.svg", bar_chart_svg(labels, values, "per-event F"), written);
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) t.header = std::move(cells);
    else t.rows.push_back(std::move(cells));
    first = false;
  }
  return t;
}

std::string loss_curve_svg(const CsvTable& curves) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  double max_epoch = 1.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : curves.rows) {
    if (r.size() < 3) continue;
    if (!series.count(r[0])) order.push_back(r[0]);
    const double epoch = to_double(r[1]), loss = to_double(r[2]);
    series[r[0]].emplace_back(epoch, loss);
    max_epoch = std::max(max_epoch, epoch);
    lo = std::min(lo, loss);
    hi = std::max(hi, loss);
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi <= lo) hi = lo + 1.0;
  const double pw = kWidth - 2 * kMargin, ph = kHeight - 2 * kMargin;
  auto sx = [&](double e) { return kMargin + pw * (max_epoch > 1 ? (e - 1) / (max_epoch - 1) : 0.5); };
  auto sy = [&](double v) { return kMargin + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::string svg = header(kWidth, kHeight);
  svg += text(kWidth / 2, 25, "training loss", " text-anchor=\"middle\" font-size=\"14\"");
  svg += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += text(kMargin, kHeight - 20, "epoch 1");
  svg += text(kWidth - kMargin, kHeight - 20, "epoch " + num(max_epoch), " text-anchor=\"end\"");
  svg += text(kMargin - 5, kMargin + 4, num(hi), " text-anchor=\"end\"");
  svg += text(kMargin - 5, kHeight - kMargin + 4, num(lo), " text-anchor=\"end\"");
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::string pts;
    for (const auto& [e, v] : series[order[k]]) pts += num(sx(e)) + "," + num(sy(v)) + " ";
    const char* color = kPalette[k % std::size(kPalette)];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    svg += text(kWidth - kMargin + 5, kMargin + 15.0 * static_cast<double>(k + 1), "seed " + order[k],
                " fill=\"" + std::string(color) + "\"");
  }
  return svg + "</svg>\n";
}

std::string confusion_svg(const CsvTable& confusion, const std::string& title) {
  const std::size_t n = confusion.rows.size();
  const double cell = 60.0, left = 140.0, top = 120.0;
  const double w = left + cell * static_cast<double>(n) + 20.0, h = top + cell * static_cast<double>(n) + 40.0;
  std::string svg = header(w, h);
  svg += text(w / 2, 25, title, " text-anchor=\"middle\" font-size=\"14\"");
  for (std::size_t c = 0; c + 1 < confusion.header.size(); ++c) {
    const double x = left + cell * (static_cast<double>(c) + 0.5);
    svg += text(x, top - 8, confusion.header[c + 1],
                " text-anchor=\"start\" transform=\"rotate(-40 " + num(x) + " " + num(top - 8) + ")\"");
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = confusion.rows[r];
    const double y = top + cell * static_cast<double>(r);
    svg += text(left - 8, y + cell / 2 + 4, row.empty() ? "" : row[0], " text-anchor=\"end\" class=\"row-label\"");
    for (std::size_t c = 1; c < row.size(); ++c) {
      const double v = to_double(row[c]);
      const double x = left + cell * static_cast<double>(c - 1);
      const int shade = static_cast<int>(std::lround(255.0 - 2.0 * std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 100.0)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
             "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
      svg += text(x + cell / 2, y + cell / 2 + 4, std::isnan(v) ? "-" : num(v),
                  " text-anchor=\"middle\"" + std::string(v > 60.0 ? " fill=\"white\"" : ""));
    }
  }
  return svg + "</svg>\n";
}

std::string bar_chart_svg(const std::vector<std::string>& labels, const std::vector<double>& values,
                          const std::string& title) {
  const std::size_t n = labels.size();
  const double bar = 28.0, bottom = 110.0;
  const double w = std::max(kWidth, 2 * kMargin + bar * static_cast<double>(n)), h = kHeight;
  const double ph = h - kMargin - bottom;
  std::string svg = header(w, h);
  svg += text(w / 2, 25, title, " text-anchor=\"middle\" font-size=\"14\"");
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(h - bottom) + "\" x2=\"" + num(w - kMargin) + "\" y2=\"" +
         num(h - bottom) + "\" stroke=\"black\"/>\n";
  svg += text(kMargin - 5, kMargin + 4, "1.00", " text-anchor=\"end\"");
  svg += text(kMargin - 5, h - bottom + 4, "0.00", " text-anchor=\"end\"");
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::isnan(values[i]) ? 0.0 : std::clamp(values[i], 0.0, 1.0);
    const double x = kMargin + bar * static_cast<double>(i) + 4.0;
    const double y = h - bottom - ph * v;
    svg += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(bar - 8.0) + "\" height=\"" +
           num(ph * v) + "\" fill=\"#1f77b4\"/>\n";
    const double lx = x + (bar - 8.0) / 2, ly = h - bottom + 12;
    svg += text(lx, ly, labels[i], " text-anchor=\"end\" transform=\"rotate(-60 " + num(lx) + " " + num(ly) + ")\"");
  }
  return svg + "</svg>\n";
}

std::vector<fs::path> emit_plots(const fs::path& dir) {
  std::vector<fs::path> written;
  if (fs::exists(dir / "report.csv")) {
    plot_run(dir, written);
    return written;
  }
  if (!fs::exists(dir / "table.csv")) {
    throw InputError("'" + dir.string() + "' holds neither report.csv nor table.csv");
  }
  std::vector<fs::directory_entry> entries(fs::directory_iterator(dir), fs::directory_iterator{});
  std::sort(entries.begin(), entries.end());
  for (const auto& e : entries) {
    const auto name = e.path().filename().string();
    if (e.is_directory() && fs::exists(e.path() / "report.csv")) plot_run(e.path(), written);
    if (e.is_regular_file() && name.rfind("confusion_", 0) == 0 && e.path().extension() == ".csv") {
      const std::string method = e.path().stem().string().substr(std::string("confusion_").size());
      write_plot(dir / "plots" / (e.path().stem().string() + ".svg"),
                 confusion_svg(parse_csv(read_text_file(e.path())), method + ": recall (%)"), written);
    }
  }
  if (fs::exists(dir / "per_event.csv")) {
    const auto table = parse_csv(read_text_file(dir / "per_event.csv"));
    for (std::size_t c = 1; c < table.header.size(); ++c) {
      std::vector<std::string> labels;
      std::vector<double> values;
      for (const auto& row : table.rows) {
        if (row.empty() || row[0] == "macro" || c >= row.size()) continue;
        labels.push_back(row[0]);
        values.push_back(to_double(row[c]));
      }
      write_plot(dir / "plots" / ("per_event_" + table.header[c] + ".svg"),
                 bar_chart_svg(labels, values, table.header[c] + ": per-event F"), written);
    }
  }
  return written;
}

}  // namespace mtlse::cli
