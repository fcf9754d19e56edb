#include "zzhd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "zzhd/errors.hpp"

namespace zzhd {

namespace {

// Iterates non-blank lines after the header, handing split fields and the
// 1-based line number to `row`.
template <class F>
void for_each_csv_row(std::string_view text, std::string_view what, std::size_t width, F row) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != width) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " fields");
    }
    row(fields, line_no);
  }
}

Timestamp need_time(std::string_view field, std::string_view what, std::size_t line_no) {
  const auto t = parse_iso8601(field);
  if (!t) throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": bad timestamp");
  return *t;
}

double need_real(std::string_view field, std::string_view what, std::size_t line_no) {
  const std::string f(trim(field));
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(v)) {
    throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": bad number");
  }
  return v;
}

std::string fixed(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

bool overlaps(Timestamp a0, Timestamp a1, Timestamp b0, Timestamp b1) { return a0 < b1 && b0 < a1; }

}  // namespace

std::string format_labels_csv(std::span<const GroundTruthLabel> labels) {
  std::string out = "src_ip,start_iso,end_iso,label\n";
  for (const GroundTruthLabel& l : labels) {
    out += escape_csv_field(l.src_ip) + "," + format_iso8601(l.start) + "," + format_iso8601(l.end) + "," +
           l.label + "\n";
  }
  return out;
}

std::vector<GroundTruthLabel> parse_labels_csv(std::string_view text) {
  std::vector<GroundTruthLabel> out;
  for_each_csv_row(text, "labels", 4, [&](const std::vector<std::string>& f, std::size_t line_no) {
    GroundTruthLabel l{std::string(trim(f[0])), need_time(f[1], "labels", line_no),
                       need_time(f[2], "labels", line_no), std::string(trim(f[3]))};
    if (l.end <= l.start) throw DataError("labels line " + std::to_string(line_no) + ": end before start");
    if (l.label != "benign" && l.label != "malicious") {
      throw DataError("labels line " + std::to_string(line_no) + ": label must be benign or malicious");
    }
    out.push_back(std::move(l));
  });
  return out;
}

std::string format_losses_csv(std::span<const LossRow> rows) {
  std::string out = "src_ip,sub_start_iso,mse_acc,mse_stats\n";
  for (const LossRow& r : rows) {
    out += escape_csv_field(r.src_ip) + "," + format_iso8601(r.sub_start) + "," + format_real(r.mse_acc) + "," +
           format_real(r.mse_stats) + "\n";
  }
  return out;
}

std::vector<LossRow> parse_losses_csv(std::string_view text) {
  std::vector<LossRow> out;
  for_each_csv_row(text, "losses", 4, [&](const std::vector<std::string>& f, std::size_t line_no) {
    LossRow r{std::string(trim(f[0])), need_time(f[1], "losses", line_no), need_real(f[2], "losses", line_no),
              need_real(f[3], "losses", line_no)};
    if (r.mse_acc < 0 || r.mse_stats < 0) throw DataError("losses line " + std::to_string(line_no) + ": negative loss");
    out.push_back(std::move(r));
  });
  return out;
}

std::optional<double> percentile(std::vector<double> values, double p) {
  if (values.empty()) return std::nullopt;
  if (!(p > 0 && p <= 100)) throw ConfigError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size()) / 100.0));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

std::string_view to_string(LossGroup g) {
  switch (g) {
    case LossGroup::benign: return "benign";
    case LossGroup::malicious: return "malicious";
    case LossGroup::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

LossGroup classify(const std::string& src_ip, Timestamp start, Timestamp end,
                   std::span<const GroundTruthLabel> labels) {
  bool benign = false;
  for (const GroundTruthLabel& l : labels) {
    if (l.src_ip != src_ip || !overlaps(start, end, l.start, l.end)) continue;
    if (l.label == "malicious") return LossGroup::malicious;
    benign = true;
  }
  return benign ? LossGroup::benign : LossGroup::unlabeled;
}

std::vector<PercentileRow> percentile_table(std::span<const LossRow> rows, std::span<const GroundTruthLabel> labels,
                                            std::int64_t subwindow_len) {
  std::vector<PercentileRow> table;
  for (LossGroup g : {LossGroup::benign, LossGroup::malicious, LossGroup::unlabeled}) {
    std::vector<double> acc;
    std::vector<double> stats;
    for (const LossRow& r : rows) {
      if (classify(r.src_ip, r.sub_start, r.sub_start + subwindow_len, labels) != g) continue;
      acc.push_back(r.mse_acc);
      stats.push_back(r.mse_stats);
    }
    table.push_back({g, "acc", acc.size(), percentile(acc, 25), percentile(acc, 50), percentile(acc, 75)});
    table.push_back({g, "stats", stats.size(), percentile(stats, 25), percentile(stats, 50), percentile(stats, 75)});
  }
  return table;
}

std::string format_percentile_csv(std::span<const PercentileRow> table) {
  std::string out = "group,vectorization,count,p25,p50,p75\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const PercentileRow& r : table) {
    out += std::string(to_string(r.group)) + "," + r.vectorization + "," + std::to_string(r.count) + "," +
           cell(r.p25) + "," + cell(r.p50) + "," + cell(r.p75) + "\n";
  }
  return out;
}

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 360;
constexpr double kMargin = 50;

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + fixed(kMargin) + "\" y=\"20\">" + xml_escape(title) + "</text>\n";
}

std::string axes() {
  return "<line x1=\"" + fixed(kMargin) + "\" y1=\"" + fixed(kHeight - kMargin) + "\" x2=\"" + fixed(kWidth - kMargin) +
         "\" y2=\"" + fixed(kHeight - kMargin) + "\" stroke=\"black\"/>\n<line x1=\"" + fixed(kMargin) + "\" y1=\"" +
         fixed(kMargin) + "\" x2=\"" + fixed(kMargin) + "\" y2=\"" + fixed(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
}

}  // namespace

std::string render_loss_svg(const std::string& src_ip, std::span<const LossRow> rows,
                            std::span<const GroundTruthLabel> labels, std::int64_t subwindow_len) {
  std::vector<LossRow> mine;
  for (const LossRow& r : rows) {
    if (r.src_ip == src_ip) mine.push_back(r);
  }
  std::sort(mine.begin(), mine.end(), [](const LossRow& a, const LossRow& b) { return a.sub_start < b.sub_start; });
  std::string out = svg_open("reconstruction loss, " + src_ip);
  if (mine.empty()) return out + "</svg>\n";

  const double t0 = static_cast<double>(mine.front().sub_start);
  const double t1 = std::max(t0 + 1, static_cast<double>(mine.back().sub_start + subwindow_len));
  double ymax = 0;
  for (const LossRow& r : mine) ymax = std::max({ymax, r.mse_acc, r.mse_stats});
  if (ymax <= 0) ymax = 1;
  auto x = [&](double t) { return kMargin + (t - t0) / (t1 - t0) * (kWidth - 2 * kMargin); };
  auto y = [&](double v) { return kHeight - kMargin - v / ymax * (kHeight - 2 * kMargin); };

  for (const GroundTruthLabel& l : labels) {
    if (l.src_ip != src_ip) continue;
    const double a = std::clamp(static_cast<double>(l.start), t0, t1);
    const double b = std::clamp(static_cast<double>(l.end), t0, t1);
    if (b <= a) continue;
    out += "<rect x=\"" + fixed(x(a)) + "\" y=\"" + fixed(kMargin) + "\" width=\"" + fixed(x(b) - x(a)) +
           "\" height=\"" + fixed(kHeight - 2 * kMargin) + "\" fill=\"" +
           (l.label == "malicious" ? "#f4b6b6" : "#c8e6c9") + "\" opacity=\"0.6\"/>\n";
  }
  out += axes();
  const std::pair<const char*, double LossRow::*> series[] = {{"#1f77b4", &LossRow::mse_acc},
                                                              {"#ff7f0e", &LossRow::mse_stats}};
  for (const auto& [color, field] : series) {
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"";
    for (const LossRow& r : mine) {
      const double mid = static_cast<double>(r.sub_start) + static_cast<double>(subwindow_len) / 2;
      out += fixed(x(mid)) + "," + fixed(y(r.*field)) + " ";
    }
    out += "\"/>\n";
  }
  out += "<text x=\"" + fixed(kWidth - 220) + "\" y=\"20\" fill=\"#1f77b4\">acc</text>\n";
  out += "<text x=\"" + fixed(kWidth - 180) + "\" y=\"20\" fill=\"#ff7f0e\">stats</text>\n";
  out += "<text x=\"" + fixed(kMargin) + "\" y=\"" + fixed(kHeight - 15) + "\">" + format_iso8601(static_cast<Timestamp>(t0)) +
         "</text>\n";
  out += "<text x=\"" + fixed(kWidth - kMargin - 140) + "\" y=\"" + fixed(kHeight - 15) + "\">" +
         format_iso8601(static_cast<Timestamp>(t1)) + "</text>\n";
  out += "<text x=\"5\" y=\"" + fixed(kMargin) + "\">" + format_real(ymax) + "</text>\n";
  return out + "</svg>\n";
}

std::string render_barcode_svg(const std::string& src_ip, std::span<const Interval> bars, std::size_t n_snapshots) {
  std::string out = svg_open("barcode, " + src_ip);
  const double span = std::max<double>(1.0, static_cast<double>(n_snapshots == 0 ? 1 : n_snapshots - 1));
  auto x = [&](double v) { return kMargin + v / span * (kWidth - 2 * kMargin); };
  const double rows = std::max<double>(1.0, static_cast<double>(bars.size()));
  const double step = std::min(12.0, (kHeight - 2 * kMargin) / rows);
  out += axes();
  double yy = kMargin;
  for (const Interval& bar : bars) {
    const double b = bar.birth.value();
    const double d = bar.death.is_inf() ? span : bar.death.value();
    out += "<line x1=\"" + fixed(x(b)) + "\" y1=\"" + fixed(yy) + "\" x2=\"" + fixed(x(d)) + "\" y2=\"" + fixed(yy) +
           "\" stroke=\"" + (bar.dim == 0 ? "#1f77b4" : "#d62728") + "\" stroke-width=\"" +
           fixed(std::max(1.0, step * 0.6)) + "\"/>\n";
    yy += step;
  }
  out += "<text x=\"" + fixed(kWidth - 200) + "\" y=\"20\" fill=\"#1f77b4\">dim 0</text>\n";
  out += "<text x=\"" + fixed(kWidth - 140) + "\" y=\"20\" fill=\"#d62728\">dim 1</text>\n";
  return out + "</svg>\n";
}

}  // namespace zzhd
