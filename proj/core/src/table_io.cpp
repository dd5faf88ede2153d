#include "sdkit/table_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "sdkit/expr.hpp"

namespace sdkit {

namespace {

std::string csv_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  return format_number(v);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t line) {
  if (!cell.empty() && cell.back() == '\r') cell.remove_suffix(1);
  if (cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (cell == "Inf") return std::numeric_limits<double>::infinity();
  if (cell == "-Inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty())
    throw std::invalid_argument("line " + std::to_string(line) + ": not a number: '" + std::string(cell) + "'");
  return v;
}

}  // namespace

std::string table_to_csv(const TimeSeriesTable& table) {
  std::string out = "time";
  for (const auto& n : table.column_names()) out += "," + n;
  out += "\n";
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    out += csv_number(table.times()[r]);
    for (std::size_t c = 0; c < table.column_count(); ++c) {
      out += ",";
      out += csv_number(table.column(c)[r]);
    }
    out += "\n";
  }
  return out;
}

TimeSeriesTable table_from_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw std::invalid_argument("empty CSV");
  std::string_view header = lines[0];
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  auto head = split(header, ',');
  if (head.empty() || head[0] != "time") throw std::invalid_argument("first column must be 'time'");
  std::vector<std::string> names(head.begin() + 1, head.end());
  TimeSeriesTable table(names);
  std::vector<double> row(names.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto cells = split(lines[i], ',');
    if (cells.size() != head.size())
      throw std::invalid_argument("line " + std::to_string(i + 1) + ": expected " + std::to_string(head.size()) +
                                  " fields");
    double t = parse_cell(cells[0], i + 1);
    for (std::size_t c = 0; c < names.size(); ++c) row[c] = parse_cell(cells[c + 1], i + 1);
    table.add_row(t, row);
  }
  return table;
}

std::string table_to_json(const TimeSeriesTable& table) {
  // Numbers are written by hand so the text matches the CSV digits.
  std::string out = "{\"columns\":[\"time\"";
  for (const auto& n : table.column_names()) out += "," + nlohmann::json(n).dump();
  out += "],\"rows\":[";
  auto num = [](double v) { return std::isfinite(v) ? format_number(v) : std::string("null"); };
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    if (r) out += ",";
    out += "[" + num(table.times()[r]);
    for (std::size_t c = 0; c < table.column_count(); ++c) out += "," + num(table.column(c)[r]);
    out += "]";
  }
  out += "]}\n";
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
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
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

std::string table_to_svg(const TimeSeriesTable& table, std::string_view title) {
  static const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                        "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double width = 800, height = 480;
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;

  double t0 = 0, t1 = 1, y0 = 0, y1 = 1;
  if (table.row_count() > 0) {
    t0 = table.times().front();
    t1 = table.times().back();
    y0 = std::numeric_limits<double>::infinity();
    y1 = -y0;
    for (std::size_t c = 0; c < table.column_count(); ++c)
      for (double v : table.column(c))
        if (std::isfinite(v)) {
          y0 = std::min(y0, v);
          y1 = std::max(y1, v);
        }
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  }
  if (t1 <= t0) t1 = t0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto px = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  auto py = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double t = t0 + (t1 - t0) * k / 4.0, v = y0 + (y1 - y0) * k / 4.0;
    s << "<text x=\"" << fixed(px(t)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << format_number(std::round(t * 100) / 100) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << fixed(py(v) + 4) << "\" text-anchor=\"end\">"
      << format_number(std::round(v * 100) / 100) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">time</text>\n";

  for (std::size_t c = 0; c < table.column_count(); ++c) {
    const char* color = palette[c % (sizeof palette / sizeof *palette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto& col = table.column(c);
    bool first = true;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (!std::isfinite(col[r])) continue;
      if (!first) s << ' ';
      s << fixed(px(table.times()[r])) << ',' << fixed(py(col[r]));
      first = false;
    }
    s << "\"/>\n";
    double ly = top + 10 + 18.0 * static_cast<double>(c);
    s << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(table.column_names()[c])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sdkit
