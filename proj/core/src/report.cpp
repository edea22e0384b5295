#include "sketchreg/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sketchreg/errors.hpp"

namespace sketchreg {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc{} && res.ptr == e;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.pop_back();
  }
  return fields;
}

DataSet ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  Index width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    std::vector<double> vals(fields.size());
    bool numeric = true;
    for (size_t i = 0; i < fields.size(); ++i) {
      if (!parse_double(fields[i], vals[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header line
      throw ParseError("malformed row at line " + std::to_string(lineno));
    }
    for (double v : vals)
      if (!std::isfinite(v))
        throw InvalidValue("non-finite value at line " + std::to_string(lineno));
    if (width < 0) width = static_cast<Index>(vals.size());
    if (static_cast<Index>(vals.size()) != width)
      throw ParseError("inconsistent column count at line " + std::to_string(lineno));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("no data rows in " + path);
  if (width < 2) throw ParseError("need at least one feature column and a label");
  DataSet data;
  const Index n = static_cast<Index>(rows.size());
  const Index d = width - 1;
  data.points.resize(n, d);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) data.points(i, j) = rows[i][j];
    data.labels(i) = rows[i][d];
  }
  return data;
}

DataSet ingest_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  if (!in || n == 0 || d == 0 || n > (1u << 26) || d > (1u << 22))
    throw ParseError("bad binary dataset header in " + path);
  DataSet data;
  data.points.resize(static_cast<Index>(n), static_cast<Index>(d));
  data.labels.resize(static_cast<Index>(n));
  std::vector<double> row(d + 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * (d + 1)));
    if (!in) throw ParseError("truncated binary dataset " + path);
    for (double v : row)
      if (!std::isfinite(v)) throw InvalidValue("non-finite value in " + path);
    for (std::uint64_t j = 0; j < d; ++j)
      data.points(static_cast<Index>(i), static_cast<Index>(j)) = row[j];
    data.labels(static_cast<Index>(i)) = row[d];
  }
  return data;
}

}  // namespace

DataSet ingest_dataset(const std::string& path, DataFormat format) {
  return format == DataFormat::Csv ? ingest_csv(path) : ingest_binary(path);
}

void emit_dataset(const std::string& path, const DataSet& data, DataFormat format) {
  if (format == DataFormat::Csv) {
    std::ostringstream out;
    for (Index i = 0; i < data.n(); ++i) {
      for (Index j = 0; j < data.dim(); ++j)
        out << format_double(data.points(i, j)) << ',';
      out << format_double(data.labels(i)) << '\n';
    }
    write_text_file(path, out.str());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(data.n());
  const std::uint64_t d = static_cast<std::uint64_t>(data.dim());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&d), sizeof(d));
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) {
      const double v = data.points(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    const double y = data.labels(i);
    out.write(reinterpret_cast<const char*>(&y), sizeof(y));
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_csv(const std::string& path, const CsvTable& table) {
  if (table.rows.empty()) throw InvalidInput("refusing to write empty table");
  std::ostringstream out;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string render_loglog_svg(const std::vector<SvgSeries>& series,
                              const std::string& title,
                              const std::string& annotation) {
  const double W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;

  auto px = [&](double lx) { return ML + (lx - xmin) / (xmax - xmin) * (W - ML - MR); };
  auto py = [&](double ly) { return H - MB - (ly - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"14\">" << title << "</text>\n";
  // axes
  svg << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
      << "\" y2=\"" << H - MB << "\" stroke=\"black\"/>\n";
  // decade ticks
  for (int e = static_cast<int>(std::floor(xmin)); e <= static_cast<int>(std::ceil(xmax)); ++e) {
    if (e < xmin - 1e-9 || e > xmax + 1e-9) continue;
    svg << "<line x1=\"" << px(e) << "\" y1=\"" << H - MB << "\" x2=\"" << px(e)
        << "\" y2=\"" << H - MB + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(e) << "\" y=\"" << H - MB + 20
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">1e"
        << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::floor(ymin)); e <= static_cast<int>(std::ceil(ymax)); ++e) {
    if (e < ymin - 1e-9 || e > ymax + 1e-9) continue;
    svg << "<line x1=\"" << ML - 5 << "\" y1=\"" << py(e) << "\" x2=\"" << ML
        << "\" y2=\"" << py(e) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ML - 8 << "\" y=\"" << py(e) + 4
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e"
        << e << "</text>\n";
  }
  double ly = MT + 14;
  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] <= 0 || s.y[i] <= 0) continue;
      svg << px(std::log10(s.x[i])) << ',' << py(std::log10(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    if (!s.label.empty()) {
      svg << "<text x=\"" << W - MR - 6 << "\" y=\"" << ly
          << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\" fill=\""
          << s.color << "\">" << s.label << "</text>\n";
      ly += 14;
    }
  }
  if (!annotation.empty()) {
    svg << "<text x=\"" << ML + 8 << "\" y=\"" << MT + 14
        << "\" font-family=\"monospace\" font-size=\"12\">" << annotation
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace sketchreg
