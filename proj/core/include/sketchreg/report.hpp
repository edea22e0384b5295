#pragma once

#include <string>
#include <vector>

#include "sketchreg/kernels.hpp"

namespace sketchreg {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

enum class DataFormat { Csv, BinaryF64le };

// Rows of d features followed by one label. CSV may start with a header line
// (detected as non-numeric); the binary format is u64 n, u64 d, then
// n * (d + 1) little-endian doubles per row.
DataSet ingest_dataset(const std::string& path, DataFormat format);
void emit_dataset(const std::string& path, const DataSet& data, DataFormat format);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

// Minimal hand-rolled log-log line chart: axes, one polyline per series,
// slope annotation.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
};

std::string render_loglog_svg(const std::vector<SvgSeries>& series,
                              const std::string& title,
                              const std::string& annotation);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sketchreg
