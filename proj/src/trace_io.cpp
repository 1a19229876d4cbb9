#include "asgd/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "asgd/error.hpp"

namespace asgd {

namespace {

const char* const kFixedColumns[] = {"k",      "h",      "t",          "f_gap",
                                     "E_sc",   "E_ac_c", "x_norm_to_opt", "v_norm_to_opt",
                                     "noise_norm", "E_gd_c", "E_gd_sc", "clamped"};
constexpr int kFixedCount = 12;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell) {
  char* end = nullptr;
  const double value = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str()) throw ConfigError("trace csv: cannot parse number '" + cell + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  Eigen::Index dim = 0;
  if (!trace.records.empty()) dim = trace.records.front().x.size();
  for (int i = 0; i < kFixedCount; ++i) out << (i ? "," : "") << kFixedColumns[i];
  for (const char* prefix : {"x", "v", "e"}) {
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << prefix << i;
  }
  out << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.k;
    for (double value : {r.h, r.t, r.f_gap, r.e_sc, r.e_ac_c, r.x_dist, r.v_dist, r.noise_norm,
                         r.e_gd_c, r.e_gd_sc}) {
      out << ',' << format_double(value);
    }
    out << ',' << (r.clamped ? 1 : 0);
    if (dim > 0) {
      for (const Vec* vec : {&r.x, &r.v, &r.noise}) {
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << format_double((*vec)(i));
      }
    }
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  if (!out) throw Error("failed writing '" + path + "'");
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trace csv: empty input");
  const auto header = split(line);
  if (static_cast<int>(header.size()) < kFixedCount) {
    throw ConfigError("trace csv: header has too few columns");
  }
  for (int i = 0; i < kFixedCount; ++i) {
    if (header[i] != kFixedColumns[i]) {
      throw ConfigError("trace csv: unexpected column '" + header[i] + "'");
    }
  }
  const std::size_t extra = header.size() - kFixedCount;
  if (extra % 3 != 0) throw ConfigError("trace csv: vector columns are not x, v, e triples");
  const auto dim = static_cast<Eigen::Index>(extra / 3);

  Trace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ConfigError("trace csv: line " + std::to_string(line_no) + " has " +
                        std::to_string(cells.size()) + " cells");
    }
    TraceRecord r;
    r.k = std::stoll(cells[0]);
    double* fields[] = {&r.h,     &r.t,      &r.f_gap,      &r.e_sc,   &r.e_ac_c,
                        &r.x_dist, &r.v_dist, &r.noise_norm, &r.e_gd_c, &r.e_gd_sc};
    for (int i = 0; i < 10; ++i) *fields[i] = parse_double(cells[i + 1]);
    r.clamped = cells[11] == "1";
    if (dim > 0) {
      r.x.resize(dim);
      r.v.resize(dim);
      r.noise.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        r.x(i) = parse_double(cells[kFixedCount + i]);
        r.v(i) = parse_double(cells[kFixedCount + dim + i]);
        r.noise(i) = parse_double(cells[kFixedCount + 2 * dim + i]);
      }
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_trace_csv(in);
}

}  // namespace asgd
