#ifndef TVVAR_SERIES_HPP
#define TVVAR_SERIES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tvvar/errors.hpp"

namespace tvvar {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Transform { kNone, kGeometricReturns, kLogReturns };

inline std::string transform_name(Transform tr) {
  switch (tr) {
    case Transform::kGeometricReturns: return "geometric_returns";
    case Transform::kLogReturns: return "log_returns";
    default: return "none";
  }
}

/// Labeled multivariate time series. Rows are time points t = 1..N, columns
/// the p component series. times holds the raw time tokens (integer indices
/// or timestamps), kept verbatim so round-trips are exact.
struct SeriesFrame {
  std::vector<std::string> labels;
  std::vector<std::string> times;
  MatrixXd values;
  Transform transform = Transform::kNone;

  int n() const { return static_cast<int>(values.rows()); }
  int p() const { return static_cast<int>(values.cols()); }
  /// Observation at 1-based time index t.
  VectorXd at(int t) const { return values.row(t - 1).transpose(); }
};

/// N x p frame with integer times 1..N and labels y1..yp (or given labels).
inline SeriesFrame make_frame(const MatrixXd& values,
                              std::vector<std::string> labels = {}) {
  SeriesFrame f;
  f.values = values;
  if (labels.empty())
    for (int j = 0; j < values.cols(); ++j) labels.push_back("y" + std::to_string(j + 1));
  if (static_cast<int>(labels.size()) != values.cols())
    throw DataError("label count does not match column count");
  f.labels = std::move(labels);
  for (int t = 1; t <= values.rows(); ++t) f.times.push_back(std::to_string(t));
  return f;
}

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

struct LoadOptions {
  enum class TimeColumn { kAuto, kFirst, kNone };
  TimeColumn time_column = TimeColumn::kAuto;
};

/// Parse a CSV file with a header row into a SeriesFrame. The first column
/// is treated as the time axis when its header is one of time/t/date/index
/// (or when the options force it). Missing or non-numeric cells are
/// rejected with their row and column coordinates; times must be strictly
/// increasing (numerically when fully numeric, lexicographically otherwise).
inline SeriesFrame load_csv(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);

  bool has_time = false;
  if (opts.time_column == LoadOptions::TimeColumn::kFirst) {
    has_time = true;
  } else if (opts.time_column == LoadOptions::TimeColumn::kAuto && !header.empty()) {
    std::string h0 = header[0];
    std::transform(h0.begin(), h0.end(), h0.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    has_time = (h0 == "time" || h0 == "t" || h0 == "date" || h0 == "index");
  }
  const int p = static_cast<int>(header.size()) - (has_time ? 1 : 0);
  if (p < 1) throw DataError(path + ": no data columns");

  SeriesFrame frame;
  frame.labels.assign(header.begin() + (has_time ? 1 : 0), header.end());
  for (const auto& lbl : frame.labels)
    if (lbl.empty()) throw DataError(path + ": empty column label in header");

  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != static_cast<int>(header.size()))
      throw DataError(path + ": ragged row at line " + std::to_string(lineno) + " (" +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()) + ")");
    if (has_time)
      frame.times.push_back(detail::trim(cells[0]));
    else
      frame.times.push_back(std::to_string(lineno - 1));
    std::vector<double> row(p);
    for (int j = 0; j < p; ++j) {
      const std::string cell = detail::trim(cells[j + (has_time ? 1 : 0)]);
      double v;
      if (cell.empty() || !detail::parse_double(cell, v) || !std::isfinite(v))
        throw DataError(path + ": missing or non-numeric value at line " +
                        std::to_string(lineno) + ", column '" + frame.labels[j] + "'");
      row[j] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  frame.values.resize(static_cast<int>(rows.size()), p);
  for (int i = 0; i < static_cast<int>(rows.size()); ++i)
    for (int j = 0; j < p; ++j) frame.values(i, j) = rows[i][j];

  // Strictly increasing times: numeric comparison when every token parses.
  bool all_numeric = true;
  std::vector<double> tnum(frame.times.size());
  for (size_t i = 0; i < frame.times.size(); ++i)
    if (!detail::parse_double(frame.times[i], tnum[i])) {
      all_numeric = false;
      break;
    }
  for (size_t i = 1; i < frame.times.size(); ++i) {
    const bool ok = all_numeric ? tnum[i] > tnum[i - 1] : frame.times[i] > frame.times[i - 1];
    if (!ok)
      throw DataError(path + ": time column not strictly increasing at row " +
                      std::to_string(i + 1));
  }
  return frame;
}

/// Canonical CSV output: header `time,<labels...>`, values at 17
/// significant digits. load_csv(write_csv(f)) reproduces the bytes.
inline void write_csv(const SeriesFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "time";
  for (const auto& lbl : frame.labels) out << ',' << lbl;
  out << '\n';
  for (int i = 0; i < frame.n(); ++i) {
    out << frame.times[i];
    for (int j = 0; j < frame.p(); ++j) out << ',' << detail::fmt_g17(frame.values(i, j));
    out << '\n';
  }
}

/// Price-to-return transform. Geometric: x_t/x_{t-1} - 1; log:
/// log x_t - log x_{t-1}. Output has N-1 rows, stamped with the times of
/// the later observation.
inline SeriesFrame to_returns(const SeriesFrame& frame, Transform kind) {
  if (frame.transform != Transform::kNone)
    throw DataError("series already transformed (" + transform_name(frame.transform) + ")");
  if (kind == Transform::kNone) return frame;
  if (frame.n() < 2) throw DataError("need at least 2 rows to compute returns");
  SeriesFrame out;
  out.labels = frame.labels;
  out.transform = kind;
  out.times.assign(frame.times.begin() + 1, frame.times.end());
  out.values.resize(frame.n() - 1, frame.p());
  for (int i = 1; i < frame.n(); ++i) {
    for (int j = 0; j < frame.p(); ++j) {
      const double prev = frame.values(i - 1, j);
      const double cur = frame.values(i, j);
      if (kind == Transform::kGeometricReturns) {
        if (prev == 0.0)
          throw DataError("geometric returns: zero price at row " + std::to_string(i) +
                          ", column '" + frame.labels[j] + "'");
        out.values(i - 1, j) = cur / prev - 1.0;
      } else {
        if (prev <= 0.0 || cur <= 0.0)
          throw DataError("log returns: non-positive price at row " +
                          std::to_string(i + 1) + ", column '" + frame.labels[j] + "'");
        out.values(i - 1, j) = std::log(cur) - std::log(prev);
      }
    }
  }
  return out;
}

}  // namespace tvvar

#endif
