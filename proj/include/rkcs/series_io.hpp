// SPDX-License-Identifier: Apache-2.0
//
// CSV serialization of diagnostics series and ensemble snapshots. Numbers are
// written in scientific notation with 17 significant digits so that reading a
// file back reproduces the in-memory doubles bit for bit.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rkcs/diagnostics.hpp"
#include "rkcs/ensemble.hpp"
#include "rkcs/errors.hpp"

namespace rkcs {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DataError("malformed number '" + std::string(s) + "'");
  }
  return v;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    std::string_view l = text.substr(start, pos - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back(l);
    start = pos + 1;
  }
  return lines;
}

}  // namespace detail

inline std::string series_header() {
  std::string h;
  for (std::size_t k = 0; k < DiagnosticsRow::kColumns.size(); ++k) {
    if (k) h += ',';
    h += DiagnosticsRow::kColumns[k];
  }
  return h;
}

/// Header plus one line per row. A failed run ends with a marker line: the
/// time of the last completed step followed by NaN in every other column.
inline std::string series_to_csv(const std::vector<DiagnosticsRow>& rows, std::optional<double> failure_time = {}) {
  std::string out = series_header() + "\r\n";
  for (const auto& r : rows) {
    const auto v = r.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) out += ',';
      out += format_double(v[k]);
    }
    out += "\r\n";
  }
  if (failure_time) {
    out += format_double(*failure_time);
    for (std::size_t k = 1; k < DiagnosticsRow::kColumns.size(); ++k) out += ",nan";
    out += "\r\n";
  }
  return out;
}

struct SeriesData {
  std::vector<DiagnosticsRow> rows;
  std::optional<double> failure_time;
};

inline SeriesData parse_series_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != series_header()) throw DataError("series.csv: missing or unexpected header");
  SeriesData data;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    if (data.failure_time) throw DataError("series.csv: rows after the failure marker");
    const auto fields = detail::split_commas(lines[ln]);
    if (fields.size() != DiagnosticsRow::kColumns.size()) {
      throw DataError("series.csv: line " + std::to_string(ln + 1) + " has " + std::to_string(fields.size()) +
                      " fields");
    }
    std::vector<double> v;
    for (auto f : fields) v.push_back(parse_double(f));
    bool marker = true;
    for (std::size_t k = 1; k < v.size(); ++k) marker = marker && std::isnan(v[k]);
    if (marker) {
      data.failure_time = v[0];
    } else {
      data.rows.push_back(DiagnosticsRow::from_values(v));
    }
  }
  return data;
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

inline std::string read_file_or_data_error(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Snapshots: one line per (recorded time, atom): t, atom, x_1..x_d, w_1..w_d

inline std::string snapshot_header(std::size_t dim) {
  std::string h = "t,atom";
  for (std::size_t k = 0; k < dim; ++k) h += ",x" + std::to_string(k + 1);
  for (std::size_t k = 0; k < dim; ++k) h += ",w" + std::to_string(k + 1);
  return h;
}

inline void append_snapshot(std::string& out, double t, const Ensemble& e) {
  const std::string ts = format_double(t);
  for (std::size_t i = 0; i < e.size(); ++i) {
    out += ts;
    out += ',';
    out += std::to_string(i);
    for (double v : e.x(i)) {
      out += ',';
      out += format_double(v);
    }
    for (double v : e.w(i)) {
      out += ',';
      out += format_double(v);
    }
    out += "\r\n";
  }
}

struct SnapshotSeries {
  std::vector<double> times;
  std::vector<Ensemble> states;
};

inline SnapshotSeries parse_snapshots_csv(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw DataError("snapshots.csv: empty file");
  const auto head = detail::split_commas(lines[0]);
  if (head.size() < 4 || (head.size() - 2) % 2 != 0 || head[0] != "t" || head[1] != "atom") {
    throw DataError("snapshots.csv: unexpected header");
  }
  const std::size_t dim = (head.size() - 2) / 2;
  if (lines[0] != snapshot_header(dim)) throw DataError("snapshots.csv: unexpected header");
  SnapshotSeries s;
  std::vector<double> xs, ws;
  double cur_t = std::numeric_limits<double>::quiet_NaN();
  auto flush = [&] {
    if (xs.empty()) return;
    s.times.push_back(cur_t);
    s.states.emplace_back(dim, std::move(xs), std::move(ws));
    xs.clear();
    ws.clear();
  };
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const auto f = detail::split_commas(lines[ln]);
    if (f.size() != head.size()) throw DataError("snapshots.csv: line " + std::to_string(ln + 1) + " malformed");
    const double t = parse_double(f[0]);
    const auto atom = static_cast<std::size_t>(parse_double(f[1]));
    if (!(t == cur_t)) {
      flush();
      cur_t = t;
    }
    if (atom != xs.size() / dim) throw DataError("snapshots.csv: atoms out of order at line " + std::to_string(ln + 1));
    for (std::size_t k = 0; k < dim; ++k) xs.push_back(parse_double(f[2 + k]));
    for (std::size_t k = 0; k < dim; ++k) ws.push_back(parse_double(f[2 + dim + k]));
  }
  flush();
  return s;
}

}  // namespace rkcs
