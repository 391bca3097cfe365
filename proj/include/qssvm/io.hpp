#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qssvm/dataset.hpp"
#include "qssvm/halfvec.hpp"
#include "qssvm/types.hpp"

namespace qssvm {

/// 17 significant digits, enough to read back the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string t = s.substr(b, e - b + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      field += ch;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  out.push_back(trim(field));
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline bool is_missing(const std::string& s) { return s.empty() || s == "?" || s == "NA" || s == "NaN"; }

}  // namespace detail

/// Which column holds the labels and which label value counts as +1.
struct CsvOptions {
  /// Header name or 0-based index; empty selects the last column.
  std::string label_column;
  /// Label text mapped to +1. Empty accepts only the labels "1"/"+1" and "-1".
  std::string positive_label;
};

/// Reads a labeled CSV. A first row whose feature fields are not all numeric is taken as
/// the header. Rows and columns in errors are 1-based file positions.
inline Dataset load_csv(const std::string& path, const CsvOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_csv_line(line));
    line_no.push_back(no);
  }
  if (rows.empty()) throw EmptyDataset(path + ": no rows");
  const std::size_t width = rows.front().size();
  if (width < 2) throw ParseError(line_no.front(), 1, "need at least one feature and a label column");

  std::size_t label_col = width - 1;
  std::optional<std::size_t> by_index;
  if (!opts.label_column.empty()) {
    if (auto v = detail::parse_number(opts.label_column); v && *v >= 0 && *v == std::floor(*v)) {
      by_index = static_cast<std::size_t>(*v);
      if (*by_index >= width) throw InvalidArgument("label column " + opts.label_column + " out of range");
      label_col = *by_index;
    }
  }
  bool header = false;
  for (std::size_t k = 0; k < width; ++k)
    if (k != label_col && !detail::parse_number(rows.front()[k])) header = true;
  if (!opts.label_column.empty() && !by_index) {
    if (!header) throw InvalidArgument("label column named '" + opts.label_column + "' but the file has no header");
    const auto& names = rows.front();
    const auto it = std::find(names.begin(), names.end(), opts.label_column);
    if (it == names.end()) throw InvalidArgument("no column named '" + opts.label_column + "'");
    label_col = static_cast<std::size_t>(it - names.begin());
  }
  const std::size_t first = header ? 1 : 0;
  const Index m = static_cast<Index>(rows.size() - first);
  if (m == 0) throw EmptyDataset(path + ": header only");

  Matrix X(m, static_cast<Index>(width - 1));
  std::vector<std::string> labels;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != width)
      throw ParseError(line_no[r], std::min(f.size(), width) + 1,
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    Index col = 0;
    for (std::size_t k = 0; k < width; ++k) {
      if (detail::is_missing(f[k])) throw ParseError(line_no[r], k + 1, "missing value");
      if (k == label_col) continue;
      const auto v = detail::parse_number(f[k]);
      if (!v) throw ParseError(line_no[r], k + 1, "not a number: '" + f[k] + "'");
      X(static_cast<Index>(r - first), col++) = *v;
    }
    labels.push_back(f[label_col]);
  }

  std::map<std::string, Index> distinct;
  for (const auto& l : labels) ++distinct[l];
  if (distinct.size() != 2)
    throw NotTwoClasses(path + ": expected two label values, found " + std::to_string(distinct.size()));
  std::string positive = opts.positive_label;
  if (positive.empty()) {
    for (const char* cand : {"1", "+1"})
      if (distinct.count(cand)) positive = cand;
    const bool numeric_pm = !positive.empty() && distinct.count("-1");
    if (!numeric_pm)
      throw InvalidArgument(path + ": labels are not -1/1; name the positive label explicitly");
  } else if (!distinct.count(positive)) {
    throw InvalidArgument(path + ": positive label '" + positive + "' does not occur");
  }
  Vector y(m);
  for (Index i = 0; i < m; ++i) y[i] = labels[static_cast<std::size_t>(i)] == positive ? 1.0 : -1.0;
  return Dataset(std::move(X), std::move(y));
}

/// Reads an all-numeric CSV (optional header row) into a matrix, one sample per row.
inline Matrix load_features_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  bool first = true;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (first) {
      first = false;
      width = f.size();
      if (std::any_of(f.begin(), f.end(), [](const std::string& s) { return !detail::parse_number(s); }))
        continue;  // header
    }
    if (f.size() != width)
      throw ParseError(no, std::min(f.size(), width) + 1,
                       "expected " + std::to_string(width) + " fields, found " + std::to_string(f.size()));
    std::vector<double> r;
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (detail::is_missing(f[k])) throw ParseError(no, k + 1, "missing value");
      const auto v = detail::parse_number(f[k]);
      if (!v) throw ParseError(no, k + 1, "not a number: '" + f[k] + "'");
      r.push_back(*v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw EmptyDataset(path + ": no samples");
  Matrix X(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < width; ++k) X(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  return X;
}

/// Number of comma-separated fields on the first non-blank line.
inline std::size_t csv_width(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  while (std::getline(in, line))
    if (!detail::trim(line).empty()) return detail::split_csv_line(line).size();
  throw EmptyDataset(path + ": no rows");
}

/// Writes `f1,...,fn,label` with labels -1/1 at full precision.
inline void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (Index k = 0; k < d.n(); ++k) out << 'f' << (k + 1) << ',';
  out << "label\n";
  for (Index i = 0; i < d.m(); ++i) {
    for (Index k = 0; k < d.n(); ++k) out << format_double(d.X()(i, k)) << ',';
    out << (d.label(i) > 0 ? "1" : "-1") << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

/// Text model format, one labeled field per line; w is hvec(W) in column order of the
/// lower triangle.
inline std::string serialize_model(const QuadSurfaceModel& model) {
  std::ostringstream os;
  os << "qssvm-model 1\n";
  os << "variant " << to_string(model.variant) << '\n';
  os << "n " << model.dim() << '\n';
  os << "lambda " << format_double(model.lambda) << '\n';
  os << "mu " << (model.mu ? format_double(*model.mu) : std::string("none")) << '\n';
  os << "c " << format_double(model.c) << '\n';
  os << "b";
  for (Index k = 0; k < model.b.size(); ++k) os << ' ' << format_double(model.b[k]);
  os << "\nw";
  const Vector w = hvec(model.W).values();
  for (Index k = 0; k < w.size(); ++k) os << ' ' << format_double(w[k]);
  os << '\n';
  return os.str();
}

inline QuadSurfaceModel parse_model(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::map<std::string, std::vector<std::string>> fields;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> vals;
    for (std::string v; ls >> v;) vals.push_back(v);
    if (row == 1) {
      if (key != "qssvm-model" || vals.size() != 1 || vals[0] != "1")
        throw ParseError(1, 1, "not a model file (missing 'qssvm-model 1')");
      continue;
    }
    fields[key] = std::move(vals);
  }
  auto need = [&](const std::string& k) -> const std::vector<std::string>& {
    const auto it = fields.find(k);
    if (it == fields.end()) throw ParseError(row, 1, "model field '" + k + "' missing");
    return it->second;
  };
  auto number = [&](const std::string& k, const std::string& s) {
    const auto v = detail::parse_number(s);
    if (!v) throw ParseError(row, 1, "model field '" + k + "': bad number '" + s + "'");
    return *v;
  };
  auto scalar = [&](const std::string& k) {
    const auto& v = need(k);
    if (v.size() != 1) throw ParseError(row, 1, "model field '" + k + "' takes one value");
    return v[0];
  };

  QuadSurfaceModel m;
  const auto variant = parse_variant(scalar("variant"));
  if (!variant) throw ParseError(row, 1, "unknown variant '" + scalar("variant") + "'");
  m.variant = *variant;
  const double nd = number("n", scalar("n"));
  if (nd < 1 || nd != std::floor(nd)) throw ParseError(row, 1, "model field 'n' must be a positive integer");
  const auto n = static_cast<Index>(nd);
  m.lambda = number("lambda", scalar("lambda"));
  const std::string mu = scalar("mu");
  if (mu != "none") m.mu = number("mu", mu);
  m.c = number("c", scalar("c"));
  const auto& b = need("b");
  const auto& w = need("w");
  if (static_cast<Index>(b.size()) != n) throw ParseError(row, 1, "model field 'b' needs n values");
  if (static_cast<Index>(w.size()) != half_size(n)) throw ParseError(row, 1, "model field 'w' needs n(n+1)/2 values");
  m.b.resize(n);
  for (Index k = 0; k < n; ++k) m.b[k] = number("b", b[static_cast<std::size_t>(k)]);
  Vector hw(half_size(n));
  for (Index k = 0; k < hw.size(); ++k) hw[k] = number("w", w[static_cast<std::size_t>(k)]);
  m.W = unhvec(HalfVector(n, hw));
  return m;
}

inline void save_model(const std::string& path, const QuadSurfaceModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << serialize_model(model);
  if (!out) throw IoError("write failed: " + path);
}

inline QuadSurfaceModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace qssvm
