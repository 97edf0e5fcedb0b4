#pragma once

// Tabular output: CSV, JSON and a fixed-width text table.
//
// CSV: header row, RFC-4180 quoting, "." decimal point, 12 significant
// digits. Complex values become two columns <name>_re, <name>_im.
// JSON: array of flat objects with the same keys; complex values are
// {"re": .., "im": ..} objects. Numbers are rounded to 12 significant digits
// in both formats so the two carry identical values.

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spinscatter/errors.hpp"
#include "spinscatter/sweep.hpp"

namespace spinscatter::io {

using Value = std::variant<double, std::complex<double>, std::string>;
using Row = std::vector<std::pair<std::string, Value>>;

enum class Format { table, csv, json };

inline Format parse_format(std::string_view s) {
  if (s == "table") return Format::table;
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw InputError("unknown format '" + std::string(s) + "' (expected table, csv or json)");
}

inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double round_significant(double v) {
  return std::strtod(format_number(v).c_str(), nullptr);
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_columns(const Row& row) {
  std::vector<std::string> cols;
  for (const auto& [key, v] : row) {
    if (std::holds_alternative<std::complex<double>>(v)) {
      cols.push_back(key + "_re");
      cols.push_back(key + "_im");
    } else {
      cols.push_back(key);
    }
  }
  return cols;
}

inline void require_homogeneous(std::span<const Row> rows) {
  for (const auto& row : rows) {
    if (row.size() != rows.front().size()) throw InputError("emit: records have different keys");
    for (std::size_t i = 0; i < row.size(); ++i)
      if (row[i].first != rows.front()[i].first || row[i].second.index() != rows.front()[i].second.index())
        throw InputError("emit: records have different keys");
  }
}

/// `header` is used only when `rows` is empty.
inline void emit_csv(std::ostream& out, std::span<const Row> rows, const std::vector<std::string>& header = {}) {
  require_homogeneous(rows);
  const auto cols = rows.empty() ? header : csv_columns(rows.front());
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_quote(cols[i]);
  out << '\n';
  for (const auto& row : rows) {
    bool first = true;
    auto cell = [&](const std::string& s) {
      out << (first ? "" : ",") << s;
      first = false;
    };
    for (const auto& [key, v] : row) {
      if (const auto* d = std::get_if<double>(&v)) {
        cell(format_number(*d));
      } else if (const auto* c = std::get_if<std::complex<double>>(&v)) {
        cell(format_number(c->real()));
        cell(format_number(c->imag()));
      } else {
        cell(csv_quote(std::get<std::string>(v)));
      }
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Row& row) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& [key, v] : row) {
    if (const auto* d = std::get_if<double>(&v)) {
      obj[key] = round_significant(*d);
    } else if (const auto* c = std::get_if<std::complex<double>>(&v)) {
      obj[key] = {{"re", round_significant(c->real())}, {"im", round_significant(c->imag())}};
    } else {
      obj[key] = std::get<std::string>(v);
    }
  }
  return obj;
}

inline void emit_json(std::ostream& out, std::span<const Row> rows) {
  require_homogeneous(rows);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) arr.push_back(to_json(row));
  out << arr.dump(2) << '\n';
}

inline void emit_json_object(std::ostream& out, const Row& row) { out << to_json(row).dump(2) << '\n'; }

inline std::string table_cell(const Value& v) {
  char buf[64];
  if (const auto* d = std::get_if<double>(&v)) {
    std::snprintf(buf, sizeof buf, "%.6f", *d == 0.0 ? 0.0 : *d);
    return buf;
  }
  if (const auto* c = std::get_if<std::complex<double>>(&v)) {
    std::snprintf(buf, sizeof buf, "%.6f%+.6fi", c->real() == 0.0 ? 0.0 : c->real(),
                  c->imag() == 0.0 ? 0.0 : c->imag());
    return buf;
  }
  return std::get<std::string>(v);
}

inline void emit_table(std::ostream& out, std::span<const Row> rows, const std::vector<std::string>& header = {}) {
  require_homogeneous(rows);
  std::vector<std::string> cols;
  if (rows.empty()) cols = header;
  else for (const auto& [key, v] : rows.front()) cols.push_back(key);
  std::vector<std::size_t> width(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) width[i] = cols[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    auto& line = cells.emplace_back();
    for (std::size_t i = 0; i < row.size(); ++i) {
      line.push_back(table_cell(row[i].second));
      width[i] = std::max(width[i], line.back().size());
    }
  }
  auto print = [&](const std::vector<std::string>& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out << (i ? "  " : "") << line[i];
      if (i + 1 < line.size()) out << std::string(width[i] - line[i].size(), ' ');
    }
    out << '\n';
  };
  print(cols);
  for (const auto& line : cells) print(line);
}

inline void emit(std::ostream& out, std::span<const Row> rows, Format format,
                 const std::vector<std::string>& header = {}) {
  switch (format) {
    case Format::csv: emit_csv(out, rows, header); break;
    case Format::json: emit_json(out, rows); break;
    case Format::table: emit_table(out, rows, header); break;
  }
}

inline Row to_row(const SweepRecord& rec) {
  Row row;
  for (const auto& [k, v] : rec.parameters) row.emplace_back(k, v);
  for (const auto& [k, v] : rec.outcomes) row.emplace_back(k, v);
  return row;
}

inline std::vector<Row> to_rows(std::span<const SweepRecord> records) {
  std::vector<Row> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_row(r));
  return rows;
}

/// Reads back an array written by emit_json for sweep records: every value is
/// a number.
inline std::vector<std::vector<std::pair<std::string, double>>> parse_json_records(const std::string& text) {
  const auto doc = nlohmann::ordered_json::parse(text);
  if (!doc.is_array()) throw InputError("records JSON: expected an array");
  std::vector<std::vector<std::pair<std::string, double>>> out;
  for (const auto& obj : doc) {
    auto& rec = out.emplace_back();
    for (const auto& [key, v] : obj.items()) {
      if (!v.is_number()) throw InputError("records JSON: non-numeric value for " + key);
      rec.emplace_back(key, v.get<double>());
    }
  }
  return out;
}

}  // namespace spinscatter::io
