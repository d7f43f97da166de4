#include "wpath/instance_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace wpath {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& where, const std::string& msg) {
  fail(ErrorCode::ParseError, where + ": " + msg);
}

std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double json_number(const json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) parse_fail(where, "value is not finite");
  return x;
}

Vector json_vector(const json& v, const std::string& name) {
  if (!v.is_array()) parse_fail(name, "expected an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = json_number(v[i], name + "[" + std::to_string(i) + "]");
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

/// Splits text into rows of comma-separated fields, dropping the header and blank lines.
std::vector<CsvRow> csv_rows(std::string_view text, std::string_view file, std::size_t expected_fields) {
  std::vector<CsvRow> rows;
  std::size_t line = 0;
  bool header = true;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view raw = end == std::string_view::npos ? text : text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line;
    raw = trim(raw);
    if (raw.empty()) continue;
    CsvRow row;
    row.line = line;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = raw.find(',', start);
      row.fields.push_back(trim(raw.substr(start, comma == std::string_view::npos ? raw.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.fields.size() != expected_fields)
      parse_fail(std::string(file) + " line " + std::to_string(line),
                 "expected " + std::to_string(expected_fields) + " fields, found " + std::to_string(row.fields.size()));
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(std::move(row));
  }
  if (header) parse_fail(std::string(file), "missing header line");
  return rows;
}

std::string field_where(std::string_view file, const CsvRow& row, std::size_t field) {
  return std::string(file) + " line " + std::to_string(row.line) + ", field " + std::to_string(field + 1);
}

Index csv_index(std::string_view file, const CsvRow& row, std::size_t field) {
  const std::string_view s = row.fields[field];
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0)
    parse_fail(field_where(file, row, field), "expected a nonnegative integer index");
  if (v > 100000000) parse_fail(field_where(file, row, field), "index is too large");
  return static_cast<Index>(v);
}

double csv_value(std::string_view file, const CsvRow& row, std::size_t field) {
  const std::string_view s = row.fields[field];
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) parse_fail(field_where(file, row, field), "expected a number");
  if (!std::isfinite(v)) parse_fail(field_where(file, row, field), "value is not finite");
  return v;
}

Vector csv_vector(std::string_view text, std::string_view file) {
  const std::vector<CsvRow> rows = csv_rows(text, file, 2);
  std::map<Index, double> entries;
  for (const CsvRow& row : rows) {
    const Index i = csv_index(file, row, 0);
    if (!entries.emplace(i, csv_value(file, row, 1)).second)
      parse_fail(field_where(file, row, 0), "duplicate index " + std::to_string(i));
  }
  Vector out(static_cast<Index>(entries.size()));
  Index expect = 0;
  for (const auto& [i, v] : entries) {
    if (i != expect) fail(ErrorCode::DimensionMismatch, std::string(file) + " is missing index " + std::to_string(expect));
    out[expect++] = v;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void check_shape(const RawLP& lp) {
  if (lp.A.rows() == 0 || lp.A.cols() == 0) fail(ErrorCode::DimensionMismatch, "constraint matrix is empty");
  lp.validate();
}

}  // namespace

InstanceFormat parse_format(std::string_view name) {
  if (name == "json-dense") return InstanceFormat::JsonDense;
  if (name == "csv-triple") return InstanceFormat::CsvTriple;
  fail(ErrorCode::InvalidArgument, "unknown instance format '" + std::string(name) + "'");
}

RawLP parse_json_dense(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    parse_fail(line_col(text, byte), "malformed JSON");
  }
  if (!doc.is_object()) parse_fail("document", "expected an object with A, b and c");
  for (const char* key : {"A", "b", "c"})
    if (!doc.contains(key)) parse_fail("document", std::string("missing key '") + key + "'");

  const json& a = doc["A"];
  if (!a.is_array()) parse_fail("A", "expected an array of rows");
  RawLP lp;
  const std::size_t m = a.size();
  const std::size_t n = m > 0 && a[0].is_array() ? a[0].size() : 0;
  lp.A.resize(static_cast<Index>(m), static_cast<Index>(n));
  for (std::size_t i = 0; i < m; ++i) {
    const std::string row = "A[" + std::to_string(i) + "]";
    if (!a[i].is_array()) parse_fail(row, "expected an array");
    if (a[i].size() != n)
      fail(ErrorCode::DimensionMismatch, row + " has " + std::to_string(a[i].size()) + " entries, expected " + std::to_string(n));
    for (std::size_t j = 0; j < n; ++j)
      lp.A(static_cast<Index>(i), static_cast<Index>(j)) = json_number(a[i][j], row + "[" + std::to_string(j) + "]");
  }
  lp.b = json_vector(doc["b"], "b");
  lp.c = json_vector(doc["c"], "c");
  check_shape(lp);
  return lp;
}

RawLP parse_csv_triple(std::string_view a_text, std::string_view b_text, std::string_view c_text) {
  RawLP lp;
  lp.b = csv_vector(b_text, "b.csv");
  lp.c = csv_vector(c_text, "c.csv");
  lp.A = Matrix::Zero(lp.b.size(), lp.c.size());
  std::map<std::pair<Index, Index>, bool> seen;
  for (const CsvRow& row : csv_rows(a_text, "A.csv", 3)) {
    const Index i = csv_index("A.csv", row, 0);
    const Index j = csv_index("A.csv", row, 1);
    const double v = csv_value("A.csv", row, 2);
    if (i >= lp.A.rows() || j >= lp.A.cols())
      fail(ErrorCode::DimensionMismatch, "A.csv line " + std::to_string(row.line) + ": entry (" + std::to_string(i) + ", " +
                                             std::to_string(j) + ") is outside the shape given by b and c");
    if (!seen.emplace(std::make_pair(i, j), true).second)
      parse_fail(field_where("A.csv", row, 0), "duplicate entry");
    lp.A(i, j) = v;
  }
  check_shape(lp);
  return lp;
}

RawLP parse_instance(const std::filesystem::path& path, InstanceFormat format) {
  if (format == InstanceFormat::JsonDense) return parse_json_dense(read_file(path));
  const std::filesystem::path dir = path.parent_path();
  return parse_csv_triple(read_file(path), read_file(dir / "b.csv"), read_file(dir / "c.csv"));
}

std::string emit_json_dense(const RawLP& lp) {
  json doc;
  json a = json::array();
  for (Index i = 0; i < lp.A.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < lp.A.cols(); ++j) row.push_back(lp.A(i, j));
    a.push_back(std::move(row));
  }
  doc["A"] = std::move(a);
  doc["b"] = std::vector<double>(lp.b.data(), lp.b.data() + lp.b.size());
  doc["c"] = std::vector<double>(lp.c.data(), lp.c.data() + lp.c.size());
  return doc.dump() + "\n";
}

std::filesystem::path write_csv_triple(const RawLP& lp, const std::filesystem::path& dir) {
  auto put = [](std::ostream& out, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  std::ofstream a(dir / "A.csv");
  a << "i,j,value\n";
  for (Index i = 0; i < lp.A.rows(); ++i)
    for (Index j = 0; j < lp.A.cols(); ++j) {
      if (lp.A(i, j) == 0.0) continue;
      a << i << ',' << j << ',';
      put(a, lp.A(i, j));
      a << '\n';
    }
  auto vec = [&](const std::filesystem::path& p, const Vector& v) {
    std::ofstream out(p);
    out << "i,value\n";
    for (Index i = 0; i < v.size(); ++i) {
      out << i << ',';
      put(out, v[i]);
      out << '\n';
    }
  };
  vec(dir / "b.csv", lp.b);
  vec(dir / "c.csv", lp.c);
  if (!a) fail(ErrorCode::ParseError, (dir / "A.csv").string() + ": write failed");
  return dir / "A.csv";
}

}  // namespace wpath
