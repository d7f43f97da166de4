#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "wpath/lp_driver.hpp"

namespace wpath {

enum class InstanceFormat { JsonDense, CsvTriple };

/// "json-dense" or "csv-triple"; InvalidArgument otherwise.
InstanceFormat parse_format(std::string_view name);

/// {"A": [[...], ...], "b": [...], "c": [...]}.
RawLP parse_json_dense(std::string_view text);

/// Sparse A as "i,j,value" lines after a header, b and c as "i,value" lines
/// after a header. Indices are zero-based; missing entries of A are zero.
RawLP parse_csv_triple(std::string_view a_text, std::string_view b_text, std::string_view c_text);

/// csv-triple reads b.csv and c.csv from the directory holding path.
RawLP parse_instance(const std::filesystem::path& path, InstanceFormat format);

std::string emit_json_dense(const RawLP& lp);

/// Writes A.csv, b.csv and c.csv into dir and returns the path of A.csv.
std::filesystem::path write_csv_triple(const RawLP& lp, const std::filesystem::path& dir);

}  // namespace wpath
