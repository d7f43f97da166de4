#pragma once

#include <string>

#include "wpath/central_path.hpp"
#include "wpath/lp_driver.hpp"

namespace wpath {

/// One JSON object whose keys are the SolveReport field names. NaN becomes null.
std::string report_json(const SolveReport& rep);

std::string report_text(const SolveReport& rep);

/// One JSONL line without the trailing newline.
std::string trace_json(const TraceRecord& rec);

}  // namespace wpath
