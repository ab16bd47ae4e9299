#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qocr/metrics.hpp"

namespace qocr::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestFile = "manifest.json";

// Runs one command line (args excludes the program name). Returns the exit
// code: 0 success, 1 operation error, 2 usage error. Errors are reported as a
// single "error: <kind>: <message>" line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Grouped CRR/WRR bar chart, one group per report, as a standalone SVG document.
std::string bar_chart_svg(const std::vector<metrics::EvalReport>& reports);

}  // namespace qocr::cli
