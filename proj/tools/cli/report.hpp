#pragma once

#include <string>

namespace survcontour::cli {

// Self-contained HTML page that embeds the JSON payloads verbatim and draws them client-side.
std::string render_report(const std::string& contour_json, const std::string& quantiles_json,
                          const std::string& metrics_json, const std::string& ingest_json);

}  // namespace survcontour::cli
