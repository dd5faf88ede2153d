#pragma once

#include <string>
#include <string_view>

#include "sdkit/time_series.hpp"

namespace sdkit {

/// `time,<col>,...` header, one line per row, shortest round-trip decimals,
/// `\n` line endings.
std::string table_to_csv(const TimeSeriesTable& table);
/// Inverse of table_to_csv. Throws std::invalid_argument on malformed input.
TimeSeriesTable table_from_csv(std::string_view text);

/// {"columns":["time",...],"rows":[[t,v,...],...]}
std::string table_to_json(const TimeSeriesTable& table);

/// Line chart: axes, one polyline per column, legend.
std::string table_to_svg(const TimeSeriesTable& table, std::string_view title = {});

}  // namespace sdkit
