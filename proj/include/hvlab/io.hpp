// Serialization plumbing shared by the CLI subcommands: deterministic number
// formatting, CSV/JSON/gnuplot file writers.  All writers emit LF line
// endings and no timestamps, so identical inputs produce byte-identical
// artifacts.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"

namespace hvlab::io {

using ordered_json = nlohmann::ordered_json;

/// Shortest-faithful decimal rendering of a double: general format with 17
/// significant digits (round-trip safe), as used in every CSV field.
std::string fmt(double v);

/// Writes `content` verbatim (binary mode, LF endings preserved).  Throws
/// ValidationError when the file cannot be created — the documented
/// "unwritable output directory" case.
void write_text_file(const std::string& path, const std::string& content);

/// Writes a CSV file: one header row, then data rows, comma-separated.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Writes a JSON document with 2-space indentation and a trailing newline.
void write_json_file(const std::string& path, const ordered_json& j);

/// JSON form {"re": …, "im": …} of a complex eigenvalue.
ordered_json complex_to_json(const std::complex<double>& z);

}  // namespace hvlab::io
