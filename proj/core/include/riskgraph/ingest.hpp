#pragma once

#include "riskgraph/types.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace riskgraph::ingest {

/// Maps DriverLogRecord fields to CSV column names. Track groups are
/// discovered from the header by prefix: columns `<prefix>{i}_id`,
/// `<prefix>{i}_dx`, ... for i = 0,1,2,...
struct LogSchema {
    std::string timestamp = "t";
    std::string ax = "ax";
    std::string ay = "ay";
    std::string steer = "steer";
    std::string brake = "brake";
    std::string throttle = "throttle";
    std::string vx = "vx";
    std::string vy = "vy";
    std::string lane_left = "lane_left";
    std::string lane_center_left = "lane_center_left";
    std::string lane_center_right = "lane_center_right";
    std::string cipv = "cipv_id";   ///< optional column; empty cell = none
    std::string track_prefix = "trk";
};

/// Parse a schema description from JSON text. Absent keys keep defaults.
LogSchema parse_schema(const std::string& json_text);

struct ParseResult {
    std::vector<DriverLogRecord> records;
    std::size_t skipped_rows = 0; ///< malformed rows counted and dropped
};

/// Parse CSV content into records. Rows must already be in timestamp
/// order; a row that breaks monotonicity, fails to parse, or has the wrong
/// cell count is counted in skipped_rows and dropped.
/// Throws SchemaError if a required column is missing, EmptyInputError if
/// no valid rows remain.
ParseResult parse_log(const std::string& csv_text, const LogSchema& schema);

/// Canonical CSV for a record sequence (schema names, shortest round-trip
/// number formatting, \n line ends). parse_log(write_csv(r)) == r.
std::string write_csv(const std::vector<DriverLogRecord>& records, const LogSchema& schema);

/// JSON-Lines serialization: a {"kind":"frames","digest":...} header line
/// (the digest records the producing configuration), then one record
/// object per line, keys named exactly after the DriverLogRecord fields.
std::string write_jsonl(const std::vector<DriverLogRecord>& records,
                        const std::string& digest = "");
std::vector<DriverLogRecord> read_jsonl(const std::string& jsonl_text);

/// Local weighted linear regression smoother (tricube weights, degree-1
/// fit, truncated one-sided windows at the ends). span must be odd and in
/// [3, values.size()]; exact on affine inputs.
std::vector<double> smooth_series(const std::vector<double>& values, std::size_t span);

/// Channel selection for smooth_log.
enum class SmoothChannels { ax_only, all };

/// Smooth the continuous host channels of a log in place. `all` covers
/// ax, ay, steer, brake, throttle, vx, vy and the three lane offsets;
/// brake/throttle are re-clamped to [0,1] afterwards. Lane offsets are
/// smoothed only when detected in every record (NaN gaps are left as-is).
void smooth_log(std::vector<DriverLogRecord>& records, std::size_t span, SmoothChannels channels);

} // namespace riskgraph::ingest
