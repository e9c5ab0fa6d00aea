#include "riskgraph/ingest.hpp"

#include "riskgraph/errors.hpp"
#include "riskgraph/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace riskgraph::ingest {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool record_well_formed(const DriverLogRecord& r) {
    if (!std::isfinite(r.timestamp)) return false;
    if (!std::isfinite(r.ax) || !std::isfinite(r.ay) || !std::isfinite(r.steer)) return false;
    if (!std::isfinite(r.vx) || !std::isfinite(r.vy)) return false;
    if (!(r.brake >= 0.0 && r.brake <= 1.0)) return false;
    if (!(r.throttle >= 0.0 && r.throttle <= 1.0)) return false;
    std::set<int> ids;
    for (const auto& t : r.tracks) {
        if (!(t.dy >= -30.0 && t.dy <= 100.0)) return false;
        if (!std::isfinite(t.dx) || !std::isfinite(t.dvx) || !std::isfinite(t.dvy)) return false;
        if (!ids.insert(t.track_id).second) return false;
    }
    return true;
}

} // namespace

LogSchema parse_schema(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("schema JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("schema must be a JSON object");
    LogSchema s;
    auto get = [&](const char* key, std::string& field) {
        if (auto it = j.find(key); it != j.end()) {
            if (!it->is_string()) throw SchemaError(std::string("schema field must be a string: ") + key);
            field = it->get<std::string>();
        }
    };
    get("timestamp", s.timestamp);
    get("ax", s.ax);
    get("ay", s.ay);
    get("steer", s.steer);
    get("brake", s.brake);
    get("throttle", s.throttle);
    get("vx", s.vx);
    get("vy", s.vy);
    get("lane_left", s.lane_left);
    get("lane_center_left", s.lane_center_left);
    get("lane_center_right", s.lane_center_right);
    get("cipv", s.cipv);
    get("track_prefix", s.track_prefix);
    return s;
}

ParseResult parse_log(const std::string& csv_text, const LogSchema& schema) {
    auto lines = io::split_lines(csv_text);
    // leading comment lines (e.g. "# digest=...") carry provenance only
    std::size_t first = 0;
    while (first < lines.size() && !lines[first].empty() && lines[first][0] == '#') ++first;
    lines.erase(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(first));
    if (lines.empty()) throw EmptyInputError("empty CSV input");

    const auto header = io::split_csv_line(lines[0]);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);

    auto require = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw SchemaError("missing required column: " + name);
        return it->second;
    };
    const std::size_t c_t = require(schema.timestamp);
    const std::size_t c_ax = require(schema.ax);
    const std::size_t c_ay = require(schema.ay);
    const std::size_t c_steer = require(schema.steer);
    const std::size_t c_brake = require(schema.brake);
    const std::size_t c_throttle = require(schema.throttle);
    const std::size_t c_vx = require(schema.vx);
    const std::size_t c_vy = require(schema.vy);
    const std::size_t c_ll = require(schema.lane_left);
    const std::size_t c_lcl = require(schema.lane_center_left);
    const std::size_t c_lcr = require(schema.lane_center_right);
    std::optional<std::size_t> c_cipv;
    if (auto it = col.find(schema.cipv); it != col.end()) c_cipv = it->second;

    // Track column groups <prefix>{i}_{id,dx,dy,dvx,dvy}, discovered from
    // the header; a partial group is a schema defect, not a bad row.
    struct TrackCols {
        std::size_t id, dx, dy, dvx, dvy;
    };
    std::vector<TrackCols> track_cols;
    for (int i = 0;; ++i) {
        const std::string base = schema.track_prefix + std::to_string(i) + "_";
        auto id_it = col.find(base + "id");
        if (id_it == col.end()) break;
        auto member = [&](const char* suffix) {
            auto it = col.find(base + suffix);
            if (it == col.end())
                throw SchemaError("incomplete track column group: " + base + suffix);
            return it->second;
        };
        TrackCols tc{};
        tc.id = id_it->second;
        tc.dx = member("dx");
        tc.dy = member("dy");
        tc.dvx = member("dvx");
        tc.dvy = member("dvy");
        track_cols.push_back(tc);
    }

    ParseResult result;
    double prev_t = -std::numeric_limits<double>::infinity();
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = io::split_csv_line(lines[li]);
        if (cells.size() != header.size()) {
            ++result.skipped_rows;
            continue;
        }
        try {
            DriverLogRecord r;
            r.timestamp = io::parse_double(cells[c_t]);
            r.ax = io::parse_double(cells[c_ax]);
            r.ay = io::parse_double(cells[c_ay]);
            r.steer = io::parse_double(cells[c_steer]);
            r.brake = io::parse_double(cells[c_brake]);
            r.throttle = io::parse_double(cells[c_throttle]);
            r.vx = io::parse_double(cells[c_vx]);
            r.vy = io::parse_double(cells[c_vy]);
            auto lane = [&](std::size_t c) {
                return cells[c].empty() ? kNaN : io::parse_double(cells[c]);
            };
            r.lane_offsets.left = lane(c_ll);
            r.lane_offsets.center_left = lane(c_lcl);
            r.lane_offsets.center_right = lane(c_lcr);
            if (c_cipv && !cells[*c_cipv].empty())
                r.cipv_id = static_cast<int>(io::parse_int(cells[*c_cipv]));
            for (const auto& tc : track_cols) {
                if (cells[tc.id].empty()) continue;
                TrackObservation obs;
                obs.track_id = static_cast<int>(io::parse_int(cells[tc.id]));
                obs.dx = io::parse_double(cells[tc.dx]);
                obs.dy = io::parse_double(cells[tc.dy]);
                obs.dvx = io::parse_double(cells[tc.dvx]);
                obs.dvy = io::parse_double(cells[tc.dvy]);
                r.tracks.push_back(obs);
            }
            if (!(r.timestamp > prev_t) || !record_well_formed(r)) {
                ++result.skipped_rows;
                continue;
            }
            prev_t = r.timestamp;
            result.records.push_back(std::move(r));
        } catch (const SchemaError&) {
            ++result.skipped_rows;
        }
    }
    if (result.records.empty()) throw EmptyInputError("no valid rows in CSV input");
    return result;
}

std::string write_csv(const std::vector<DriverLogRecord>& records, const LogSchema& schema) {
    std::size_t max_tracks = 0;
    for (const auto& r : records) max_tracks = std::max(max_tracks, r.tracks.size());

    std::string out;
    out += schema.timestamp + ',' + schema.ax + ',' + schema.ay + ',' + schema.steer + ',' +
           schema.brake + ',' + schema.throttle + ',' + schema.vx + ',' + schema.vy + ',' +
           schema.lane_left + ',' + schema.lane_center_left + ',' + schema.lane_center_right +
           ',' + schema.cipv;
    for (std::size_t i = 0; i < max_tracks; ++i) {
        const std::string base = schema.track_prefix + std::to_string(i) + "_";
        for (const char* suffix : {"id", "dx", "dy", "dvx", "dvy"}) out += ',' + base + suffix;
    }
    out += '\n';

    auto num = [](double v) { return io::format_double(v); };
    auto lane = [&](double v) { return std::isnan(v) ? std::string() : num(v); };
    for (const auto& r : records) {
        out += num(r.timestamp) + ',' + num(r.ax) + ',' + num(r.ay) + ',' + num(r.steer) + ',' +
               num(r.brake) + ',' + num(r.throttle) + ',' + num(r.vx) + ',' + num(r.vy) + ',' +
               lane(r.lane_offsets.left) + ',' + lane(r.lane_offsets.center_left) + ',' +
               lane(r.lane_offsets.center_right) + ',' +
               (r.cipv_id ? std::to_string(*r.cipv_id) : std::string());
        for (std::size_t i = 0; i < max_tracks; ++i) {
            if (i < r.tracks.size()) {
                const auto& t = r.tracks[i];
                out += ',' + std::to_string(t.track_id) + ',' + num(t.dx) + ',' + num(t.dy) +
                       ',' + num(t.dvx) + ',' + num(t.dvy);
            } else {
                out += ",,,,,";
            }
        }
        out += '\n';
    }
    return out;
}

namespace {

json lane_to_json(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

double lane_from_json(const json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

json record_to_json(const DriverLogRecord& r) {
    json j;
    j["timestamp"] = r.timestamp;
    j["ax"] = r.ax;
    j["ay"] = r.ay;
    j["steer"] = r.steer;
    j["brake"] = r.brake;
    j["throttle"] = r.throttle;
    j["vx"] = r.vx;
    j["vy"] = r.vy;
    j["lane_offsets"] = {{"left", lane_to_json(r.lane_offsets.left)},
                         {"center_left", lane_to_json(r.lane_offsets.center_left)},
                         {"center_right", lane_to_json(r.lane_offsets.center_right)}};
    json tracks = json::array();
    for (const auto& t : r.tracks) {
        tracks.push_back({{"track_id", t.track_id},
                          {"dx", t.dx},
                          {"dy", t.dy},
                          {"dvx", t.dvx},
                          {"dvy", t.dvy}});
    }
    j["tracks"] = std::move(tracks);
    j["cipv_id"] = r.cipv_id ? json(*r.cipv_id) : json(nullptr);
    return j;
}

DriverLogRecord record_from_json(const json& j) {
    DriverLogRecord r;
    r.timestamp = j.at("timestamp").get<double>();
    r.ax = j.at("ax").get<double>();
    r.ay = j.at("ay").get<double>();
    r.steer = j.at("steer").get<double>();
    r.brake = j.at("brake").get<double>();
    r.throttle = j.at("throttle").get<double>();
    r.vx = j.at("vx").get<double>();
    r.vy = j.at("vy").get<double>();
    const json& lo = j.at("lane_offsets");
    r.lane_offsets.left = lane_from_json(lo.at("left"));
    r.lane_offsets.center_left = lane_from_json(lo.at("center_left"));
    r.lane_offsets.center_right = lane_from_json(lo.at("center_right"));
    for (const json& t : j.at("tracks")) {
        TrackObservation obs;
        obs.track_id = t.at("track_id").get<int>();
        obs.dx = t.at("dx").get<double>();
        obs.dy = t.at("dy").get<double>();
        obs.dvx = t.at("dvx").get<double>();
        obs.dvy = t.at("dvy").get<double>();
        r.tracks.push_back(obs);
    }
    if (auto it = j.find("cipv_id"); it != j.end() && !it->is_null())
        r.cipv_id = it->get<int>();
    return r;
}

} // namespace

std::string write_jsonl(const std::vector<DriverLogRecord>& records, const std::string& digest) {
    std::string out = json{{"kind", "frames"}, {"digest", digest}}.dump();
    out += '\n';
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<DriverLogRecord> read_jsonl(const std::string& jsonl_text) {
    std::vector<DriverLogRecord> records;
    double prev_t = -std::numeric_limits<double>::infinity();
    bool seen_header = false;
    for (const auto& line : io::split_lines(jsonl_text)) {
        if (line.empty()) continue;
        if (!seen_header) {
            seen_header = true;
            try {
                const json h = json::parse(line);
                if (h.at("kind").get<std::string>() != "frames")
                    throw SchemaError("JSONL header kind is not \"frames\"");
            } catch (const json::exception& e) {
                throw SchemaError(std::string("missing or bad JSONL header line: ") + e.what());
            }
            continue;
        }
        DriverLogRecord r;
        try {
            r = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw SchemaError(std::string("bad JSONL record: ") + e.what());
        }
        if (!(r.timestamp > prev_t) || !record_well_formed(r))
            throw ValidationError("JSONL record violates log invariants at t=" +
                                  io::format_double(r.timestamp));
        prev_t = r.timestamp;
        records.push_back(std::move(r));
    }
    if (records.empty()) throw EmptyInputError("no records in JSONL input");
    return records;
}

std::vector<double> smooth_series(const std::vector<double>& values, std::size_t span) {
    const std::size_t n = values.size();
    if (span % 2 == 0 || span < 3 || span > n)
        throw ParameterError("smoothing span must be odd and within [3, length], got " +
                             std::to_string(span) + " for length " + std::to_string(n));

    const std::size_t half = span / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        const double h = static_cast<double>(std::max(i - lo, hi - i));

        // Tricube-weighted least squares line through the window,
        // evaluated at the window center x_i.
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, sy = 0.0, sxy = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double dx = static_cast<double>(j) - static_cast<double>(i);
            const double u = std::abs(dx) / h;
            if (u >= 1.0) continue;
            const double t = 1.0 - u * u * u;
            const double w = t * t * t;
            s0 += w;
            s1 += w * dx;
            s2 += w * dx * dx;
            sy += w * values[j];
            sxy += w * dx * values[j];
        }
        const double det = s0 * s2 - s1 * s1;
        if (det > 1e-12 * s0 * s2) {
            const double b = (s0 * sxy - s1 * sy) / det;
            out[i] = (sy - b * s1) / s0;
        } else {
            out[i] = sy / s0; // effective window too thin for a slope
        }
    }
    return out;
}

void smooth_log(std::vector<DriverLogRecord>& records, std::size_t span, SmoothChannels channels) {
    const std::size_t n = records.size();
    if (n == 0) return;
    if (span > n) span = (n % 2 == 1) ? n : n - 1; // short logs: widest valid window
    if (span < 3) return;

    auto apply = [&](auto getter, bool clamp01) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = *getter(records[i]);
        for (double v : col)
            if (std::isnan(v)) return; // undetected gaps: leave the channel raw
        col = smooth_series(col, span);
        for (std::size_t i = 0; i < n; ++i) {
            double v = col[i];
            if (clamp01) v = std::clamp(v, 0.0, 1.0);
            *getter(records[i]) = v;
        }
    };

    apply([](DriverLogRecord& r) { return &r.ax; }, false);
    if (channels == SmoothChannels::all) {
        apply([](DriverLogRecord& r) { return &r.ay; }, false);
        apply([](DriverLogRecord& r) { return &r.steer; }, false);
        apply([](DriverLogRecord& r) { return &r.brake; }, true);
        apply([](DriverLogRecord& r) { return &r.throttle; }, true);
        apply([](DriverLogRecord& r) { return &r.vx; }, false);
        apply([](DriverLogRecord& r) { return &r.vy; }, false);
        apply([](DriverLogRecord& r) { return &r.lane_offsets.left; }, false);
        apply([](DriverLogRecord& r) { return &r.lane_offsets.center_left; }, false);
        apply([](DriverLogRecord& r) { return &r.lane_offsets.center_right; }, false);
    }
}

} // namespace riskgraph::ingest
